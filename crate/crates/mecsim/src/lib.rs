//! mecsim — a deterministic slot-based simulator for utility-driven
//! resource allocation across mobile edge servers.
//!
//! A fleet of servers with CPU, RAM, and disk serves randomly arriving
//! user requests. Each request asks for a resource range, a duration, and
//! carries a distance to every server; serving it earns the host a
//! utility that grows with the allocated resources and duration and
//! shrinks with distance. Eight placement policies (four families, each
//! in a comprehensive and a CPU-only variant) compete on service rate,
//! total utility, and energy.
//!
//! ```
//! use mecsim::{sample_scenario, PolicySpec, ScenarioConfig};
//!
//! let config = ScenarioConfig { num_slots: 50, ..Default::default() };
//! let scenario = sample_scenario(&config).unwrap();
//! let result = mecsim::run(&scenario, &PolicySpec::from_name("cgm").unwrap()).unwrap();
//! assert!(result.service_rate > 0.0);
//! ```

// Validation uses the negated form `!(x > 0.0)` on purpose: it rejects NaN
// along with zero and negative values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod energy;
pub mod model;
pub mod policies;
pub mod report;
pub mod simulator;
pub mod utility;

pub use config::{load_config, parse_config, set_key, ConfigError};
pub use energy::{capacity, energy_rank, usage_power, EnergyLedger};
pub use model::{
    feasibility, feasibility_vector, sample_scenario, validate_request, Coefficients, GammaMode,
    MesServer, ModelError, PowerState, Scenario, ScenarioConfig, UERequest, VmAllocation,
};
pub use policies::{
    headroom_fits, order_requests, place, run_slot, PolicyError, PolicyFamily, PolicyScope,
    PolicySpec, POLICY_NAMES,
};
pub use report::{per_slot_csv, summary_line, PER_SLOT_HEADER};
pub use simulator::{
    compare, release_expired, run, RunResult, SimError, Simulation, SlotRecord, TraceEvent,
};
pub use utility::{
    derive_coefficients, optimal_server, penalized_utility, utility, utility_bounds,
    CoefficientSettings, FleetTotals, UtilityBounds, UtilityError,
};
