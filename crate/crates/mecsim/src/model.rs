//! Domain types and scenario generation.
//!
//! A scenario is a fleet of edge servers plus a per-slot arrival trace of
//! user requests. Both are sampled from a [`ScenarioConfig`] with a seeded
//! RNG, so the same config and seed always produce the same scenario.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid request {id}: {field}: {reason}")]
    InvalidRequest {
        id: u64,
        field: &'static str,
        reason: String,
    },
    #[error("configuration error: {0}")]
    InvalidConfig(String),
    #[error("distances row has {distances} entries but there are {servers} servers")]
    LengthMismatch { distances: usize, servers: usize },
}

/// One user request: resource demand bounds, duration, and the distance to
/// every server in the fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct UERequest {
    pub id: u64,
    /// Minimum and maximum acceptable CPU units.
    pub c_min: f64,
    pub c_max: f64,
    /// Minimum and maximum acceptable RAM units.
    pub r_min: f64,
    pub r_max: f64,
    /// Disk units; fixed, not negotiable.
    pub h: f64,
    /// Requested duration in slots.
    pub t: u32,
    pub arrival_slot: u32,
    /// Distance in meters to each server, indexed by server id.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerState {
    On,
    Idle,
}

/// Per-resource power band: consumption at zero and at full utilization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBand {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsageEnergyParams {
    pub cpu: EnergyBand,
    pub ram: EnergyBand,
    pub disk: EnergyBand,
}

/// A mobile edge server: resource totals, current availability, and its
/// energy parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MesServer {
    pub id: usize,
    pub c_total: f64,
    pub r_total: f64,
    pub h_total: f64,
    pub c_av: f64,
    pub r_av: f64,
    pub h_av: f64,
    /// Energy per slot to keep the server powered on.
    pub keep_on_power: f64,
    pub power_state: PowerState,
    pub usage_energy: UsageEnergyParams,
    /// Slots this server has spent powered on so far.
    pub active_slots: u32,
    /// Maximum distance at which it can serve a request, meters.
    pub coverage_range: f64,
}

impl MesServer {
    pub fn new(
        id: usize,
        c_total: f64,
        r_total: f64,
        h_total: f64,
        keep_on_power: f64,
        usage_energy: UsageEnergyParams,
        coverage_range: f64,
    ) -> Self {
        Self {
            id,
            c_total,
            r_total,
            h_total,
            c_av: c_total,
            r_av: r_total,
            h_av: h_total,
            keep_on_power,
            power_state: PowerState::Idle,
            usage_energy,
            active_slots: 0,
            coverage_range,
        }
    }

    pub fn is_on(&self) -> bool {
        self.power_state == PowerState::On
    }

    /// Fraction of each resource currently allocated, in [0, 1].
    pub fn utilization(&self) -> (f64, f64, f64) {
        let frac = |total: f64, av: f64| {
            if total > 0.0 {
                ((total - av) / total).clamp(0.0, 1.0)
            } else {
                0.0
            }
        };
        (
            frac(self.c_total, self.c_av),
            frac(self.r_total, self.r_av),
            frac(self.h_total, self.h_av),
        )
    }
}

/// A live VM holding one request's allocation on one server.
#[derive(Debug, Clone, PartialEq)]
pub struct VmAllocation {
    pub request_id: u64,
    pub server_id: usize,
    pub alloc_c: f64,
    pub alloc_r: f64,
    pub alloc_h: f64,
    pub start_slot: u32,
    /// Last slot the VM occupies, inclusive.
    pub end_slot: u32,
}

/// Resolved utility coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
}

impl Coefficients {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64, gamma4: f64, gamma5: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            gamma3,
            gamma4,
            gamma5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Use the configured gamma values verbatim.
    Direct,
    /// Compute gammas from weights and fleet totals.
    Derived,
}

/// Everything needed to sample a scenario. Field names double as the keys
/// of the key=value config file format.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_servers: u32,
    pub num_slots: u32,
    /// Poisson mean of request arrivals per slot.
    pub traffic_mean: f64,
    pub seed: u64,

    pub server_cpu_mean: f64,
    pub server_cpu_std: f64,
    pub server_ram_mean: f64,
    pub server_ram_std: f64,
    pub server_disk_mean: f64,
    pub server_disk_std: f64,
    /// Sampled server resources are clamped below at this fraction of the mean.
    pub server_floor_frac: f64,

    pub req_cpu_max_lo: f64,
    pub req_cpu_max_hi: f64,
    pub req_cpu_min_frac_lo: f64,
    pub req_cpu_min_frac_hi: f64,
    pub req_ram_max_lo: f64,
    pub req_ram_max_hi: f64,
    pub req_ram_min_frac_lo: f64,
    pub req_ram_min_frac_hi: f64,
    pub req_disk_lo: f64,
    pub req_disk_hi: f64,
    /// Requested durations are uniform integers in [1, req_time_max].
    pub req_time_max: u32,

    pub distance_min: f64,
    pub distance_max: f64,
    pub coverage_range: f64,

    pub gamma_mode: GammaMode,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    /// None means gamma5 = w5 / e_max with e_max the fleet keep-on sum.
    pub gamma5: Option<f64>,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w5: f64,

    /// Keep-on power per raw resource unit (cpu + ram + disk).
    pub keep_on_coeff: f64,
    /// Per-server multiplicative jitter on keep-on power, so the
    /// energy-per-capacity ranking is not degenerate.
    pub keep_on_jitter_lo: f64,
    pub keep_on_jitter_hi: f64,

    /// Full-utilization usage power per resource, as a fraction of keep-on power.
    pub usage_cpu_max_frac: f64,
    pub usage_ram_max_frac: f64,
    pub usage_disk_max_frac: f64,
    /// Idle usage power as a fraction of the full-utilization value.
    pub usage_min_frac: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_servers: 10,
            num_slots: 1000,
            traffic_mean: 5.0,
            seed: 1,
            server_cpu_mean: 15.0,
            server_cpu_std: 5.0,
            server_ram_mean: 10.0,
            server_ram_std: 2.0,
            server_disk_mean: 25.0,
            server_disk_std: 5.0,
            server_floor_frac: 0.1,
            req_cpu_max_lo: 0.3,
            req_cpu_max_hi: 1.2,
            req_cpu_min_frac_lo: 0.3,
            req_cpu_min_frac_hi: 0.9,
            req_ram_max_lo: 0.15,
            req_ram_max_hi: 0.6,
            req_ram_min_frac_lo: 0.3,
            req_ram_min_frac_hi: 0.9,
            req_disk_lo: 0.5,
            req_disk_hi: 2.0,
            req_time_max: 10,
            distance_min: 1.0,
            distance_max: 1000.0,
            coverage_range: 800.0,
            gamma_mode: GammaMode::Direct,
            gamma1: 0.4,
            gamma2: 0.25,
            gamma3: 0.25,
            gamma4: 0.1,
            gamma5: None,
            w1: 1.0,
            w2: 1.0,
            w3: 1.0,
            w5: 0.005,
            keep_on_coeff: 0.2,
            keep_on_jitter_lo: 0.8,
            keep_on_jitter_hi: 1.2,
            usage_cpu_max_frac: 0.5,
            usage_ram_max_frac: 0.3,
            usage_disk_max_frac: 0.2,
            usage_min_frac: 0.3,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.num_servers == 0 {
            return err("num_servers must be positive".into());
        }
        if self.num_slots == 0 {
            return err("num_slots must be positive".into());
        }
        if !(self.traffic_mean > 0.0) {
            return err(format!("traffic_mean must be positive, got {}", self.traffic_mean));
        }
        for (name, v) in [
            ("server_cpu_mean", self.server_cpu_mean),
            ("server_cpu_std", self.server_cpu_std),
            ("server_ram_mean", self.server_ram_mean),
            ("server_ram_std", self.server_ram_std),
            ("server_disk_mean", self.server_disk_mean),
            ("server_disk_std", self.server_disk_std),
            ("server_floor_frac", self.server_floor_frac),
            ("coverage_range", self.coverage_range),
            ("keep_on_coeff", self.keep_on_coeff),
            ("w1", self.w1),
            ("w2", self.w2),
            ("w3", self.w3),
            ("w5", self.w5),
        ] {
            if !(v > 0.0) {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("usage_cpu_max_frac", self.usage_cpu_max_frac),
            ("usage_ram_max_frac", self.usage_ram_max_frac),
            ("usage_disk_max_frac", self.usage_disk_max_frac),
            ("usage_min_frac", self.usage_min_frac),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return err(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        let ranges = [
            ("req_cpu_max", self.req_cpu_max_lo, self.req_cpu_max_hi),
            ("req_ram_max", self.req_ram_max_lo, self.req_ram_max_hi),
            ("req_disk", self.req_disk_lo, self.req_disk_hi),
            ("distance", self.distance_min, self.distance_max),
            ("keep_on_jitter", self.keep_on_jitter_lo, self.keep_on_jitter_hi),
        ];
        for (name, lo, hi) in ranges {
            if !(lo > 0.0) || hi < lo {
                return err(format!("{name} range [{lo}, {hi}] is degenerate"));
            }
        }
        for (name, lo, hi) in [
            ("req_cpu_min_frac", self.req_cpu_min_frac_lo, self.req_cpu_min_frac_hi),
            ("req_ram_min_frac", self.req_ram_min_frac_lo, self.req_ram_min_frac_hi),
        ] {
            if !(lo > 0.0) || hi < lo || hi > 1.0 {
                return err(format!("{name} range [{lo}, {hi}] must lie in (0, 1]"));
            }
        }
        if self.req_time_max == 0 {
            return err("req_time_max must be at least 1".into());
        }
        if self.distance_min < 1.0 {
            return err(format!(
                "distance_min must be at least 1, got {}",
                self.distance_min
            ));
        }
        if self.gamma_mode == GammaMode::Direct {
            for (name, v) in [
                ("gamma1", self.gamma1),
                ("gamma2", self.gamma2),
                ("gamma3", self.gamma3),
                ("gamma4", self.gamma4),
            ] {
                if !(v > 0.0) {
                    return err(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if let Some(g5) = self.gamma5 {
            if !(g5 > 0.0) {
                return err(format!("gamma5 must be positive, got {g5}"));
            }
        }
        Ok(())
    }
}

/// A fully sampled scenario: immutable once created, safe to share.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub servers: Vec<MesServer>,
    /// arrivals[i] holds the requests arriving at slot i + 1.
    pub arrivals: Vec<Vec<UERequest>>,
    pub coeffs: Coefficients,
    pub seed: u64,
    pub t_max: u32,
    pub d_max: f64,
}

impl Scenario {
    pub fn num_slots(&self) -> u32 {
        self.arrivals.len() as u32
    }

    pub fn total_arrivals(&self) -> u64 {
        self.arrivals.iter().map(|a| a.len() as u64).sum()
    }
}

/// A request fits a server when its minimum demand fits the currently
/// available resources and the user is within coverage range.
pub fn feasibility(req: &UERequest, srv: &MesServer, d: f64) -> bool {
    req.c_min <= srv.c_av && req.r_min <= srv.r_av && req.h <= srv.h_av && d <= srv.coverage_range
}

/// Feasibility of every server in the fleet for one request.
pub fn feasibility_vector(req: &UERequest, servers: &[MesServer]) -> Result<Vec<bool>, ModelError> {
    if req.distances.len() != servers.len() {
        return Err(ModelError::LengthMismatch {
            distances: req.distances.len(),
            servers: servers.len(),
        });
    }
    Ok(servers
        .iter()
        .enumerate()
        .map(|(k, srv)| feasibility(req, srv, req.distances[k]))
        .collect())
}

/// Checks every request invariant; errors name the offending field.
pub fn validate_request(req: &UERequest, t_max: u32, d_max: f64) -> Result<(), ModelError> {
    let fail = |field: &'static str, reason: String| {
        Err(ModelError::InvalidRequest {
            id: req.id,
            field,
            reason,
        })
    };
    if !(req.c_min > 0.0) {
        return fail("c_min", format!("must be positive, got {}", req.c_min));
    }
    if req.c_max < req.c_min {
        return fail("c_max", format!("{} below c_min {}", req.c_max, req.c_min));
    }
    if !(req.r_min > 0.0) {
        return fail("r_min", format!("must be positive, got {}", req.r_min));
    }
    if req.r_max < req.r_min {
        return fail("r_max", format!("{} below r_min {}", req.r_max, req.r_min));
    }
    if !(req.h > 0.0) {
        return fail("h", format!("must be positive, got {}", req.h));
    }
    if req.t < 1 || req.t > t_max {
        return fail("t", format!("{} outside [1, {t_max}]", req.t));
    }
    if req.arrival_slot < 1 {
        return fail("arrival_slot", "slots start at 1".into());
    }
    for &d in &req.distances {
        if !(1.0..=d_max).contains(&d) {
            return fail("distances", format!("{d} outside [1, {d_max}]"));
        }
    }
    Ok(())
}

fn resolve_coefficients(config: &ScenarioConfig, servers: &[MesServer]) -> Coefficients {
    let e_max: f64 = servers.iter().map(|s| s.keep_on_power).sum();
    let gamma5 = config.gamma5.unwrap_or(config.w5 / e_max);
    match config.gamma_mode {
        GammaMode::Direct => Coefficients::new(
            config.gamma1,
            config.gamma2,
            config.gamma3,
            config.gamma4,
            gamma5,
        ),
        GammaMode::Derived => {
            let c_total: f64 = servers.iter().map(|s| s.c_total).sum();
            let r_total: f64 = servers.iter().map(|s| s.r_total).sum();
            let h_total: f64 = servers.iter().map(|s| s.h_total).sum();
            Coefficients::new(
                config.w1 / c_total,
                config.w2 / r_total,
                config.w3 / h_total,
                config.distance_max / config.req_time_max as f64,
                gamma5,
            )
        }
    }
}

/// Samples a scenario. The same config always yields the same scenario.
///
/// Servers are drawn first (CPU, RAM, disk, keep-on jitter per server, in
/// that order), then each slot's arrival count and request fields, so the
/// stream of random draws is fixed by construction.
pub fn sample_scenario(config: &ScenarioConfig) -> Result<Scenario, ModelError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let normal = |mean: f64, std: f64| {
        Normal::new(mean, std).map_err(|e| ModelError::InvalidConfig(e.to_string()))
    };
    let cpu_dist = normal(config.server_cpu_mean, config.server_cpu_std)?;
    let ram_dist = normal(config.server_ram_mean, config.server_ram_std)?;
    let disk_dist = normal(config.server_disk_mean, config.server_disk_std)?;

    let mut servers = Vec::with_capacity(config.num_servers as usize);
    for id in 0..config.num_servers as usize {
        let c = cpu_dist
            .sample(&mut rng)
            .max(config.server_floor_frac * config.server_cpu_mean);
        let r = ram_dist
            .sample(&mut rng)
            .max(config.server_floor_frac * config.server_ram_mean);
        let h = disk_dist
            .sample(&mut rng)
            .max(config.server_floor_frac * config.server_disk_mean);
        let jitter = rng.gen_range(config.keep_on_jitter_lo..=config.keep_on_jitter_hi);
        let keep_on = config.keep_on_coeff * (c + r + h) * jitter;
        let band = |max_frac: f64| EnergyBand {
            min: config.usage_min_frac * max_frac * keep_on,
            max: max_frac * keep_on,
        };
        servers.push(MesServer::new(
            id,
            c,
            r,
            h,
            keep_on,
            UsageEnergyParams {
                cpu: band(config.usage_cpu_max_frac),
                ram: band(config.usage_ram_max_frac),
                disk: band(config.usage_disk_max_frac),
            },
            config.coverage_range,
        ));
    }

    let poisson = Poisson::new(config.traffic_mean)
        .map_err(|e| ModelError::InvalidConfig(format!("traffic_mean: {e}")))?;

    let mut arrivals = Vec::with_capacity(config.num_slots as usize);
    let mut next_id: u64 = 1;
    for slot in 1..=config.num_slots {
        let count = poisson.sample(&mut rng) as usize;
        let mut slot_reqs = Vec::with_capacity(count);
        for _ in 0..count {
            let c_max = rng.gen_range(config.req_cpu_max_lo..=config.req_cpu_max_hi);
            let c_min =
                c_max * rng.gen_range(config.req_cpu_min_frac_lo..=config.req_cpu_min_frac_hi);
            let r_max = rng.gen_range(config.req_ram_max_lo..=config.req_ram_max_hi);
            let r_min =
                r_max * rng.gen_range(config.req_ram_min_frac_lo..=config.req_ram_min_frac_hi);
            let h = rng.gen_range(config.req_disk_lo..=config.req_disk_hi);
            let t = rng.gen_range(1..=config.req_time_max);
            let distances = (0..config.num_servers)
                .map(|_| rng.gen_range(config.distance_min..=config.distance_max))
                .collect();
            let req = UERequest {
                id: next_id,
                c_min,
                c_max,
                r_min,
                r_max,
                h,
                t,
                arrival_slot: slot,
                distances,
            };
            validate_request(&req, config.req_time_max, config.distance_max)?;
            next_id += 1;
            slot_reqs.push(req);
        }
        arrivals.push(slot_reqs);
    }

    let coeffs = resolve_coefficients(config, &servers);
    Ok(Scenario {
        servers,
        arrivals,
        coeffs,
        seed: config.seed,
        t_max: config.req_time_max,
        d_max: config.distance_max,
    })
}
