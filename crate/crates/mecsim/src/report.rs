//! CSV rendering for run results.
//!
//! The per-slot schema is fixed:
//! `slot,policy,seed,arrivals,served,denied,active_servers,slot_utility,cum_utility,slot_energy,cum_energy`
//! with a mandatory header row, `.` as the decimal separator, and
//! newline-terminated rows. Values never contain commas, so no quoting.

use std::fmt::Write as _;

use crate::simulator::RunResult;

pub const PER_SLOT_HEADER: &str =
    "slot,policy,seed,arrivals,served,denied,active_servers,slot_utility,cum_utility,slot_energy,cum_energy";

/// Renders one or more runs as a single per-slot CSV document. Rows keep
/// the order of `results`; identical inputs produce identical bytes.
pub fn per_slot_csv(results: &[&RunResult]) -> String {
    let mut out = String::new();
    out.push_str(PER_SLOT_HEADER);
    out.push('\n');
    for result in results {
        let mut cum_utility = 0.0;
        let mut cum_energy = 0.0;
        for rec in &result.per_slot {
            cum_utility += rec.slot_utility;
            cum_energy += rec.slot_energy;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                rec.slot,
                result.policy,
                result.seed,
                rec.arrivals,
                rec.served,
                rec.denied,
                rec.active_servers,
                rec.slot_utility,
                cum_utility,
                rec.slot_energy,
                cum_energy,
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

/// One human-readable summary line per run.
pub fn summary_line(result: &RunResult) -> String {
    format!(
        "policy={} service_rate={:.6} total_utility={:.6} total_energy={:.6} energy_per_unit_utility={:.6}{}",
        result.policy,
        result.service_rate,
        result.total_utility,
        result.total_energy,
        result.energy_per_unit_utility,
        if result.zero_arrivals {
            " (no arrivals)"
        } else {
            ""
        },
    )
}
