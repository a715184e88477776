//! Capacity, energy-per-capacity ranking, and the energy ledger.
//!
//! Keep-on power accrues per slot for every powered-on server; usage power
//! is linear in utilization between a per-resource idle floor and full-load
//! ceiling, sampled once per slot.

use thiserror::Error;

use crate::model::{Coefficients, MesServer};

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("server {0} has zero capacity")]
    ZeroCapacity(usize),
    #[error("utilization {0} outside [0, 1]")]
    UtilizationOutOfRange(f64),
    #[error("server {server} already accrued energy for slot {slot}")]
    DoubleAccrual { server: usize, slot: u32 },
}

/// Weighted capacity: gamma1*c_total + gamma2*r_total + gamma3*h_total.
pub fn capacity(srv: &MesServer, coeffs: &Coefficients) -> f64 {
    coeffs.gamma1 * srv.c_total + coeffs.gamma2 * srv.r_total + coeffs.gamma3 * srv.h_total
}

/// Keep-on power per unit of weighted capacity. Servers are tried in
/// ascending order of this value.
pub fn energy_rank(srv: &MesServer, coeffs: &Coefficients) -> Result<f64, EnergyError> {
    let cap = capacity(srv, coeffs);
    if !(cap > 0.0) {
        return Err(EnergyError::ZeroCapacity(srv.id));
    }
    Ok(srv.keep_on_power / cap)
}

/// Per-slot usage power for the given utilization fractions, one value per
/// resource: min + (max - min) * utilization.
pub fn usage_power(
    srv: &MesServer,
    g_c: f64,
    g_r: f64,
    g_h: f64,
) -> Result<(f64, f64, f64), EnergyError> {
    for g in [g_c, g_r, g_h] {
        if !(0.0..=1.0).contains(&g) {
            return Err(EnergyError::UtilizationOutOfRange(g));
        }
    }
    let lerp = |band: crate::model::EnergyBand, g: f64| band.min + (band.max - band.min) * g;
    Ok((
        lerp(srv.usage_energy.cpu, g_c),
        lerp(srv.usage_energy.ram, g_r),
        lerp(srv.usage_energy.disk, g_h),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ServerEnergy {
    pub keep_on: f64,
    pub usage_cpu: f64,
    pub usage_ram: f64,
    pub usage_disk: f64,
    last_slot: Option<u32>,
}

impl ServerEnergy {
    pub fn total(&self) -> f64 {
        self.keep_on + self.usage_cpu + self.usage_ram + self.usage_disk
    }
}

/// Per-server energy accumulators plus the fleet total.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    per_server: Vec<ServerEnergy>,
}

impl EnergyLedger {
    pub fn new(num_servers: usize) -> Self {
        Self {
            per_server: vec![ServerEnergy::default(); num_servers],
        }
    }

    /// Charges one slot of keep-on power plus usage power at the given
    /// utilizations. Must be called at most once per server per slot.
    pub fn accrue_slot(
        &mut self,
        srv: &MesServer,
        utilizations: (f64, f64, f64),
        slot: u32,
    ) -> Result<f64, EnergyError> {
        let entry = &mut self.per_server[srv.id];
        if entry.last_slot == Some(slot) {
            return Err(EnergyError::DoubleAccrual {
                server: srv.id,
                slot,
            });
        }
        let (e_c, e_r, e_h) = usage_power(srv, utilizations.0, utilizations.1, utilizations.2)?;
        entry.keep_on += srv.keep_on_power;
        entry.usage_cpu += e_c;
        entry.usage_ram += e_r;
        entry.usage_disk += e_h;
        entry.last_slot = Some(slot);
        Ok(srv.keep_on_power + e_c + e_r + e_h)
    }

    pub fn server(&self, id: usize) -> &ServerEnergy {
        &self.per_server[id]
    }

    pub fn server_total(&self, id: usize) -> f64 {
        self.per_server[id].total()
    }

    /// Fleet-wide total: the sum of every server's total.
    pub fn fleet_total(&self) -> f64 {
        self.per_server.iter().map(|e| e.total()).sum()
    }
}
