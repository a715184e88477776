//! The per-slot simulation loop.
//!
//! Each slot runs, in this order: release expired VMs, serve the slot's
//! arrivals through the policy (placement, expansion, utility accrual),
//! charge energy to every powered-on server, then power down servers left
//! with no VMs. Metrics are recorded at the end of the slot, so
//! `active_servers` reflects the post-power-down state while the energy
//! charge covers the whole slot a server spent on.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::energy::{energy_rank, EnergyError, EnergyLedger};
use crate::model::{Coefficients, MesServer, PowerState, Scenario, VmAllocation};
use crate::policies::{self, PolicySpec};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Policy(#[from] crate::policies::PolicyError),
}

/// A live VM plus everything the policies need to reason about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Vm {
    pub request_id: u64,
    /// Placement order across the whole run; used for stable tie-breaks.
    pub seq: u64,
    pub server: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub alloc_c: f64,
    pub alloc_r: f64,
    pub alloc_h: f64,
    pub start_slot: u32,
    pub end_slot: u32,
    pub t: u32,
    /// Distance from the owning user to the host server.
    pub distance: f64,
}

impl Vm {
    pub fn allocation(&self) -> VmAllocation {
        VmAllocation {
            request_id: self.request_id,
            server_id: self.server,
            alloc_c: self.alloc_c,
            alloc_r: self.alloc_r,
            alloc_h: self.alloc_h,
            start_slot: self.start_slot,
            end_slot: self.end_slot,
        }
    }
}

/// Decision log entry, recorded when tracing is enabled.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Placed {
        slot: u32,
        request_id: u64,
        server: usize,
        alloc_c: f64,
        alloc_r: f64,
    },
    Denied {
        slot: u32,
        request_id: u64,
    },
    Expanded {
        slot: u32,
        request_id: u64,
        alloc_c: f64,
        alloc_r: f64,
    },
}

/// All mutable state owned by one policy run.
#[derive(Debug, Clone)]
pub struct RunState {
    pub servers: Vec<MesServer>,
    pub coeffs: Coefficients,
    /// Energy per unit capacity, indexed by server id.
    pub energy_ranks: Vec<f64>,
    /// Server ids in ascending energy-rank order, ties by id.
    pub server_order: Vec<usize>,
    pub vms: Vec<Vm>,
    pub ledger: EnergyLedger,
    pub trace: Option<Vec<TraceEvent>>,
    seq_counter: u64,
}

impl RunState {
    pub fn new(servers: Vec<MesServer>, coeffs: Coefficients) -> Result<Self, SimError> {
        let energy_ranks = servers
            .iter()
            .map(|s| energy_rank(s, &coeffs))
            .collect::<Result<Vec<_>, _>>()?;
        let mut server_order: Vec<usize> = (0..servers.len()).collect();
        server_order.sort_by(|&a, &b| {
            energy_ranks[a]
                .partial_cmp(&energy_ranks[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        let ledger = EnergyLedger::new(servers.len());
        Ok(Self {
            servers,
            coeffs,
            energy_ranks,
            server_order,
            vms: Vec::new(),
            ledger,
            trace: None,
            seq_counter: 0,
        })
    }

    pub(crate) fn next_seq(&mut self) -> u64 {
        self.seq_counter += 1;
        self.seq_counter
    }

    pub(crate) fn push_trace(&mut self, event: TraceEvent) {
        if let Some(trace) = &mut self.trace {
            trace.push(event);
        }
    }

    pub fn vms_on(&self, server: usize) -> usize {
        self.vms.iter().filter(|vm| vm.server == server).count()
    }
}

/// Removes every VM whose last slot has passed and returns its allocation
/// to the host server.
pub fn release_expired(state: &mut RunState, slot: u32) {
    let servers = &mut state.servers;
    state.vms.retain(|vm| {
        if vm.end_slot < slot {
            let srv = &mut servers[vm.server];
            srv.c_av += vm.alloc_c;
            srv.r_av += vm.alloc_r;
            srv.h_av += vm.alloc_h;
            false
        } else {
            true
        }
    });
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: u32,
    pub arrivals: u32,
    pub served: u32,
    pub denied: u32,
    /// Servers still powered on at the end of the slot.
    pub active_servers: u32,
    pub slot_utility: f64,
    pub slot_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub policy: String,
    pub seed: u64,
    pub per_slot: Vec<SlotRecord>,
    pub total_served: u64,
    pub total_denied: u64,
    pub total_utility: f64,
    pub total_energy: f64,
    /// served / (served + denied); reported as 1.0 when nothing arrived.
    pub service_rate: f64,
    pub energy_per_unit_utility: f64,
    /// Set when the run saw no arrivals at all, making service_rate vacuous.
    pub zero_arrivals: bool,
}

/// A stepping simulation, one slot at a time. Useful for inspecting state
/// mid-run; [`run`] drives it to completion.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    spec: PolicySpec,
    pub state: RunState,
    next_slot: u32,
    records: Vec<SlotRecord>,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario, spec: PolicySpec) -> Result<Self, SimError> {
        spec.validate()?;
        let state = RunState::new(scenario.servers.clone(), scenario.coeffs)?;
        Ok(Self {
            scenario,
            spec,
            state,
            next_slot: 1,
            records: Vec::with_capacity(scenario.num_slots() as usize),
        })
    }

    /// Starts recording placement, denial, and expansion events.
    pub fn enable_trace(&mut self) {
        self.state.trace = Some(Vec::new());
    }

    pub fn current_slot(&self) -> u32 {
        self.next_slot
    }

    pub fn is_done(&self) -> bool {
        self.next_slot > self.scenario.num_slots()
    }

    /// Advances one slot; None once the scenario is exhausted.
    pub fn step(&mut self) -> Option<&SlotRecord> {
        if self.is_done() {
            return None;
        }
        let slot = self.next_slot;
        self.next_slot += 1;

        release_expired(&mut self.state, slot);

        let arrivals = &self.scenario.arrivals[(slot - 1) as usize];
        let outcome = policies::run_slot(&mut self.state, &self.spec, arrivals, slot);

        let mut slot_energy = 0.0;
        {
            let RunState {
                servers, ledger, ..
            } = &mut self.state;
            for srv in servers.iter_mut() {
                if srv.is_on() {
                    let g = srv.utilization();
                    slot_energy += ledger
                        .accrue_slot(srv, g, slot)
                        .expect("each server accrues once per slot");
                    srv.active_slots += 1;
                }
            }
        }

        let mut hosted = vec![false; self.state.servers.len()];
        for vm in &self.state.vms {
            hosted[vm.server] = true;
        }
        for srv in self.state.servers.iter_mut() {
            if srv.is_on() && !hosted[srv.id] {
                srv.power_state = PowerState::Idle;
            }
        }

        let active_servers = self.state.servers.iter().filter(|s| s.is_on()).count() as u32;
        self.records.push(SlotRecord {
            slot,
            arrivals: arrivals.len() as u32,
            served: outcome.served.len() as u32,
            denied: outcome.denied.len() as u32,
            active_servers,
            slot_utility: outcome.utility_delta,
            slot_energy,
        });
        self.records.last()
    }

    /// Runs any remaining slots and produces the final result.
    pub fn finish(mut self) -> RunResult {
        while self.step().is_some() {}
        let total_served: u64 = self.records.iter().map(|r| r.served as u64).sum();
        let total_denied: u64 = self.records.iter().map(|r| r.denied as u64).sum();
        let total_utility: f64 = self.records.iter().map(|r| r.slot_utility).sum();
        let total_energy: f64 = self.records.iter().map(|r| r.slot_energy).sum();
        let zero_arrivals = total_served + total_denied == 0;
        let service_rate = if zero_arrivals {
            1.0
        } else {
            total_served as f64 / (total_served + total_denied) as f64
        };
        let energy_per_unit_utility = if total_utility > 0.0 {
            total_energy / total_utility
        } else if total_energy > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        RunResult {
            policy: self.spec.name().to_string(),
            seed: self.scenario.seed,
            per_slot: self.records,
            total_served,
            total_denied,
            total_utility,
            total_energy,
            service_rate,
            energy_per_unit_utility,
            zero_arrivals,
        }
    }

    /// The recorded trace, if tracing was enabled.
    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.state.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Option<Vec<TraceEvent>> {
        self.state.trace.take()
    }
}

/// Runs one policy over a scenario.
pub fn run(scenario: &Scenario, spec: &PolicySpec) -> Result<RunResult, SimError> {
    Ok(Simulation::new(scenario, *spec)?.finish())
}

/// Runs each policy on its own copy of the same scenario.
pub fn compare(
    scenario: &Scenario,
    specs: &[PolicySpec],
) -> Result<BTreeMap<String, RunResult>, SimError> {
    let mut results = BTreeMap::new();
    for spec in specs {
        results.insert(spec.name().to_string(), run(scenario, spec)?);
    }
    Ok(results)
}
