//! Test-only machinery shared by the integration suites:
//!
//! - straight-line re-implementations of the four published allocation
//!   listings (and their CPU-only baseline forms), written as literal
//!   nested loops with inline arithmetic and no shared placement code, so
//!   they can cross-check the production policies' decision traces;
//! - a brute-force oracle for tiny one-slot instances that bounds any
//!   policy's achievable slot utility;
//! - random generators for tiny and small scenarios.
//!
//! The references follow the same published-text resolutions as the
//! production code (coverage range gates admission, expand families admit
//! and allocate minima, a failed idle-activation gate or a failed
//! CPU-only creation ends the request's search) but share none of its
//! placement implementation.

// Each integration test binary compiles this module; none uses all of it.
#![allow(dead_code)]
// The references are deliberately written as literal indexed loops with
// the same comparison shapes as the published listings.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mecsim::{Coefficients, MesServer, Scenario, TraceEvent, UERequest};
use mecsim::model::{EnergyBand, UsageEnergyParams};

pub const FAMILIES: [&str; 8] = [
    "cbo",
    "cgm",
    "cminexpand",
    "cpowexpand",
    "bo",
    "gm",
    "minexpand",
    "powexpand",
];

struct RefVm {
    request_id: u64,
    server: usize,
    alloc_c: f64,
    alloc_r: f64,
    alloc_h: f64,
    c_max: f64,
    r_max: f64,
    t: u32,
    distance: f64,
    end_slot: u32,
}

fn is_comprehensive(name: &str) -> bool {
    matches!(name, "cbo" | "cgm" | "cminexpand" | "cpowexpand")
}

fn is_greedy(name: &str) -> bool {
    matches!(name, "cgm" | "gm")
}

fn is_expand(name: &str) -> bool {
    matches!(name, "cminexpand" | "cpowexpand" | "minexpand" | "powexpand")
}

fn is_pow(name: &str) -> bool {
    matches!(name, "cpowexpand" | "powexpand")
}

/// Literal transcription of the published listings, one slot loop with the
/// admission test, activation gate, creation, expansion, and power-down
/// steps written out in place.
pub fn reference_run(scenario: &Scenario, name: &str) -> Vec<TraceEvent> {
    let comp = is_comprehensive(name);
    let coeffs = scenario.coeffs;

    // Line 1: sort all servers into increasing order of E_k / capacity.
    let mut servers: Vec<MesServer> = scenario.servers.clone();
    let mut order: Vec<usize> = (0..servers.len()).collect();
    let p: Vec<f64> = servers
        .iter()
        .map(|s| {
            s.keep_on_power
                / (coeffs.gamma1 * s.c_total + coeffs.gamma2 * s.r_total + coeffs.gamma3 * s.h_total)
        })
        .collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)));

    let mut on = vec![false; servers.len()];
    let mut vms: Vec<RefVm> = Vec::new();
    let mut events = Vec::new();

    for slot in 1..=scenario.num_slots() {
        // Elapsed VMs are deleted and the usage adjusted.
        let mut kept = Vec::new();
        for vm in vms.drain(..) {
            if vm.end_slot < slot {
                servers[vm.server].c_av += vm.alloc_c;
                servers[vm.server].r_av += vm.alloc_r;
                servers[vm.server].h_av += vm.alloc_h;
            } else {
                kept.push(vm);
            }
        }
        vms = kept;

        let arrivals = &scenario.arrivals[(slot - 1) as usize];
        let mut serve: Vec<usize> = (0..arrivals.len()).collect();
        if is_greedy(name) {
            // Sort incoming UEs into decreasing order of requested resources.
            let score: Vec<f64> = arrivals
                .iter()
                .map(|r| {
                    let linear = if comp {
                        coeffs.gamma1 * r.c_max + coeffs.gamma2 * r.r_max + coeffs.gamma3 * r.h
                    } else {
                        coeffs.gamma1 * r.c_max
                    };
                    linear * coeffs.gamma4 * r.t as f64
                })
                .collect();
            serve.sort_by(|&a, &b| score[b].partial_cmp(&score[a]).unwrap());
        }

        'ue: for &idx in &serve {
            let req = &arrivals[idx];
            for &k in &order {
                let d = req.distances[k];
                let srv = &servers[k];
                let (want_c, want_r) = if is_expand(name) {
                    (req.c_min, req.r_min)
                } else {
                    (req.c_max, req.r_max)
                };
                let admit = if comp {
                    want_c < 0.9 * srv.c_av
                        && want_r < 0.9 * srv.r_av
                        && req.h < 0.9 * srv.h_av
                        && d <= srv.coverage_range
                } else {
                    want_c < 0.9 * srv.c_av && d <= srv.coverage_range
                };
                if !admit {
                    continue;
                }
                if is_pow(name) && !on[k] {
                    let linear = if comp {
                        coeffs.gamma1 * req.c_min
                            + coeffs.gamma2 * req.r_min
                            + coeffs.gamma3 * req.h
                    } else {
                        coeffs.gamma1 * req.c_min
                    };
                    let u_min = linear * coeffs.gamma4 * req.t as f64 / d;
                    if u_min - coeffs.gamma5 * p[k] <= 0.0 {
                        events.push(TraceEvent::Denied {
                            slot,
                            request_id: req.id,
                        });
                        continue 'ue;
                    }
                }
                on[k] = true;
                let alloc_r = if comp { want_r } else { req.r_min };
                if !comp && (req.r_min > servers[k].r_av || req.h > servers[k].h_av) {
                    events.push(TraceEvent::Denied {
                        slot,
                        request_id: req.id,
                    });
                    continue 'ue;
                }
                servers[k].c_av -= want_c;
                servers[k].r_av -= alloc_r;
                servers[k].h_av -= req.h;
                vms.push(RefVm {
                    request_id: req.id,
                    server: k,
                    alloc_c: want_c,
                    alloc_r,
                    alloc_h: req.h,
                    c_max: req.c_max,
                    r_max: req.r_max,
                    t: req.t,
                    distance: d,
                    end_slot: slot + req.t - 1,
                });
                events.push(TraceEvent::Placed {
                    slot,
                    request_id: req.id,
                    server: k,
                    alloc_c: want_c,
                    alloc_r,
                });
                continue 'ue;
            }
            events.push(TraceEvent::Denied {
                slot,
                request_id: req.id,
            });
        }

        if is_expand(name) {
            for &k in &order {
                let floor_c = 0.1 * servers[k].c_total;
                let floor_r = 0.1 * servers[k].r_total;
                if !(servers[k].c_av > floor_c) {
                    continue;
                }
                // Sort this server's VMs into decreasing order of maximum
                // achievable utility, then expand each toward its maximum.
                let mut mine: Vec<usize> =
                    (0..vms.len()).filter(|&i| vms[i].server == k).collect();
                let key = |vm: &RefVm| {
                    let linear = if comp {
                        coeffs.gamma1 * vm.c_max
                            + coeffs.gamma2 * vm.r_max
                            + coeffs.gamma3 * vm.alloc_h
                    } else {
                        coeffs.gamma1 * vm.c_max
                    };
                    linear * coeffs.gamma4 * vm.t as f64 / vm.distance
                };
                mine.sort_by(|&a, &b| key(&vms[b]).partial_cmp(&key(&vms[a])).unwrap());
                for i in mine {
                    let grow_c = (vms[i].c_max - vms[i].alloc_c)
                        .min(servers[k].c_av - floor_c)
                        .max(0.0);
                    let grow_r = if comp {
                        (vms[i].r_max - vms[i].alloc_r)
                            .min(servers[k].r_av - floor_r)
                            .max(0.0)
                    } else {
                        0.0
                    };
                    if grow_c == 0.0 && grow_r == 0.0 {
                        continue;
                    }
                    vms[i].alloc_c += grow_c;
                    vms[i].alloc_r += grow_r;
                    servers[k].c_av -= grow_c;
                    servers[k].r_av -= grow_r;
                    events.push(TraceEvent::Expanded {
                        slot,
                        request_id: vms[i].request_id,
                        alloc_c: vms[i].alloc_c,
                        alloc_r: vms[i].alloc_r,
                    });
                }
            }
        }

        // Bring servers with zero usage to power save mode.
        for k in 0..servers.len() {
            if on[k] && !vms.iter().any(|vm| vm.server == k) {
                on[k] = false;
            }
        }
    }
    events
}

/// Upper bounds on the utility any allocation can earn in one slot of a
/// tiny instance, by exhaustive search over request-to-server assignments.
pub struct OracleBounds {
    /// Allocations restricted to each request's minima/maxima per resource.
    pub discrete: f64,
    /// Allocations anywhere in the request box, filled optimally.
    pub continuous: f64,
}

pub fn oracle_bounds(scenario: &Scenario) -> OracleBounds {
    let servers = &scenario.servers;
    let requests: Vec<&UERequest> = scenario.arrivals[0].iter().collect();
    let coeffs = scenario.coeffs;
    let n = servers.len();
    let m = requests.len();
    assert!(n <= 3 && m <= 5, "oracle is for tiny instances only");

    let rate = |c: f64, r: f64, h: f64, d: f64| {
        (coeffs.gamma1 * c + coeffs.gamma2 * r + coeffs.gamma3 * h) * coeffs.gamma4 / d
    };

    let mut discrete = 0.0f64;
    let mut continuous = 0.0f64;

    // Assignment: per request, a server index or n for "not served",
    // encoded as a base-(n+1) counter.
    let total_assignments = (n + 1).pow(m as u32);
    let mut assign = vec![0usize; m];
    for code in 0..total_assignments {
        let mut rem = code;
        for slot in assign.iter_mut() {
            *slot = rem % (n + 1);
            rem /= n + 1;
        }
        let in_range = (0..m).all(|j| {
            assign[j] == n
                || requests[j].distances[assign[j]] <= servers[assign[j]].coverage_range
        });
        if !in_range {
            continue;
        }
        // Feasibility at minima, shared by both bounds.
        let mut used = [[0.0f64; 3]; 3];
        for j in 0..m {
            if assign[j] < n {
                used[assign[j]][0] += requests[j].c_min;
                used[assign[j]][1] += requests[j].r_min;
                used[assign[j]][2] += requests[j].h;
            }
        }
        let feasible = (0..n).all(|k| {
            used[k][0] <= servers[k].c_av
                && used[k][1] <= servers[k].r_av
                && used[k][2] <= servers[k].h_av
        });
        if !feasible {
            continue;
        }
        continuous = continuous.max(continuous_value(&assign, &requests, servers, &rate));
        discrete = discrete.max(discrete_value(&assign, &requests, servers, &rate));
    }
    OracleBounds {
        discrete,
        continuous,
    }
}

/// Optimal utility for a fixed assignment with allocations free inside the
/// request boxes: minima first, then each server's slack is poured into
/// its nearest requests (the per-unit value of a resource is 1/d up to a
/// shared constant).
fn continuous_value(
    assign: &[usize],
    requests: &[&UERequest],
    servers: &[MesServer],
    rate: &impl Fn(f64, f64, f64, f64) -> f64,
) -> f64 {
    let n = servers.len();
    let m = requests.len();
    let mut total = 0.0;
    for k in 0..n {
        let mut mine: Vec<usize> = (0..m).filter(|&j| assign[j] == k).collect();
        if mine.is_empty() {
            continue;
        }
        mine.sort_by(|&a, &b| {
            requests[a].distances[k]
                .partial_cmp(&requests[b].distances[k])
                .unwrap()
        });
        let mut alloc: Vec<(f64, f64)> = mine
            .iter()
            .map(|&j| (requests[j].c_min, requests[j].r_min))
            .collect();
        let mut c_slack = servers[k].c_av - alloc.iter().map(|a| a.0).sum::<f64>();
        let mut r_slack = servers[k].r_av - alloc.iter().map(|a| a.1).sum::<f64>();
        for (pos, &j) in mine.iter().enumerate() {
            let grow_c = (requests[j].c_max - alloc[pos].0).min(c_slack).max(0.0);
            alloc[pos].0 += grow_c;
            c_slack -= grow_c;
            let grow_r = (requests[j].r_max - alloc[pos].1).min(r_slack).max(0.0);
            alloc[pos].1 += grow_r;
            r_slack -= grow_r;
        }
        for (pos, &j) in mine.iter().enumerate() {
            total += rate(
                alloc[pos].0,
                alloc[pos].1,
                requests[j].h,
                requests[j].distances[k],
            );
        }
    }
    total
}

/// Best utility for a fixed assignment with each request's CPU and RAM
/// independently pinned to its minimum or maximum.
fn discrete_value(
    assign: &[usize],
    requests: &[&UERequest],
    servers: &[MesServer],
    rate: &impl Fn(f64, f64, f64, f64) -> f64,
) -> f64 {
    let n = servers.len();
    let m = requests.len();
    let mut best = 0.0f64;
    // Two bits per request: CPU at max, RAM at max.
    let combos = 1usize << (2 * m);
    for mask in 0..combos {
        let mut used = [[0.0f64; 3]; 3];
        let mut value = 0.0;
        for j in 0..m {
            let k = assign[j];
            if k == n {
                continue;
            }
            let c = if mask & (1 << (2 * j)) != 0 {
                requests[j].c_max
            } else {
                requests[j].c_min
            };
            let r = if mask & (1 << (2 * j + 1)) != 0 {
                requests[j].r_max
            } else {
                requests[j].r_min
            };
            used[k][0] += c;
            used[k][1] += r;
            used[k][2] += requests[j].h;
            value += rate(c, r, requests[j].h, requests[j].distances[k]);
        }
        let ok = (0..n).all(|k| {
            used[k][0] <= servers[k].c_av
                && used[k][1] <= servers[k].r_av
                && used[k][2] <= servers[k].h_av
        });
        if ok {
            best = best.max(value);
        }
    }
    best
}

fn quiet_usage() -> UsageEnergyParams {
    UsageEnergyParams {
        cpu: EnergyBand { min: 0.0, max: 0.0 },
        ram: EnergyBand { min: 0.0, max: 0.0 },
        disk: EnergyBand { min: 0.0, max: 0.0 },
    }
}

/// A random one-slot instance with at most 3 servers and 5 requests, sized
/// so that contention, denial, and partial expansion all occur.
pub fn tiny_instance(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=5);
    let servers: Vec<MesServer> = (0..n)
        .map(|id| {
            MesServer::new(
                id,
                rng.gen_range(3.0..=10.0),
                rng.gen_range(2.0..=8.0),
                rng.gen_range(3.0..=12.0),
                rng.gen_range(2.0..=20.0),
                quiet_usage(),
                800.0,
            )
        })
        .collect();
    let requests: Vec<UERequest> = (0..m)
        .map(|j| {
            let c_max = rng.gen_range(0.5..=4.0);
            let r_max = rng.gen_range(0.5..=3.0);
            UERequest {
                id: j as u64 + 1,
                c_min: c_max * rng.gen_range(0.3..=1.0),
                c_max,
                r_min: r_max * rng.gen_range(0.3..=1.0),
                r_max,
                h: rng.gen_range(0.5..=5.0),
                t: rng.gen_range(1..=5),
                arrival_slot: 1,
                distances: (0..n).map(|_| rng.gen_range(1.0..=1000.0)).collect(),
            }
        })
        .collect();
    let gamma5 = rng.gen_range(0.0005..=0.05);
    Scenario {
        servers,
        arrivals: vec![requests],
        coeffs: Coefficients::new(0.4, 0.25, 0.25, 0.1, gamma5),
        seed,
        t_max: 5,
        d_max: 1000.0,
    }
}

/// A random multi-slot scenario small enough for exhaustive cross-checks.
pub fn small_scenario(seed: u64) -> Scenario {
    let mut config = mecsim::ScenarioConfig {
        seed,
        num_slots: 30,
        num_servers: 5,
        traffic_mean: 3.0,
        ..Default::default()
    };
    // Vary the regime a little from seed to seed.
    config.traffic_mean = 1.0 + (seed % 5) as f64;
    mecsim::sample_scenario(&config).unwrap()
}
