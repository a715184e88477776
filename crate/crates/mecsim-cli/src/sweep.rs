//! Parameter sweeps over (policy, value, seed) cells.
//!
//! Cells are independent, so they run on a small thread pool; rows are
//! emitted in sorted (policy, value) order no matter which thread finished
//! first.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Result};

use mecsim::{sample_scenario, PolicySpec, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    TrafficMean,
    NumServers,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::TrafficMean => "traffic_mean",
            SweepParam::NumServers => "num_servers",
        }
    }
}

impl FromStr for SweepParam {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traffic_mean" => Ok(SweepParam::TrafficMean),
            "num_servers" => Ok(SweepParam::NumServers),
            other => bail!("unknown sweep parameter {other:?} (expected traffic_mean or num_servers)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicySpec>,
    pub base: ScenarioConfig,
}

impl SweepSpec {
    // The negated comparison rejects NaN values as well.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|&v| !(v > 0.0)) {
            bail!("sweep values must be positive");
        }
        if self.param == SweepParam::NumServers
            && self.values.iter().any(|&v| v.fract() != 0.0)
        {
            bail!("num_servers values must be integers");
        }
        Ok(())
    }

    fn config_for(&self, value: f64, seed: u64) -> ScenarioConfig {
        let mut config = self.base.clone();
        config.seed = seed;
        match self.param {
            SweepParam::TrafficMean => config.traffic_mean = value,
            SweepParam::NumServers => config.num_servers = value as u32,
        }
        config
    }
}

/// Aggregates over seeds for one (policy, value) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: String,
    pub param: &'static str,
    pub value: f64,
    pub seeds: usize,
    pub service_rate_mean: f64,
    pub service_rate_std: f64,
    pub utility_mean: f64,
    pub utility_std: f64,
    pub epu_mean: f64,
    pub epu_std: f64,
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    // One cell per (policy, value); each cell runs all its seeds.
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for p in 0..spec.policies.len() {
        for v in 0..spec.values.len() {
            cells.push((p, v));
        }
    }

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<SweepRow>> = Mutex::new(Vec::with_capacity(cells.len()));
    let failure: Mutex<Option<anyhow::Error>> = Mutex::new(None);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(cells.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (p, v) = cells[i];
                let policy = spec.policies[p];
                let value = spec.values[v];
                let cell = (|| -> Result<SweepRow> {
                    let mut service = Vec::with_capacity(spec.seeds.len());
                    let mut utility = Vec::with_capacity(spec.seeds.len());
                    let mut epu = Vec::with_capacity(spec.seeds.len());
                    for &seed in &spec.seeds {
                        let config = spec.config_for(value, seed);
                        let scenario = sample_scenario(&config)?;
                        let result = mecsim::run(&scenario, &policy)?;
                        service.push(result.service_rate);
                        utility.push(result.total_utility);
                        epu.push(result.energy_per_unit_utility);
                    }
                    let (sr_mean, sr_std) = mean_std(&service);
                    let (u_mean, u_std) = mean_std(&utility);
                    let (e_mean, e_std) = mean_std(&epu);
                    Ok(SweepRow {
                        policy: policy.name().to_string(),
                        param: spec.param.name(),
                        value,
                        seeds: spec.seeds.len(),
                        service_rate_mean: sr_mean,
                        service_rate_std: sr_std,
                        utility_mean: u_mean,
                        utility_std: u_std,
                        epu_mean: e_mean,
                        epu_std: e_std,
                    })
                })();
                match cell {
                    Ok(row) => rows.lock().unwrap().push(row),
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        break;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut rows = rows.into_inner().unwrap();
    rows.sort_by(|a, b| {
        a.policy
            .cmp(&b.policy)
            .then(a.value.partial_cmp(&b.value).unwrap())
    });
    Ok(rows)
}

pub const SWEEP_HEADER: &str = "policy,param,value,seeds,service_rate_mean,service_rate_std,utility_mean,utility_std,epu_mean,epu_std";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.policy,
            row.param,
            row.value,
            row.seeds,
            row.service_rate_mean,
            row.service_rate_std,
            row.utility_mean,
            row.utility_std,
            row.epu_mean,
            row.epu_std,
        )
        .expect("writing to a String cannot fail");
    }
    out
}
