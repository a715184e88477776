//! Experiment harness: single simulation runs and parameter sweeps,
//! emitting CSV for plotting.

mod sweep;

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mecsim::{load_config, per_slot_csv, sample_scenario, summary_line, PolicySpec, ScenarioConfig};

#[derive(Parser)]
#[command(name = "mecsim", version, about = "Edge resource allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under one policy (or all) and write a per-slot CSV.
    Simulate {
        /// Scenario config file (key = value); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Policy name or "all".
        #[arg(long, default_value = "cgm")]
        policy: String,
        /// Scenario seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of slots; overrides the config file.
        #[arg(long)]
        slots: Option<u32>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep traffic_mean or num_servers over several seeds and policies,
    /// writing one aggregated CSV row per (policy, value).
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Parameter to sweep: traffic_mean or num_servers.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated policy names, or "all".
        #[arg(long, default_value = "all", value_delimiter = ',')]
        policies: Vec<String>,
        /// Number of seeds per cell.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// First seed; cells run seeds seed..seed+seeds.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        slots: Option<u32>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_base_config(path: &Option<PathBuf>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(ScenarioConfig::default()),
    }
}

fn resolve_policies(names: &[String]) -> Result<Vec<PolicySpec>> {
    if names.iter().any(|n| n == "all") {
        return Ok(PolicySpec::all());
    }
    names
        .iter()
        .map(|n| PolicySpec::from_name(n).map_err(Into::into))
        .collect()
}

fn cmd_simulate(
    config: Option<PathBuf>,
    policy: String,
    seed: Option<u64>,
    slots: Option<u32>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut base = load_base_config(&config)?;
    if let Some(seed) = seed {
        base.seed = seed;
    }
    if let Some(slots) = slots {
        base.num_slots = slots;
    }
    let specs = if policy == "all" {
        PolicySpec::all()
    } else {
        vec![PolicySpec::from_name(&policy)?]
    };
    // Sorted by name so the CSV layout is independent of invocation details.
    let mut specs = specs;
    specs.sort_by_key(|s| s.name());

    let scenario = sample_scenario(&base)?;
    let mut results = Vec::new();
    for spec in &specs {
        results.push(mecsim::run(&scenario, spec)?);
    }
    // The file lands before any summary hits a possibly-closed pipe.
    if let Some(out) = out {
        let refs: Vec<&mecsim::RunResult> = results.iter().collect();
        fs::write(&out, per_slot_csv(&refs))
            .with_context(|| format!("writing {}", out.display()))?;
    }
    for result in &results {
        println!("{}", summary_line(result));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: Option<PathBuf>,
    param: String,
    values: Vec<f64>,
    policies: Vec<String>,
    seeds: u64,
    seed_base: u64,
    slots: Option<u32>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut base = load_base_config(&config)?;
    if let Some(slots) = slots {
        base.num_slots = slots;
    }
    let param: sweep::SweepParam = param.parse()?;
    let specs = resolve_policies(&policies)?;
    if specs.is_empty() {
        bail!("no policies selected");
    }
    if values.is_empty() {
        bail!("no sweep values given");
    }
    if seeds == 0 {
        bail!("need at least one seed");
    }
    let spec = sweep::SweepSpec {
        param,
        values,
        seeds: (seed_base..seed_base + seeds).collect(),
        policies: specs,
        base,
    };
    spec.validate()?;
    let rows = sweep::run_sweep(&spec)?;
    let csv = sweep::sweep_csv(&rows);
    match out {
        Some(out) => {
            fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    // Die quietly when a downstream pipe closes, like other line tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            policy,
            seed,
            slots,
            out,
        } => cmd_simulate(config, policy, seed, slots, out),
        Command::Sweep {
            config,
            param,
            values,
            policies,
            seeds,
            seed,
            slots,
            out,
        } => cmd_sweep(config, param, values, policies, seeds, seed, slots, out),
    }
}
