//! Flat key=value scenario configuration files.
//!
//! Keys mirror the [`ScenarioConfig`] field names. Missing keys fall back
//! to the defaults; unknown keys are an error. Lines starting with `#` and
//! blank lines are ignored.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{GammaMode, ModelError, ScenarioConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected key = value, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut config = ScenarioConfig::default();
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line: line_no,
            text: raw.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(ConfigError::DuplicateKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        seen.push(key.to_string());
        apply_key(&mut config, key, value, line_no)?;
    }

    config.validate()?;
    Ok(config)
}

/// Sets a single configuration field by its config-file key.
pub fn set_key(config: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    apply_key(config, key, value, 0)
}

fn apply_key(
    config: &mut ScenarioConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigError> {
    let bad = |reason: String| ConfigError::BadValue {
        line,
        key: key.to_string(),
        reason,
    };
    macro_rules! parse {
        ($ty:ty) => {
            value.parse::<$ty>().map_err(|e| bad(e.to_string()))?
        };
    }
    match key {
        "num_servers" => config.num_servers = parse!(u32),
        "num_slots" => config.num_slots = parse!(u32),
        "traffic_mean" => config.traffic_mean = parse!(f64),
        "seed" => config.seed = parse!(u64),
        "server_cpu_mean" => config.server_cpu_mean = parse!(f64),
        "server_cpu_std" => config.server_cpu_std = parse!(f64),
        "server_ram_mean" => config.server_ram_mean = parse!(f64),
        "server_ram_std" => config.server_ram_std = parse!(f64),
        "server_disk_mean" => config.server_disk_mean = parse!(f64),
        "server_disk_std" => config.server_disk_std = parse!(f64),
        "server_floor_frac" => config.server_floor_frac = parse!(f64),
        "req_cpu_max_lo" => config.req_cpu_max_lo = parse!(f64),
        "req_cpu_max_hi" => config.req_cpu_max_hi = parse!(f64),
        "req_cpu_min_frac_lo" => config.req_cpu_min_frac_lo = parse!(f64),
        "req_cpu_min_frac_hi" => config.req_cpu_min_frac_hi = parse!(f64),
        "req_ram_max_lo" => config.req_ram_max_lo = parse!(f64),
        "req_ram_max_hi" => config.req_ram_max_hi = parse!(f64),
        "req_ram_min_frac_lo" => config.req_ram_min_frac_lo = parse!(f64),
        "req_ram_min_frac_hi" => config.req_ram_min_frac_hi = parse!(f64),
        "req_disk_lo" => config.req_disk_lo = parse!(f64),
        "req_disk_hi" => config.req_disk_hi = parse!(f64),
        "req_time_max" => config.req_time_max = parse!(u32),
        "distance_min" => config.distance_min = parse!(f64),
        "distance_max" => config.distance_max = parse!(f64),
        "coverage_range" => config.coverage_range = parse!(f64),
        "gamma_mode" => {
            config.gamma_mode = match value {
                "direct" => GammaMode::Direct,
                "derived" => GammaMode::Derived,
                other => return Err(bad(format!("expected direct or derived, got {other:?}"))),
            }
        }
        "gamma1" => config.gamma1 = parse!(f64),
        "gamma2" => config.gamma2 = parse!(f64),
        "gamma3" => config.gamma3 = parse!(f64),
        "gamma4" => config.gamma4 = parse!(f64),
        "gamma5" => {
            config.gamma5 = if value == "auto" {
                None
            } else {
                Some(parse!(f64))
            }
        }
        "w1" => config.w1 = parse!(f64),
        "w2" => config.w2 = parse!(f64),
        "w3" => config.w3 = parse!(f64),
        "w5" => config.w5 = parse!(f64),
        "keep_on_coeff" => config.keep_on_coeff = parse!(f64),
        "keep_on_jitter_lo" => config.keep_on_jitter_lo = parse!(f64),
        "keep_on_jitter_hi" => config.keep_on_jitter_hi = parse!(f64),
        "usage_cpu_max_frac" => config.usage_cpu_max_frac = parse!(f64),
        "usage_ram_max_frac" => config.usage_ram_max_frac = parse!(f64),
        "usage_disk_max_frac" => config.usage_disk_max_frac = parse!(f64),
        "usage_min_frac" => config.usage_min_frac = parse!(f64),
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}
