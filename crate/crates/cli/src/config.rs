//! Flat `key = value` run configuration.

use std::collections::BTreeSet;
use std::str::FromStr;

use dsme_lora::sim::{ArrivalProcess, DestinationPolicy};
use dsme_lora::{CsmaParams, MacConfig, Micros, Mode, PhyConfig, Scenario};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid setting for {keys}: {reason}")]
    Inconsistent { keys: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
}

const REQUIRED: [&str; 3] = ["mode", "sensors", "tx_interval_mean_s"];

const SCENARIO_KEYS: [&str; 11] = [
    "mode",
    "sensors",
    "actuators",
    "tx_interval_mean_s",
    "payload_bytes",
    "duration_s",
    "warmup_s",
    "seed",
    "arrivals",
    "destination",
    "drift_ppm",
];
const MAC_KEYS: [&str; 6] = [
    "superframe_order",
    "multisuperframe_order",
    "beacon_order",
    "queue_capacity",
    "mac_overhead_bytes",
    "ack_turnaround_symbols",
];
const PHY_KEYS: [&str; 8] = [
    "spreading_factor",
    "bandwidth_hz",
    "coding_rate",
    "preamble_symbols",
    "explicit_header",
    "low_datarate_optimize",
    "channel_count",
    "cca_false_clear_prob",
];
const CSMA_KEYS: [&str; 5] = ["min_be", "max_be", "max_csma_backoffs", "max_frame_retries", "backoff_period_symbols"];
const OUTPUT_KEYS: [&str; 3] = ["trace_file", "summary_file", "cdf_file"];

pub fn is_known_key(key: &str) -> bool {
    [&SCENARIO_KEYS[..], &MAC_KEYS, &PHY_KEYS, &CSMA_KEYS, &OUTPUT_KEYS].iter().any(|g| g.contains(&key))
}

/// Splits config text into `(key, value)` pairs in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parses a `--set key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Syntax { line: 0, text: s.to_string() }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub mac: MacConfig,
    pub phy: PhyConfig,
    pub csma: CsmaParams,
    pub trace_file: String,
    pub summary_file: String,
    pub cdf_file: String,
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn seconds(key: &str, value: &str) -> Result<Micros, ConfigError> {
    let s: f64 = num(key, value)?;
    if !s.is_finite() || s < 0.0 {
        return Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: "expected a non-negative number of seconds".into(),
        });
    }
    Ok(Micros::from_secs_f64(s))
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    let v = value.to_ascii_lowercase();
    options.iter().find(|(name, _)| *name == v).map(|&(_, t)| t).ok_or_else(|| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: format!("expected one of {}", options.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")),
    })
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    choice(key, value, &[("true", true), ("false", false), ("1", true), ("0", false)])
}

impl RunConfig {
    /// Builds a configuration from pairs applied in order; later pairs win.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut seen = BTreeSet::new();
        let mut scenario = Scenario::new(Mode::Cap, 1, Micros::from_secs(1));
        let mut mac = MacConfig::default();
        let mut phy = PhyConfig::default();
        let mut csma = CsmaParams::default();
        let mut cfg_out = ("trace.csv".to_string(), "summary.json".to_string(), "ttc_cdf.csv".to_string());

        for (k, v) in pairs {
            let (k, v) = (k.as_str(), v.as_str());
            match k {
                "mode" => scenario.mode = choice(k, v, &[("cap", Mode::Cap), ("cfp", Mode::Cfp)])?,
                "sensors" => scenario.n_sensors = num(k, v)?,
                "actuators" => scenario.n_actuators = num(k, v)?,
                "tx_interval_mean_s" => scenario.tx_interval_mean = seconds(k, v)?,
                "payload_bytes" => scenario.payload_bytes = num(k, v)?,
                "duration_s" => scenario.duration = seconds(k, v)?,
                "warmup_s" => scenario.warmup = seconds(k, v)?,
                "seed" => scenario.seed = num(k, v)?,
                "arrivals" => {
                    scenario.arrivals = choice(
                        k,
                        v,
                        &[("exponential", ArrivalProcess::Exponential), ("periodic", ArrivalProcess::Periodic)],
                    )?
                }
                "destination" => {
                    scenario.destination = choice(
                        k,
                        v,
                        &[("fixed", DestinationPolicy::Fixed), ("round_robin", DestinationPolicy::RoundRobin)],
                    )?
                }
                "drift_ppm" => scenario.drift_ppm = num(k, v)?,
                "superframe_order" => mac.superframe_order = num(k, v)?,
                "multisuperframe_order" => mac.multisuperframe_order = num(k, v)?,
                "beacon_order" => mac.beacon_order = num(k, v)?,
                "queue_capacity" => mac.queue_capacity = num(k, v)?,
                "mac_overhead_bytes" => mac.mac_overhead_bytes = num(k, v)?,
                "ack_turnaround_symbols" => mac.ack_turnaround_symbols = num(k, v)?,
                "spreading_factor" => phy.spreading_factor = num(k, v)?,
                "bandwidth_hz" => phy.bandwidth_hz = num(k, v)?,
                "coding_rate" => phy.coding_rate = num(k, v)?,
                "preamble_symbols" => phy.preamble_symbols = num(k, v)?,
                "explicit_header" => phy.explicit_header = flag(k, v)?,
                "low_datarate_optimize" => phy.low_datarate_optimize = flag(k, v)?,
                "channel_count" => phy.channel_count = num(k, v)?,
                "cca_false_clear_prob" => phy.cca_false_clear_prob = num(k, v)?,
                "min_be" => csma.min_be = num(k, v)?,
                "max_be" => csma.max_be = num(k, v)?,
                "max_csma_backoffs" => csma.max_csma_backoffs = num(k, v)?,
                "max_frame_retries" => csma.max_frame_retries = num(k, v)?,
                "backoff_period_symbols" => csma.backoff_period_symbols = num(k, v)?,
                "trace_file" => cfg_out.0 = v.to_string(),
                "summary_file" => cfg_out.1 = v.to_string(),
                "cdf_file" => cfg_out.2 = v.to_string(),
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
            seen.insert(k.to_string());
        }
        if let Some(missing) = REQUIRED.iter().find(|k| !seen.contains(**k)) {
            return Err(ConfigError::MissingKey(missing));
        }

        let blame = |group: &[&str], reason: String| {
            let set: Vec<&str> = group.iter().copied().filter(|k| seen.contains(*k)).collect();
            let keys = if set.is_empty() { group.join(", ") } else { set.join(", ") };
            ConfigError::Inconsistent { keys, reason }
        };
        phy.validate().map_err(|e| blame(&PHY_KEYS, e.to_string()))?;
        mac.symbol_time = phy.symbol_time();
        mac.validate().map_err(|e| blame(&MAC_KEYS, e.to_string()))?;
        csma.validate().map_err(|e| blame(&CSMA_KEYS, e.to_string()))?;
        if mac.queue_capacity == 0 {
            return Err(blame(&["queue_capacity"], "must be at least 1".into()));
        }
        scenario.validate().map_err(|e| blame(&SCENARIO_KEYS, e.to_string()))?;
        if phy.time_on_air(scenario.payload_bytes + mac.mac_overhead_bytes).is_err() {
            return Err(ConfigError::InvalidValue {
                key: "payload_bytes".into(),
                value: scenario.payload_bytes.to_string(),
                reason: "frame exceeds 255 bytes".into(),
            });
        }

        let (trace_file, summary_file, cdf_file) = cfg_out;
        Ok(RunConfig { scenario, mac, phy, csma, trace_file, summary_file, cdf_file })
    }

    /// Reads `path` (if any) and applies `overrides` on top.
    pub fn load(path: Option<&std::path::Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut pairs = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::Read { path: p.display().to_string(), reason: e.to_string() })?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        pairs.extend_from_slice(overrides);
        Self::from_pairs(&pairs)
    }
}
