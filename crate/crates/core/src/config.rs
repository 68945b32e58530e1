//! Flat `key = value` run-configuration files for the CLI.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fuzzy::ClassifyThresholds;
use crate::sim::{AdmissionMode, Scheme, SimConfig};
use crate::tiered::{TtlConfig, SECONDS_PER_DAY};
use crate::topology::LaId;
use crate::trace::{CommuterParams, DEFAULT_LCG_INC, DEFAULT_LCG_MUL};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {got:?}")]
    Malformed { line: usize, got: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("key {key}: {what}")]
    BadValue { key: String, what: String },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("config must set exactly one of `trace` or the `gen_*` generator keys")]
    TraceSourceConflict,
    #[error("window_days must be at least 1")]
    WindowTooSmall,
}

/// Where the event stream comes from: a trace file on disk or the
/// built-in commuter generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceSource {
    File(String),
    Generated(CommuterParams),
}

/// A fully parsed run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub topology: String,
    pub source: TraceSource,
    pub scheme: Scheme,
    pub sim: SimConfig,
    pub seed: u64,
    pub out: Option<String>,
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        what: format!("expected a non-negative integer, got {value:?}"),
    })
}

fn parse_u32(key: &str, value: &str) -> Result<u32, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        what: format!("expected a non-negative integer, got {value:?}"),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            what: format!("expected true/false, got {value:?}"),
        }),
    }
}

/// Parses `HH:MM` into seconds after midnight.
pub fn parse_time_of_day(key: &str, value: &str) -> Result<u64, ConfigError> {
    let bad = || ConfigError::BadValue {
        key: key.to_string(),
        what: format!("expected HH:MM, got {value:?}"),
    };
    let (h, m) = value.split_once(':').ok_or_else(bad)?;
    let h: u64 = h.parse().map_err(|_| bad())?;
    let m: u64 = m.parse().map_err(|_| bad())?;
    if h >= 24 || m >= 60 {
        return Err(bad());
    }
    Ok(h * 3600 + m * 60)
}

pub fn parse_scheme(value: &str) -> Result<Scheme, ConfigError> {
    match value {
        "baseline" => Ok(Scheme::Baseline),
        "intelligent" => Ok(Scheme::Intelligent),
        _ => Err(ConfigError::BadValue {
            key: "scheme".to_string(),
            what: format!("expected baseline or intelligent, got {value:?}"),
        }),
    }
}

fn parse_admission(value: &str) -> Result<AdmissionMode, ConfigError> {
    match value {
        "common_ms_gated" => Ok(AdmissionMode::CommonMsGated),
        "cache_all" => Ok(AdmissionMode::CacheAll),
        _ => Err(ConfigError::BadValue {
            key: "admission".to_string(),
            what: format!("expected common_ms_gated or cache_all, got {value:?}"),
        }),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "topology",
    "trace",
    "scheme",
    "seed",
    "out",
    "ttl_low_days",
    "ttl_medium_days",
    "ttl_high_days",
    "window_days",
    "admission",
    "refresh_billing",
    "classify_low_max",
    "classify_medium_max",
    "gen_home_la",
    "gen_work_la",
    "gen_transit_las",
    "gen_leave",
    "gen_return",
    "gen_dwell_secs",
    "gen_travel_secs",
    "gen_days",
    "gen_population",
    "gen_jitter_secs",
    "lcg_mul",
    "lcg_inc",
];

pub fn parse_run_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line,
            got: trimmed.to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        if kv.insert(key.clone(), value).is_some() {
            return Err(ConfigError::DuplicateKey { line, key });
        }
    }

    let topology = kv
        .remove("topology")
        .ok_or(ConfigError::MissingKey("topology"))?;

    let has_gen = kv.keys().any(|k| k.starts_with("gen_"));
    let trace = kv.remove("trace");
    let source = match (trace, has_gen) {
        (Some(path), false) => TraceSource::File(path),
        (None, true) => {
            let home = kv
                .remove("gen_home_la")
                .ok_or(ConfigError::MissingKey("gen_home_la"))?;
            let work = kv
                .remove("gen_work_la")
                .ok_or(ConfigError::MissingKey("gen_work_la"))?;
            let transit = kv
                .remove("gen_transit_las")
                .ok_or(ConfigError::MissingKey("gen_transit_las"))?;
            let transit_las = transit
                .split(',')
                .map(|s| LaId::new(s.trim()))
                .collect::<Vec<_>>();
            let mut params =
                CommuterParams::new(LaId::new(home), LaId::new(work), transit_las);
            if let Some(v) = kv.remove("gen_leave") {
                params.leave_time = parse_time_of_day("gen_leave", &v)?;
            }
            if let Some(v) = kv.remove("gen_return") {
                params.return_time = parse_time_of_day("gen_return", &v)?;
            }
            if let Some(v) = kv.remove("gen_dwell_secs") {
                params.transit_dwell = parse_u64("gen_dwell_secs", &v)?;
            }
            if let Some(v) = kv.remove("gen_travel_secs") {
                params.travel = parse_u64("gen_travel_secs", &v)?;
            }
            if let Some(v) = kv.remove("gen_days") {
                params.days = parse_u64("gen_days", &v)?;
            }
            if let Some(v) = kv.remove("gen_population") {
                params.population = parse_u32("gen_population", &v)?;
            }
            if let Some(v) = kv.remove("gen_jitter_secs") {
                params.jitter = parse_u64("gen_jitter_secs", &v)?;
            }
            params.lcg_mul = match kv.remove("lcg_mul") {
                Some(v) => parse_u64("lcg_mul", &v)?,
                None => DEFAULT_LCG_MUL,
            };
            params.lcg_inc = match kv.remove("lcg_inc") {
                Some(v) => parse_u64("lcg_inc", &v)?,
                None => DEFAULT_LCG_INC,
            };
            TraceSource::Generated(params)
        }
        _ => return Err(ConfigError::TraceSourceConflict),
    };

    let scheme = match kv.remove("scheme") {
        Some(v) => parse_scheme(&v)?,
        None => Scheme::Baseline,
    };
    let seed = match kv.remove("seed") {
        Some(v) => parse_u64("seed", &v)?,
        None => 0,
    };
    let out = kv.remove("out");

    let mut sim = SimConfig::default();
    let mut ttl = TtlConfig::default();
    if let Some(v) = kv.remove("ttl_low_days") {
        ttl.low = parse_u64("ttl_low_days", &v)? * SECONDS_PER_DAY;
    }
    if let Some(v) = kv.remove("ttl_medium_days") {
        ttl.medium = parse_u64("ttl_medium_days", &v)? * SECONDS_PER_DAY;
    }
    if let Some(v) = kv.remove("ttl_high_days") {
        ttl.high = parse_u64("ttl_high_days", &v)? * SECONDS_PER_DAY;
    }
    sim.ttl = ttl;
    if let Some(v) = kv.remove("window_days") {
        sim.window_days = parse_u64("window_days", &v)?;
        if sim.window_days == 0 {
            return Err(ConfigError::WindowTooSmall);
        }
    }
    if let Some(v) = kv.remove("admission") {
        sim.admission = parse_admission(&v)?;
    }
    if let Some(v) = kv.remove("refresh_billing") {
        sim.refresh_billing = parse_bool("refresh_billing", &v)?;
    }
    let mut thresholds = ClassifyThresholds::default();
    if let Some(v) = kv.remove("classify_low_max") {
        thresholds.low_max = parse_u32("classify_low_max", &v)?;
    }
    if let Some(v) = kv.remove("classify_medium_max") {
        thresholds.medium_max = parse_u32("classify_medium_max", &v)?;
    }
    sim.thresholds = thresholds;

    let mut config = RunConfig {
        topology,
        source,
        scheme,
        sim,
        seed,
        out,
    };
    if let TraceSource::Generated(params) = &mut config.source {
        params.seed = seed;
    }
    Ok(config)
}
