//! Service configuration: one TOML file, with environment overrides.

use std::path::{Path, PathBuf};

use rpm_core::instrument::DEFAULT_DISTRESS_THRESHOLD;
use rpm_core::scheduler::{DEFAULT_GRACE_DAYS, DEFAULT_INTERVAL_DAYS};
use rpm_core::{CadencePolicy, ScheduleError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("environment variable {name}: cannot parse {value:?}")]
    Env { name: &'static str, value: String },
    #[error(transparent)]
    Policy(#[from] ScheduleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub interval_days: u32,
    pub grace_days: u32,
    pub distress_threshold: i64,
    /// Node id this service answers to in the sync layer.
    pub node_id: String,
    /// Allowed lead of observation timestamps over the service clock.
    pub max_skew_seconds: i64,
    /// Write a snapshot after this many events; 0 disables snapshots.
    pub snapshot_every: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: 8080,
            data_dir: PathBuf::from("data"),
            interval_days: DEFAULT_INTERVAL_DAYS,
            grace_days: DEFAULT_GRACE_DAYS,
            distress_threshold: DEFAULT_DISTRESS_THRESHOLD,
            node_id: "clinic".into(),
            max_skew_seconds: 300,
            snapshot_every: 500,
        }
    }
}

pub const ENV_PORT: &str = "RPM_PORT";
pub const ENV_DATA_DIR: &str = "RPM_DATA_DIR";
pub const ENV_INTERVAL_DAYS: &str = "RPM_INTERVAL_DAYS";
pub const ENV_GRACE_DAYS: &str = "RPM_GRACE_DAYS";
pub const ENV_DISTRESS_THRESHOLD: &str = "RPM_DISTRESS_THRESHOLD";

fn parse_env<T: std::str::FromStr>(
    name: &'static str,
    env: &impl Fn(&str) -> Option<String>,
) -> Result<Option<T>, ConfigError> {
    match env(name) {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::Env { name, value: v }),
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` if given (defaults otherwise), then applies overrides
    /// looked up through `env`.
    pub fn load(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        if let Some(v) = parse_env(ENV_PORT, &env)? {
            cfg.port = v;
        }
        if let Some(v) = env(ENV_DATA_DIR) {
            cfg.data_dir = PathBuf::from(v);
        }
        if let Some(v) = parse_env(ENV_INTERVAL_DAYS, &env)? {
            cfg.interval_days = v;
        }
        if let Some(v) = parse_env(ENV_GRACE_DAYS, &env)? {
            cfg.grace_days = v;
        }
        if let Some(v) = parse_env(ENV_DISTRESS_THRESHOLD, &env)? {
            cfg.distress_threshold = v;
        }
        cfg.policy()?;
        Ok(cfg)
    }

    pub fn load_from_process_env(path: Option<&Path>) -> Result<Self, ConfigError> {
        Self::load(path, |k| std::env::var(k).ok())
    }

    pub fn policy(&self) -> Result<CadencePolicy, ScheduleError> {
        CadencePolicy::new(self.interval_days, self.grace_days)
    }
}
