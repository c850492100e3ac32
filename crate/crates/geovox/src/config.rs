//! Run configuration: CLI flag > TOML config file > built-in default, with
//! the winning source recorded per parameter for the JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{AppError, AppResult};

/// Optional overrides loadable from a TOML file; one flat table, keys match
/// the CLI flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub spacing: Option<f64>,
    pub padding: Option<usize>,
    pub closing: Option<usize>,
    pub erosion_iters: Option<usize>,
    pub radius_scale: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub length_tol: Option<f64>,
    pub length_max_sweeps: Option<usize>,
    pub stagnant_eps: Option<f64>,
    pub k: Option<usize>,
    pub sigma_v: Option<f64>,
    pub sigma_w: Option<f64>,
    pub gamma: Option<f64>,
    pub steps: Option<usize>,
    pub step_size: Option<f64>,
    pub grad_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> AppResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        toml::from_str(&text).map_err(|e| AppError::format(path, e.to_string()))
    }
}

/// Tracks resolved parameter values and where each came from.
#[derive(Debug, Default, Clone)]
pub struct Resolved {
    pub values: BTreeMap<String, serde_json::Value>,
    pub sources: BTreeMap<String, String>,
}

impl Resolved {
    pub fn pick<T: Copy + Into<serde_json::Value>>(
        &mut self,
        name: &str,
        cli: Option<T>,
        file: Option<T>,
        default: T,
    ) -> T {
        let (v, src) = match (cli, file) {
            (Some(c), _) => (c, "cli"),
            (None, Some(f)) => (f, "config"),
            (None, None) => (default, "default"),
        };
        self.values.insert(name.to_string(), v.into());
        self.sources.insert(name.to_string(), src.to_string());
        v
    }

    /// Same as [`Resolved::pick`] but the parameter stays optional (no
    /// built-in default, e.g. auto-calibrated ones).
    pub fn pick_opt<T: Copy + Into<serde_json::Value>>(
        &mut self,
        name: &str,
        cli: Option<T>,
        file: Option<T>,
    ) -> Option<T> {
        let (v, src) = match (cli, file) {
            (Some(c), _) => (Some(c), "cli"),
            (None, Some(f)) => (Some(f), "config"),
            (None, None) => (None, "auto"),
        };
        match v {
            Some(x) => {
                self.values.insert(name.to_string(), x.into());
            }
            None => {
                self.values.insert(name.to_string(), serde_json::Value::Null);
            }
        }
        self.sources.insert(name.to_string(), src.to_string());
        v
    }

    pub fn note(&mut self, name: &str, value: impl Into<serde_json::Value>, source: &str) {
        self.values.insert(name.to_string(), value.into());
        self.sources.insert(name.to_string(), source.to_string());
    }
}

/// GEOVOX_THREADS caps internal parallelism; 0 means auto. The computation is
/// single-threaded, so the cap is honored trivially; the value is validated
/// and echoed in reports.
pub fn threads_from_env() -> AppResult<u32> {
    match std::env::var("GEOVOX_THREADS") {
        Err(_) => Ok(0),
        Ok(raw) => raw.trim().parse::<u32>().map_err(|_| {
            AppError::Usage(format!(
                "GEOVOX_THREADS must be a nonnegative integer, got {raw:?}"
            ))
        }),
    }
}
