//! JSON reports. Struct field order fixes the key order, so reports are
//! byte-deterministic; no timestamps or machine identifiers in payloads.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{AppError, AppResult};

#[derive(Debug, Serialize)]
pub struct FeatureReport {
    /// Laplace relaxation iterations.
    pub iterations: usize,
    /// Final max per-voxel change of the Laplace relaxation.
    pub residual: f64,
    pub stagnant_count: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub center: [f64; 3],
    pub length_sweeps: usize,
    pub length_residual: f64,
    pub growth_steps: u32,
    pub projected_count: usize,
    pub out_of_domain: Vec<usize>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub param_sources: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
pub struct TrackFrameReport {
    pub frame: usize,
    pub loss: f64,
    pub iters: usize,
    pub error: f64,
    pub converged: bool,
    pub data_term: f64,
}

#[derive(Debug, Serialize)]
pub struct TrackReport {
    pub frames: Vec<TrackFrameReport>,
    pub final_error: Option<f64>,
    pub aborted_at: Option<usize>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub param_sources: BTreeMap<String, String>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::format(path, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}
