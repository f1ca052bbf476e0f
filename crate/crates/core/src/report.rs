//! Run manifests and the structured results file.
//!
//! `results.json` is one JSON object:
//!
//! ```text
//! {
//!   "format": "rcg-results/1",
//!   "manifest": { tool, version, command, seed, config, dataset },
//!   "reduction": { ... },          // reduce only
//!   "evaluations": [ EvalResult ], // eval and compare
//!   "comparison": CompareTable     // compare only
//! }
//! ```
//!
//! Nothing time-dependent is written, so identical invocations produce
//! identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{Dataset, FeatureMask, InstanceMask};
use crate::error::{RcgError, Result};
use crate::evaluation::{CompareTable, EvalResult};
use crate::reduction::{AlgorithmConfig, ReductionTrace};

pub const FORMAT: &str = "rcg-results/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    /// Hex SHA-256 of the file bytes.
    pub sha256: String,
    pub class_column: String,
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub seed: u64,
    pub config: AlgorithmConfig,
    pub dataset: DatasetInfo,
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| RcgError::Io { path: path.to_path_buf(), source })?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: u64, config: AlgorithmConfig, path: &Path, ds: &Dataset) -> Result<Self> {
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed,
            config,
            dataset: DatasetInfo {
                path: path.display().to_string(),
                sha256: file_sha256(path)?,
                class_column: ds.class_column().to_string(),
                rows: ds.n_rows(),
                features: ds.n_features(),
                classes: ds.n_classes(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub algorithm: String,
    pub selected_features: Vec<String>,
    pub kept_rows: Vec<usize>,
    pub retained_instances_pct: f64,
    pub retained_features_pct: f64,
    /// RCG of the reduced set, when it holds at least two classes.
    pub final_rcg: Option<f64>,
    pub trace: ReductionTrace,
}

impl ReductionReport {
    pub fn new(
        ds: &Dataset,
        features: &FeatureMask,
        instances: &InstanceMask,
        final_rcg: Option<f64>,
        trace: ReductionTrace,
    ) -> Self {
        ReductionReport {
            algorithm: trace.algorithm.clone(),
            selected_features: features.indices().map(|j| ds.features()[j].name.clone()).collect(),
            kept_rows: instances.indices().collect(),
            retained_instances_pct: 100.0 * instances.alive_count() as f64 / ds.n_rows() as f64,
            retained_features_pct: 100.0 * features.selected_count() as f64 / ds.n_features() as f64,
            final_rcg,
            trace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub format: String,
    pub manifest: RunManifest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<EvalResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<CompareTable>,
}

impl Results {
    pub fn new(manifest: RunManifest) -> Self {
        Results { format: FORMAT.to_string(), manifest, reduction: None, evaluations: Vec::new(), comparison: None }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Results = serde_json::from_str(s)?;
        if r.format != FORMAT {
            return Err(RcgError::data(format!("unsupported results format '{}'", r.format)));
        }
        Ok(r)
    }
}

/// One aligned summary line per evaluation, with a header.
pub fn eval_table(results: &[EvalResult]) -> String {
    let width = results.iter().map(|r| r.algorithm.len()).max().unwrap_or(0).max("algorithm".len());
    let mut out = format!("{:<width$}  {:>5}  {:>8}  {:>8}  {:>10}  {:>8}\n", "algorithm", "folds", "size%", "dim%", "size*dim%", "acc%");
    for r in results {
        out.push_str(&format!(
            "{:<width$}  {:>5}  {:>8.2}  {:>8.2}  {:>10.2}  {:>8.2}\n",
            r.algorithm,
            r.per_fold.len(),
            r.retained_instances_pct,
            r.retained_features_pct,
            r.size_times_dim_pct,
            r.accuracy
        ));
    }
    out
}
