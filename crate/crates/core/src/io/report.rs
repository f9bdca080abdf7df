use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aa::AAConfig;
use crate::error::{Error, Result};
use crate::identity::IdentityApproxCertificate;
use crate::types::Factorization;

/// Machine-readable summary of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: AAConfig,
    pub n_points: usize,
    pub dimension: usize,
    pub rss: f64,
    pub rss_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Wall-clock milliseconds per phase; empty unless timing was requested,
    /// so that reports of identical runs are byte-identical.
    pub timings_ms: BTreeMap<String, f64>,
    pub selected_indices: Option<Vec<usize>>,
    pub certificates: Vec<IdentityApproxCertificate>,
}

impl RunReport {
    pub fn from_factorization(command: &str, config: AAConfig, dimension: usize, f: &Factorization) -> Self {
        Self {
            command: command.to_string(),
            config,
            n_points: f.b.nrows(),
            dimension,
            rss: f.rss,
            rss_history: f.rss_history.clone(),
            iterations: f.iterations,
            converged: f.converged,
            timings_ms: BTreeMap::new(),
            selected_indices: None,
            certificates: Vec::new(),
        }
    }
}

pub fn write_report(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    super::write_text(path.as_ref(), &text)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_str(&text)?)
}
