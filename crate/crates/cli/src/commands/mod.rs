//! The four harness commands: bias tables, scale sweeps, theory reports and
//! the oracle verification suite.

pub mod bias_table;
pub mod scale_sweep;
pub mod theory_report;
pub mod verify;

use std::path::Path;

use anyhow::{Context, Result};

/// Location estimators the tables and sweeps report on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Mean,
    Median,
    Huber,
    Tukey,
    Lts,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mean => "mean",
            EstimatorKind::Median => "median",
            EstimatorKind::Huber => "huber",
            EstimatorKind::Tukey => "tukey",
            EstimatorKind::Lts => "lts",
        }
    }
}

/// Writes CSV content with path context on failure.
pub(crate) fn write_output(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating output directory {}", parent.display()))?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}
