use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::LedgerReport;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const EVENTS_FILE: &str = "trajectory.events.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub trajectory: String,
    pub events: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub pass: bool,
    pub failed_clauses: Vec<String>,
    pub n_samples: usize,
    pub n_events: usize,
    pub max_energy_residual: Option<f64>,
    pub max_kkt_residual: Option<f64>,
    pub max_admissibility_violation: Option<f64>,
    pub min_event_dissipation: Option<f64>,
    pub min_event_gamma: Option<f64>,
    pub max_momentum_residual: Option<f64>,
}

impl From<&LedgerReport> for LedgerSummary {
    fn from(r: &LedgerReport) -> Self {
        Self {
            pass: r.passed(),
            failed_clauses: r.failed_clauses().into_iter().map(String::from).collect(),
            n_samples: r.n_samples,
            n_events: r.n_events,
            max_energy_residual: r.max_energy_residual,
            max_kkt_residual: r.max_kkt_residual,
            max_admissibility_violation: r.max_admissibility_violation,
            min_event_dissipation: r.min_event_dissipation,
            min_event_gamma: r.min_event_gamma,
            max_momentum_residual: r.max_momentum_residual,
        }
    }
}

/// Record of one `simulate` run, written next to its CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Resolved configuration, defaults expanded.
    pub config: Value,
    /// Paths relative to the run directory.
    pub artifacts: Artifacts,
    pub wall_clock_seconds: f64,
    pub ledger: LedgerSummary,
}

impl RunManifest {
    pub fn new(config: Value, wall_clock_seconds: f64, report: &LedgerReport) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            artifacts: Artifacts {
                trajectory: TRAJECTORY_FILE.into(),
                events: EVENTS_FILE.into(),
            },
            wall_clock_seconds,
            ledger: report.into(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path,
            message: e.to_string(),
        })
    }
}
