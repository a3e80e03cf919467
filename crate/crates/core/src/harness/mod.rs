//! Scenario orchestration, metrics and file output.
//!
//! A run steps the plant at the plant rate and, every control period,
//! updates the identifier, computes the yaw moment, allocates wheel torques
//! and holds them until the next tick. Each run writes a trajectory CSV whose
//! first line carries the plant hash, a timing CSV, a JSON summary and the
//! effective configuration.

pub mod config;
pub mod frontier;
pub mod metrics;
pub mod oracle;
pub mod record;
pub mod run;

use thiserror::Error;

pub use config::ScenarioConfig;
pub use frontier::{speed_frontier, FrontierResult};
pub use metrics::{estimation_report, phase_area, EstimationReport, RunMetrics};
pub use run::{run_scenario, write_run, RunOutput, RunSummary, Termination};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("runs do not share a plant: {0}")]
    MismatchedRuns(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("simulation error: {0}")]
    Simulation(String),
}

impl HarnessError {
    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) | Self::Csv(_) | Self::Json(_) | Self::Format(_) => 3,
            _ => 1,
        }
    }
}
