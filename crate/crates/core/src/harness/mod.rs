//! Experiment engine: single trials, learning-rate sweeps, statistical
//! verification of the closed-form claims, and CSV/JSON/SVG output.

mod config;
mod export;
mod plot;
mod sweep;
mod trial;
mod verify;

use thiserror::Error;

pub use config::{
    ProblemSpec, RunConfig, SchedulerSpec, SmoothnessMethod, SmoothnessSpec,
};
pub use export::{export_csv, export_json, import_csv, read_csv, write_csv, RunSummaryReport, SeedSummary};
pub use plot::{render_plot, render_svg, PlotColumn};
pub use sweep::{
    aggregate, default_lr_grid, default_squash_grid, sweep, Aggregate, GridPoint, GridResult,
    SelectionMetric, SweepGrid, SweepResult,
};
pub use trial::{run_trial, run_trials, RunRecord, RunSummary, StepRow};
pub use verify::{verify, Claim, VerdictReport, VerifyParams};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Oracle(#[from] crate::Error),
    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl HarnessError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code for the CLI: 1 for configuration and input problems.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
