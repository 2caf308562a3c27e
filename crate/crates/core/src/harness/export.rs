use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Aggregate, HarnessError, HarnessResult, RunConfig, RunRecord, StepRow, VerdictReport};

/// Writes trajectory rows as CSV with columns
/// `step,loss,grad_norm_sq_true,mu,gamma,stepsize,smoothness`.
/// Missing values are written as empty fields.
pub fn write_csv<W: Write>(rows: &[StepRow], out: W) -> HarnessResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> HarnessResult<Vec<StepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}

pub fn export_csv(rows: &[StepRow], path: &Path) -> HarnessResult<()> {
    let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(rows, f)
}

pub fn import_csv(path: &Path) -> HarnessResult<Vec<StepRow>> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_csv(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub min_grad_norm_sq: Option<f64>,
    pub final_loss: f64,
    pub wall_time_secs: f64,
}

impl From<&RunRecord> for SeedSummary {
    fn from(r: &RunRecord) -> Self {
        Self {
            seed: r.seed,
            min_grad_norm_sq: r.summary.min_grad_norm_sq,
            final_loss: r.summary.final_loss,
            wall_time_secs: r.wall_time.as_secs_f64(),
        }
    }
}

/// Summary document: configuration, per-seed outcomes, mean/std over seeds
/// and any claim verdicts that were computed alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummaryReport {
    pub config: RunConfig,
    pub per_seed: Vec<SeedSummary>,
    pub aggregate: Aggregate,
    #[serde(default)]
    pub verdicts: Vec<VerdictReport>,
}

impl RunSummaryReport {
    pub fn new(config: RunConfig, records: &[RunRecord]) -> Self {
        Self {
            config,
            per_seed: records.iter().map(SeedSummary::from).collect(),
            aggregate: super::aggregate(records),
            verdicts: vec![],
        }
    }
}

pub fn export_json(report: &RunSummaryReport, path: &Path) -> HarnessResult<()> {
    let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::to_writer_pretty(f, report)?;
    Ok(())
}
