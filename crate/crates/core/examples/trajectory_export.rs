//! Runs three schedulers on the same problem and writes their trajectories as
//! CSV, a JSON summary and an SVG plot of the loss.
//!
//! ```text
//! cargo run --release --example trajectory_export [out_dir]
//! ```

use std::path::PathBuf;

use glyder::harness::{
    export_csv, export_json, render_svg, run_trials, PlotColumn, ProblemSpec, RunConfig,
    RunSummaryReport, SchedulerSpec, SmoothnessSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "trajectories".into()).into();
    std::fs::create_dir_all(&out)?;
    let mut series = Vec::new();
    for scheduler in [
        SchedulerSpec::glyder_practical(SmoothnessSpec::default()),
        SchedulerSpec::Cosine { horizon: None },
        SchedulerSpec::Rsqrt { squash: 100.0 },
    ] {
        let mut cfg = RunConfig::new(ProblemSpec::logistic(), scheduler);
        cfg.steps = 300;
        cfg.eta0 = 0.5;
        cfg.seeds = vec![0, 1, 2];
        let records = run_trials(&cfg)?;
        let name = cfg.scheduler.name();
        export_csv(&records[0].steps, &out.join(format!("{name}.csv")))?;
        export_json(&RunSummaryReport::new(cfg, &records), &out.join(format!("{name}.json")))?;
        series.push((name.to_string(), records[0].steps.clone()));
    }
    std::fs::write(out.join("loss.svg"), render_svg(&series, PlotColumn::Loss, true))?;
    std::fs::write(out.join("stepsize.svg"), render_svg(&series, PlotColumn::Stepsize, true))?;
    println!("wrote {}", out.display());
    Ok(())
}
