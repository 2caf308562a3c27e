use std::process::Command;

use glyder::harness::{
    aggregate, export_csv, export_json, import_csv, render_svg, run_trial, run_trials, sweep,
    PlotColumn, ProblemSpec, RunConfig, RunSummaryReport, SchedulerSpec, SelectionMetric,
    SmoothnessSpec, SweepGrid,
};
use glyder::noise::NoiseModel;

fn practical_quadratic(steps: u64) -> RunConfig {
    let mut cfg = RunConfig::new(
        ProblemSpec::quadratic(8, 0.7),
        SchedulerSpec::glyder_practical(SmoothnessSpec::default()),
    );
    cfg.steps = steps;
    cfg.seeds = vec![0, 1, 2];
    cfg
}

#[test]
fn csv_round_trip_reproduces_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let rec = run_trial(&practical_quadratic(40), 5).unwrap();
    let path = dir.path().join("run.csv");
    export_csv(&rec.steps, &path).unwrap();
    assert_eq!(import_csv(&path).unwrap(), rec.steps);

    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 40 + 1);
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().next().unwrap(), "step,loss,grad_norm_sq_true,mu,gamma,stepsize,smoothness");
}

#[test]
fn baseline_rows_leave_estimator_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = practical_quadratic(3);
    cfg.scheduler = SchedulerSpec::Constant;
    let rec = run_trial(&cfg, 0).unwrap();
    let path = dir.path().join("c.csv");
    export_csv(&rec.steps, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 7);
    assert_eq!((fields[3], fields[4], fields[6]), ("", "", ""));
}

#[test]
fn repeated_runs_serialize_identically() {
    let cfg = practical_quadratic(60);
    let a = serde_json::to_string(&run_trial(&cfg, 9).unwrap()).unwrap();
    let b = serde_json::to_string(&run_trial(&cfg, 9).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&run_trial(&cfg, 10).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn parallel_trials_match_sequential_ones() {
    let cfg = practical_quadratic(30);
    let par = run_trials(&cfg).unwrap();
    for (rec, &seed) in par.iter().zip(&cfg.seeds) {
        assert_eq!(rec, &run_trial(&cfg, seed).unwrap());
    }
}

#[test]
fn sweep_is_reproducible() {
    let mut cfg = practical_quadratic(25);
    cfg.scheduler = SchedulerSpec::Rsqrt { squash: 1.0 };
    let grid = SweepGrid { eta0: vec![0.01, 0.1, 1.0], squash: vec![1.0, 100.0] };
    let a = sweep(&cfg, &grid, SelectionMetric::MinGradNormSq, 7).unwrap();
    let b = sweep(&cfg, &grid, SelectionMetric::MinGradNormSq, 7).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.aggregate, b.aggregate);
    assert_eq!(a.grid.len(), 6);
}

#[test]
fn aggregate_matches_direct_recomputation() {
    let records = run_trials(&practical_quadratic(20)).unwrap();
    let agg = aggregate(&records);
    let losses: Vec<f64> = records.iter().map(|r| r.summary.final_loss).collect();
    let n = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / n;
    let std = (losses.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((agg.final_loss_mean - mean).abs() <= 1e-12 * mean.abs());
    assert!((agg.final_loss_std - std).abs() <= 1e-12 * std);
}

#[test]
fn json_report_has_every_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = practical_quadratic(10);
    let records = run_trials(&cfg).unwrap();
    let path = dir.path().join("summary.json");
    export_json(&RunSummaryReport::new(cfg, &records), &path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["config", "per_seed", "aggregate", "verdicts"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["per_seed"].as_array().unwrap().len(), 3);
}

#[test]
fn unwritable_path_is_an_error() {
    let rec = run_trial(&practical_quadratic(2), 0).unwrap();
    let bad = std::path::Path::new("/nonexistent-dir/x.csv");
    assert!(export_csv(&rec.steps, bad).is_err());
}

#[test]
fn noiseless_oracle_plot_has_a_flat_stepsize_series() {
    let problem = ProblemSpec::NoisyQuadratic {
        dim: 2,
        eigenvalues: Some(vec![2.0, 1.0]),
        sigma: 0.0,
        noise: NoiseModel::Gaussian,
        initial_point: Some(vec![1.0, 1.0]),
        seed: 0,
    };
    let mut cfg = RunConfig::new(problem, SchedulerSpec::OracleExpected);
    cfg.steps = 20;
    let rec = run_trial(&cfg, 0).unwrap();
    assert!(rec.steps.iter().all(|r| r.stepsize == 0.5));
    let svg = render_svg(&[("oracle".into(), rec.steps)], PlotColumn::Stepsize, false);
    let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
    let ys: Vec<&str> = points.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
    assert_eq!(ys.len(), 20);
    assert!(ys.iter().all(|y| *y == ys[0]));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_glyder")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = cli(&["run", "--problem", "quadratic", "--scheduler", "cosine", "--steps", "5", "--seeds", "0,1", "--out", out]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("cosine-seed1.csv").exists());
    assert!(dir.path().join("summary.json").exists());

    assert_eq!(cli(&["run", "--eta0", "-1"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--scheduler", "rsqrt", "--beta", "0.5"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(cli(&["verify", "--claim", "not_a_claim"]).status.code(), Some(1));
    assert_eq!(cli(&["verify", "--claim", "noiseless_fixed_point"]).status.code(), Some(0));

    let params = dir.path().join("strict.toml");
    std::fs::write(&params, "oracle_rate_factor = 1e-9\nrate_seeds = 2\nrate_steps = 20\n").unwrap();
    let fail = cli(&["verify", "--claim", "thm2_rate", "--params", params.to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&fail.stdout).starts_with("FAIL"));

    let csv = dir.path().join("cosine-seed0.csv");
    let svg = dir.path().join("p.svg");
    let plot = cli(&["plot", csv.to_str().unwrap(), "--column", "stepsize", "--out", svg.to_str().unwrap()]);
    assert_eq!(plot.status.code(), Some(0));
    assert!(std::fs::read_to_string(svg).unwrap().contains("cosine-seed0"));
}

#[test]
fn config_file_drives_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = practical_quadratic(4);
    cfg.seeds = vec![3];
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let out = cli(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = import_csv(&dir.path().join("glyder-practical-seed3.csv")).unwrap();
    assert_eq!(rows, run_trial(&cfg, 3).unwrap().steps);

    std::fs::write(&path, "steps = 3\nbogus = 1\n[problem]\nkind = \"mlp_classifier\"\n[scheduler]\nkind = \"constant\"\n").unwrap();
    assert_eq!(cli(&["run", "--config", path.to_str().unwrap()]).status.code(), Some(1));
}
