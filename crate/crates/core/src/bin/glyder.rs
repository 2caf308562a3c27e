//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 on success, 1 on configuration or input errors, 2 when a
//! verified claim fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use glyder::harness::{
    export_csv, export_json, render_plot, run_trials, sweep, verify, Claim, HarnessError,
    HarnessResult, PlotColumn, ProblemSpec, RunConfig, RunSummaryReport, SchedulerSpec,
    SelectionMetric, SmoothnessMethod, SmoothnessSpec, SweepGrid, VerifyParams,
};
use glyder::optimizers::OptimizerKind;
use glyder::schedulers::{DirectionAggregation, EmaConvention};
use glyder::smoothness::CurvatureMode;

#[derive(Parser)]
#[command(name = "glyder", version, about = "Locally optimal stepsize experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over its seeds.
    Run(RunArgs),
    /// Tune η₀ on a selection seed, then rerun the winner over all seeds.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "final-loss")]
        metric: MetricArg,
        #[arg(long, default_value_t = 1000)]
        selection_seed: u64,
        /// Comma-separated η₀ values; defaults to 20 log-spaced values in [1e-3, 1e2].
        #[arg(long, value_delimiter = ',')]
        eta_grid: Option<Vec<f64>>,
    },
    /// Check statistical claims.
    Verify {
        /// Claims to check; all when omitted.
        #[arg(long = "claim")]
        claims: Vec<String>,
        /// TOML file overriding verification parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot trajectory CSV files as one SVG.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "loss")]
        column: String,
        #[arg(long)]
        log_y: bool,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long, value_enum)]
    scheduler: Option<SchedulerArg>,
    #[arg(long, value_enum)]
    smoothness: Option<SmoothnessArg>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    ema_convention: Option<EmaArg>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    #[arg(long, value_enum)]
    curvature_mode: Option<CurvatureArg>,
    /// Output directory for CSV and JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Quadratic,
    Logistic,
    Mlp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    GlyderTheoretical,
    GlyderPractical,
    Constant,
    Cosine,
    Rsqrt,
    OracleInnerProduct,
    OracleExpected,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothnessArg {
    Constant,
    Proj1d,
    Gnb,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Sgd,
    Momentum,
    Adam,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmaArg {
    History,
    Instantaneous,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Mean,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurvatureArg {
    Unnormalized,
    Directional,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    FinalLoss,
    MinGradNormSq,
}

fn read(path: &Path) -> HarnessResult<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })
}

fn practical_only(flag: &str) -> HarnessError {
    HarnessError::Config { field: flag.into(), reason: "only applies to the glyder-practical scheduler".into() }
}

impl RunArgs {
    fn config(&self) -> HarnessResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_toml(&read(p)?)?,
            None => RunConfig::new(
                ProblemSpec::quadratic(20, 1.0),
                SchedulerSpec::glyder_practical(SmoothnessSpec::default()),
            ),
        };
        if let Some(p) = self.problem {
            cfg.problem = match p {
                ProblemArg::Quadratic => ProblemSpec::quadratic(20, 1.0),
                ProblemArg::Logistic => ProblemSpec::logistic(),
                ProblemArg::Mlp => ProblemSpec::mlp(),
            };
        }
        if let Some(s) = self.scheduler {
            cfg.scheduler = match s {
                SchedulerArg::GlyderTheoretical => SchedulerSpec::GlyderTheoretical { smoothness: None },
                SchedulerArg::GlyderPractical => SchedulerSpec::glyder_practical(SmoothnessSpec::default()),
                SchedulerArg::Constant => SchedulerSpec::Constant,
                SchedulerArg::Cosine => SchedulerSpec::Cosine { horizon: None },
                SchedulerArg::Rsqrt => SchedulerSpec::Rsqrt { squash: 100.0 },
                SchedulerArg::OracleInnerProduct => SchedulerSpec::OracleInnerProduct,
                SchedulerArg::OracleExpected => SchedulerSpec::OracleExpected,
            };
        }
        self.apply_practical(&mut cfg.scheduler)?;
        if let Some(o) = self.optimizer {
            cfg.optimizer = match o {
                OptimizerArg::Sgd => OptimizerKind::Sgd,
                OptimizerArg::Momentum => OptimizerKind::momentum(),
                OptimizerArg::Adam => OptimizerKind::adam(),
            };
        }
        if let Some(d) = self.direction {
            cfg.direction = match d {
                DirectionArg::Mean => DirectionAggregation::Mean,
                DirectionArg::Sum => DirectionAggregation::Sum,
            };
        }
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.steps = self.steps.unwrap_or(cfg.steps);
        cfg.eta0 = self.eta0.unwrap_or(cfg.eta0);
        if let Some(s) = &self.seeds {
            cfg.seeds = s.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_practical(&self, spec: &mut SchedulerSpec) -> HarnessResult<()> {
        let SchedulerSpec::GlyderPractical { smoothness, beta, ema_convention, .. } = spec else {
            let set = [
                ("smoothness", self.smoothness.is_some()),
                ("beta", self.beta.is_some()),
                ("ema-convention", self.ema_convention.is_some()),
                ("curvature-mode", self.curvature_mode.is_some()),
            ];
            return match set.iter().find(|(_, on)| *on) {
                Some((flag, _)) => Err(practical_only(flag)),
                None => Ok(()),
            };
        };
        if let Some(m) = self.smoothness {
            smoothness.method = match m {
                SmoothnessArg::Constant => SmoothnessMethod::Constant,
                SmoothnessArg::Proj1d => SmoothnessMethod::Proj1d,
                SmoothnessArg::Gnb => SmoothnessMethod::Gnb,
            };
        }
        if let Some(c) = self.curvature_mode {
            smoothness.curvature_mode = match c {
                CurvatureArg::Unnormalized => CurvatureMode::Unnormalized,
                CurvatureArg::Directional => CurvatureMode::Directional,
            };
        }
        if let Some(e) = self.ema_convention {
            *ema_convention = match e {
                EmaArg::History => EmaConvention::History,
                EmaArg::Instantaneous => EmaConvention::Instantaneous,
            };
        }
        *beta = self.beta.unwrap_or(*beta);
        Ok(())
    }
}

fn ensure_dir(dir: &Path) -> HarnessResult<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io { path: dir.display().to_string(), source: e })
}

fn write_records(dir: &Path, report: &RunSummaryReport, records: &[glyder::harness::RunRecord]) -> HarnessResult<()> {
    ensure_dir(dir)?;
    for r in records {
        export_csv(&r.steps, &dir.join(format!("{}-seed{}.csv", r.scheduler, r.seed)))?;
    }
    export_json(report, &dir.join("summary.json"))
}

fn print_report(report: &RunSummaryReport) {
    println!("{:>8}  {:>14}  {:>16}  {:>9}", "seed", "final loss", "min ‖∇f‖²", "seconds");
    for s in &report.per_seed {
        let min = s.min_grad_norm_sq.map_or_else(|| "-".into(), |v| format!("{v:.6e}"));
        println!("{:>8}  {:>14.6e}  {:>16}  {:>9.3}", s.seed, s.final_loss, min, s.wall_time_secs);
    }
    let a = &report.aggregate;
    println!(
        "final loss {:.6e} ± {:.3e}; min ‖∇f‖² {:.6e} ± {:.3e}",
        a.final_loss_mean, a.final_loss_std, a.min_grad_norm_sq_mean, a.min_grad_norm_sq_std
    );
}

enum Outcome {
    Ok,
    ClaimFailed,
}

fn execute(cmd: Command) -> HarnessResult<Outcome> {
    match cmd {
        Command::Run(args) => {
            let cfg = args.config()?;
            let records = run_trials(&cfg)?;
            let report = RunSummaryReport::new(cfg, &records);
            print_report(&report);
            if let Some(dir) = &args.out {
                write_records(dir, &report, &records)?;
            }
        }
        Command::Sweep { run, metric, selection_seed, eta_grid } => {
            let cfg = run.config()?;
            let mut grid = SweepGrid::default_for(&cfg.scheduler);
            if let Some(g) = eta_grid {
                grid.eta0 = g;
            }
            let metric = match metric {
                MetricArg::FinalLoss => SelectionMetric::FinalLoss,
                MetricArg::MinGradNormSq => SelectionMetric::MinGradNormSq,
            };
            let result = sweep(&cfg, &grid, metric, selection_seed)?;
            println!("best η₀ = {:e}, squash = {:?}", result.best.eta0, result.best.squash);
            let report = RunSummaryReport::new(result.best.apply(&cfg), &result.records);
            print_report(&report);
            if let Some(dir) = &run.out {
                write_records(dir, &report, &result.records)?;
                let f = dir.join("sweep.json");
                let file = fs::File::create(&f)
                    .map_err(|e| HarnessError::Io { path: f.display().to_string(), source: e })?;
                serde_json::to_writer_pretty(file, &result)?;
            }
        }
        Command::Verify { claims, params, seed, out } => {
            let mut p: VerifyParams = match params {
                Some(path) => toml::from_str(&read(&path)?)?,
                None => VerifyParams::default(),
            };
            p.seed = seed.unwrap_or(p.seed);
            let claims: Vec<Claim> = if claims.is_empty() {
                Claim::ALL.to_vec()
            } else {
                claims.iter().map(|c| c.parse()).collect::<HarnessResult<_>>()?
            };
            let mut verdicts = Vec::with_capacity(claims.len());
            for c in claims {
                let v = verify(c, &p)?;
                println!("{v}");
                verdicts.push(v);
            }
            if let Some(path) = out {
                let file = fs::File::create(&path)
                    .map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })?;
                serde_json::to_writer_pretty(file, &verdicts)?;
            }
            if verdicts.iter().any(|v| !v.passed) {
                return Ok(Outcome::ClaimFailed);
            }
        }
        Command::Plot { inputs, column, log_y, out } => {
            let column: PlotColumn = column.parse()?;
            let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
            render_plot(&refs, column, log_y, &out)?;
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ClaimFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
