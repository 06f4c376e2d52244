//! Command-line front end of the `tiltflow` binary.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, BIntegrator, Scheme, SimConfig};
use crate::io::{self, Header};
use crate::measure::{Measure, MeasureSpec};
use crate::tilt::{solve_c, TiltFamily, TiltParams};
use crate::verify::{self, Hypotheses, Suite, SuiteOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tiltflow", version, about = "Skorokhod embedding by a Gaussian-tilted measure-valued flow")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppress the one-line summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble of paths and write per-path and checkpoint CSVs.
    Simulate(SimulateArgs),
    /// Run verification suites and emit a JSON array of check reports.
    Verify(VerifyArgs),
    /// Print V, a, A and m3 of a tilted measure as JSON.
    Moments(MomentsArgs),
    /// Print the c at which the b-tilt has mean a.
    #[command(name = "solve-c")]
    SolveC(SolveCArgs),
    /// Fit the exponential tail of T_hat from a simulate CSV.
    Tail(TailArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum SchemeArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum IntegratorArg {
    Trapezoid,
    Rk3,
    Euler,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum SuiteArg {
    Mainthm,
    Logconcave,
    Unilc,
    Compact,
    Restart,
    Derivatives,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Mainthm => Suite::Mainthm,
            SuiteArg::Logconcave => Suite::Logconcave,
            SuiteArg::Unilc => Suite::Unilc,
            SuiteArg::Compact => Suite::Compact,
            SuiteArg::Restart => Suite::Restart,
            SuiteArg::Derivatives => Suite::Derivatives,
            SuiteArg::All => Suite::All,
        }
    }
}

/// Simulation knobs shared by `simulate` and `verify`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "a")]
    pub scheme: SchemeArg,
    /// Integrator of b in scheme a.
    #[arg(long, value_enum, default_value = "rk3")]
    pub integrator: IntegratorArg,
    #[arg(long = "dt-max", default_value_t = 1e-3)]
    pub dt_max: f64,
    /// Stop threshold on A (default 1e-6·Var).
    #[arg(long = "eps-a")]
    pub eps_a: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    /// Time cap (default 50·Var).
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Comma-separated checkpoint times.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    #[arg(long)]
    pub measure: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long = "restart-s")]
    pub restart_s: Option<f64>,
    /// Write the report to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
}

#[derive(Debug, Args)]
pub struct SolveCArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    /// Per-path CSV produced by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a run's header hash covers.
#[derive(Serialize)]
struct RunRecord<'a, T: Serialize> {
    command: &'static str,
    measure: MeasureSpec,
    options: &'a T,
}

fn sim_config(mu: &Measure, a: &SimArgs, checkpoints: Vec<f64>) -> Result<SimConfig> {
    let mut cfg = SimConfig::for_measure(mu)?;
    cfg.seed = a.seed;
    cfg.dt_max = a.dt_max;
    cfg.eta = a.eta;
    if let Some(e) = a.eps_a {
        cfg.eps_a = e;
    }
    if let Some(t) = a.t_max {
        cfg.t_max = t;
    }
    cfg.scheme = match a.scheme {
        SchemeArg::A => Scheme::RootDriven,
        SchemeArg::B => Scheme::Euler,
    };
    cfg.integrator = match a.integrator {
        IntegratorArg::Trapezoid => BIntegrator::Trapezoid,
        IntegratorArg::Rk3 => BIntegrator::Rk3,
        IntegratorArg::Euler => BIntegrator::Euler,
    };
    cfg.checkpoint_times = checkpoints;
    cfg.validate()?;
    if a.paths == 0 {
        return Err(Error::InvalidConfig("--paths must be at least 1".into()));
    }
    Ok(cfg)
}

/// Outcome of a command: its exit code and the summary line.
struct Outcome {
    code: u8,
    summary: String,
}

fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let mu = Measure::from_path(&a.measure)?;
    let cfg = sim_config(&mu, &a.sim, a.checkpoints.clone())?;
    let header = Header::new(cfg.seed, &RunRecord { command: "simulate", measure: mu.spec(), options: &(&cfg, a.sim.paths) })?;
    let (paths, summary) = flow::run_ensemble(&mu, &cfg, a.sim.paths)?;
    io::write_atomic(&a.out, &io::paths_csv(&header, &paths)?)?;
    if !cfg.checkpoint_times.is_empty() {
        io::write_atomic(&io::checkpoint_path(&a.out), &io::checkpoints_csv(&header, &paths)?)?;
    }
    Ok(Outcome {
        code: EXIT_OK,
        summary: format!(
            "simulated {} paths ({} failed): mean T_hat {:.6} ± {:.2e}, max {:.6}, KS p {:.4} -> {}",
            summary.n,
            summary.n_failed,
            summary.mean_t,
            summary.se_t,
            summary.max_t,
            summary.ks_p,
            a.out.display()
        ),
    })
}

#[derive(Serialize)]
struct VerifyFile<'a> {
    header: &'a Header,
    reports: &'a [verify::CheckReport],
}

fn run_verify(a: &VerifyArgs) -> Result<(Outcome, String)> {
    let mu = Measure::from_path(&a.measure)?;
    let cfg = sim_config(&mu, &a.sim, Vec::new())?;
    let hyp = Hypotheses { sigma: a.sigma, alpha: a.alpha, beta: a.beta, l: a.l };
    let opts = SuiteOptions { paths: a.sim.paths, config: cfg.clone(), hyp, restart_s: a.restart_s };
    let suite = Suite::from(a.suite);
    let reports = verify::run_suites(&mu, &[suite], &opts)?;
    let passed = reports.iter().filter(|r| r.passed).count();
    let code = if passed == reports.len() { EXIT_OK } else { EXIT_CHECK_FAILED };
    let record = RunRecord { command: "verify", measure: mu.spec(), options: &(&cfg, &hyp, a.restart_s, a.suite, a.sim.paths) };
    let header = Header::new(cfg.seed, &record)?;
    let json = match &a.out {
        Some(_) => serde_json::to_string_pretty(&VerifyFile { header: &header, reports: &reports })?,
        None => serde_json::to_string_pretty(&reports)?,
    };
    let summary = format!("{passed}/{} checks passed", reports.len());
    Ok((Outcome { code, summary }, json))
}

#[derive(Serialize)]
struct MomentsOut {
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "log_V")]
    log_v: f64,
    a: f64,
    #[serde(rename = "A")]
    var: f64,
    m3: f64,
}

fn load(path: &Path) -> Result<Measure> {
    Measure::from_path(path)
}

fn moments(a: &MomentsArgs) -> Result<String> {
    let mu = load(&a.measure)?;
    let m = mu.tilted_moments(TiltParams::new(a.b, a.c)?)?;
    Ok(serde_json::to_string(&MomentsOut { v: m.v(), log_v: m.log_v, a: m.a, var: m.var, m3: m.m3 })?)
}

fn tail(a: &TailArgs) -> Result<(Outcome, String)> {
    let paths = io::read_paths_csv(&a.input)?;
    let ts: Vec<f64> = paths.iter().filter(|p| !p.failed()).map(|p| p.t_hat).collect();
    let (json, summary) = match verify::tail_estimate(&ts) {
        Ok(fit) => (serde_json::to_string_pretty(&fit)?, format!("tail rate {:.5}, r2 {:.5}", fit.rate, fit.r2)),
        // Reported, not a failure.
        Err(e @ Error::DegenerateTail { .. }) => (
            serde_json::to_string_pretty(&serde_json::json!({ "degenerate": true, "detail": e.to_string() }))?,
            e.to_string(),
        ),
        Err(e) => return Err(e),
    };
    Ok((Outcome { code: EXIT_OK, summary }, json))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, format!("{text}\n").as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => {
            let (o, json) = run_verify(a)?;
            emit(a.out.as_deref(), &json)?;
            Ok(o)
        }
        Command::Moments(a) => {
            println!("{}", moments(a)?);
            Ok(Outcome { code: EXIT_OK, summary: String::new() })
        }
        Command::SolveC(a) => {
            let mu = load(&a.measure)?;
            println!("{}", solve_c(&mu, a.a, a.b)?);
            Ok(Outcome { code: EXIT_OK, summary: String::new() })
        }
        Command::Tail(a) => {
            let (o, json) = tail(a)?;
            emit(a.out.as_deref(), &json)?;
            Ok(o)
        }
    }
}

/// Exit code for an error: numerical failure of a whole ensemble is 3,
/// everything else is an input problem.
pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::AllPathsFailed { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("tiltflow: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match dispatch(&cli) {
        Ok(o) => {
            if !cli.quiet && !o.summary.is_empty() {
                // Keep stdout parseable when it carries a JSON report.
                let json_on_stdout = matches!(&cli.command, Command::Verify(a) if a.out.is_none())
                    || matches!(&cli.command, Command::Tail(a) if a.out.is_none());
                if json_on_stdout {
                    eprintln!("{}", o.summary);
                } else {
                    println!("{}", o.summary);
                }
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("tiltflow: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
