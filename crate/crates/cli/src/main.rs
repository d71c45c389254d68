//! `perronrank`: command-line front end for the perron-rank library.
//!
//! Exit codes: 0 on success, 1 when the input data is rejected by the
//! mathematics (a structured JSON diagnostic goes to stderr), 2 on usage
//! errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perron_rank::io::MatrixKind;
use perron_rank::{KParameter, NoiseModel, Objective, RankError};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "perronrank", version, about = "Ranking from pairwise comparison matrices with the Perron family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one matrix at a single k, or at 0, k and infinity with --all.
    Rank(RankArgs),
    /// Distance from the k-score to the HodgeRank and Tropical limits along k ladders.
    Converge(ConvergeArgs),
    /// Checks the perturbation bound on seeded noisy consistent matrices.
    PerturbCheck(PerturbArgs),
    /// Fiber certificate of a matrix at a given k.
    Fiber(FiberArgs),
    /// Random positive matrix with a prescribed Perron pair.
    SampleKalman(SampleKalmanArgs),
    /// Random additive matrix from the zero fiber at a given k.
    SampleFiber(SampleFiberArgs),
    /// Monte-Carlo recovery table over a k grid.
    Sweep(TrialArgs),
    /// Recovery table plus the best k per objective.
    Recover(TrialArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Matrix file (.json, otherwise headerless CSV).
    #[arg(long)]
    input: PathBuf,
    /// Matrix kind; required for CSV input.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<MatrixKind>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    /// A positive number, 0 or inf.
    #[arg(long, default_value = "1", value_parser = parse_k)]
    k: KParameter,
    /// Report k = 0, the given k and k = inf.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Finite k values approaching 0.
    #[arg(long = "k-ladder", value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
    k_ladder: Vec<f64>,
    /// Finite k values approaching infinity.
    #[arg(long = "inf-ladder", value_delimiter = ',', default_value = "10,30,100,300")]
    inf_ladder: Vec<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Args, Debug)]
struct PerturbArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, env = "RANK_SEED", default_value_t = 0)]
    seed: u64,
    /// Include every per-trial record in the output.
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct FiberArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "1", value_parser = parse_k)]
    k: KParameter,
    /// Require membership in the zero fiber instead of decomposing.
    #[arg(long)]
    zero: bool,
    /// Tolerance on the spread of row levels for --zero.
    #[arg(long = "fiber-tol", default_value_t = 1e-9)]
    fiber_tol: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct SampleKalmanArgs {
    /// Perron vector, comma separated; rescaled to geometric mean one.
    #[arg(long, value_delimiter = ',', required = true)]
    w: Vec<f64>,
    #[arg(long)]
    lambda: f64,
    #[arg(long, env = "RANK_SEED", default_value_t = 0)]
    seed: u64,
    /// Output matrix file; CSV on stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleFiberArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_k)]
    k: KParameter,
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, env = "RANK_SEED", default_value_t = 0)]
    seed: u64,
    /// Output matrix file; CSV on stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NoiseKind {
    LognormalSkew,
    UniformSkew,
    LognormalFree,
}

#[derive(Args, Debug)]
struct TrialArgs {
    /// JSON trial configuration; other trial flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = NoiseKind::LognormalSkew)]
    noise: NoiseKind,
    /// Noise scale (sigma, or delta for uniform noise).
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Standard deviation of the random true scores.
    #[arg(long = "score-scale", default_value_t = 1.0)]
    score_scale: f64,
    /// Fixed true score, comma separated; centered before use.
    #[arg(long = "true-score", value_delimiter = ',')]
    true_score: Option<Vec<f64>>,
    #[arg(long = "k-grid", value_delimiter = ',', value_parser = parse_k)]
    k_grid: Option<Vec<KParameter>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_objective)]
    objectives: Option<Vec<Objective>>,
    #[arg(long, env = "RANK_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

fn parse_k(s: &str) -> Result<KParameter, String> {
    s.parse().map_err(|e: RankError| e.to_string())
}

fn parse_kind(s: &str) -> Result<MatrixKind, String> {
    s.parse().map_err(|e: RankError| e.to_string())
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse().map_err(|e: RankError| e.to_string())
}

impl NoiseKind {
    fn model(self, scale: f64) -> NoiseModel {
        match self {
            NoiseKind::LognormalSkew => NoiseModel::LogNormalSkew { sigma: scale },
            NoiseKind::UniformSkew => NoiseModel::UniformSkew { delta: scale },
            NoiseKind::LognormalFree => NoiseModel::LogNormalFree { sigma: scale },
        }
    }
}

/// Failure of a subcommand.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; `flag` names the offending option.
    Usage { flag: &'static str, message: String },
    Rank(RankError),
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        CliError::Rank(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Rank(RankError::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Rank(RankError::Json(e))
    }
}

pub fn usage(flag: &'static str, message: impl Into<String>) -> CliError {
    CliError::Usage { flag, message: message.into() }
}

fn diagnostic(e: &RankError) -> serde_json::Value {
    let details = match e {
        RankError::NotInFiber { row_sums } => json!({ "row_sums": row_sums }),
        RankError::NotInZeroFiber { spread, row_levels } => {
            json!({ "spread": spread, "row_levels": row_levels })
        }
        RankError::NonUniqueTropical(data) => json!(data),
        RankError::NoConvergence { iterations, residual } => {
            json!({ "iterations": iterations, "residual": residual })
        }
        RankError::DegenerateDenominator { denominator, norm } => {
            json!({ "denominator": denominator, "norm_xi": norm })
        }
        RankError::NotApplicable { rho } => json!({ "rho": rho }),
        RankError::Trial { trial, k, source } => {
            json!({ "trial": trial, "k": k, "cause": diagnostic(source) })
        }
        _ => serde_json::Value::Null,
    };
    json!({ "error": e.kind(), "message": e.to_string(), "details": details })
}

fn report(err: CliError) -> ExitCode {
    match err {
        CliError::Usage { flag, message } => {
            eprintln!("error: invalid value for {flag}: {message}");
            ExitCode::from(2)
        }
        CliError::Rank(e) => {
            eprintln!("{}", diagnostic(&e));
            if e.is_domain() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Rank(a) => commands::rank(a),
        Command::Converge(a) => commands::converge(a),
        Command::PerturbCheck(a) => commands::perturb_check(a),
        Command::Fiber(a) => commands::fiber(a),
        Command::SampleKalman(a) => commands::sample_kalman(a),
        Command::SampleFiber(a) => commands::sample_fiber(a),
        Command::Sweep(a) => commands::sweep(a, false),
        Command::Recover(a) => commands::sweep(a, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}
