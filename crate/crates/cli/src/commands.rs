use std::fs;
use std::io::{self, Write};

use perron_rank::domain::AsAdditive;
use perron_rank::io::{format_csv_matrix, read_matrix, write_matrix, MatrixKind};
use perron_rank::recovery::{best_k, default_k_grid, run_trials, trial_seed, TrueScore};
use perron_rank::{
    exp_scale_map, fiber_decompose, hodge_score_additive, kalman_sample, log_perron_score,
    normalize_projective, rank_one_additive, sample_zero_fiber, tropical_eigen, verify_epsilon_bound,
    zero_fiber_certificate, AdditiveMatrix, AdditiveScore, ComparisonMatrix, KParameter, Matrix,
    NoiseModel, Objective, PositiveMatrix, RankError, SolverConfig, SweepTable, TrialConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::json;

use crate::{
    usage, CliError, ConvergeArgs, FiberArgs, InputArgs, OutputFormat, PerturbArgs, RankArgs,
    SampleFiberArgs, SampleKalmanArgs, SolverArgs, TrialArgs,
};

type CliResult = Result<(), CliError>;

fn solver(args: &SolverArgs) -> Result<SolverConfig, CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(usage("--tol", format!("must be positive, got {}", args.tol)));
    }
    if args.max_iter == 0 {
        return Err(usage("--max-iter", "must be at least 1"));
    }
    Ok(SolverConfig { tol: args.tol, max_iter: args.max_iter })
}

fn load(args: &InputArgs) -> Result<ComparisonMatrix, CliError> {
    if args.kind.is_none() && !args.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return Err(usage("--kind", "CSV input needs --kind mult|add"));
    }
    Ok(read_matrix(&args.input, args.kind)?)
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> CliResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct RankRecord {
    k: KParameter,
    normalization: &'static str,
    score: Vec<f64>,
    /// Perron root of the k-th Hadamard power (max-times eigenvalue at inf).
    eigenvalue: Option<f64>,
    iterations: Option<usize>,
    residual: Option<f64>,
}

fn rank_at(a: &AdditiveMatrix, k: KParameter, cfg: &SolverConfig) -> Result<RankRecord, RankError> {
    let record = |k, score: AdditiveScore, eigenvalue, iterations, residual| RankRecord {
        k,
        normalization: "sum0",
        score: score.into_vec(),
        eigenvalue,
        iterations,
        residual,
    };
    match k {
        KParameter::Zero => Ok(record(k, hodge_score_additive(a), None, None, None)),
        KParameter::Finite(kf) => {
            let lp = log_perron_score(a, kf, cfg)?;
            let eigenvalue = (kf * lp.log_lambda).exp();
            Ok(record(k, lp.score, Some(eigenvalue), Some(lp.iterations), Some(lp.residual)))
        }
        KParameter::Infinity => {
            let data = tropical_eigen(a);
            match data.eigenvector.clone() {
                Some(v) => Ok(record(k, v, Some(data.lambda.exp()), None, None)),
                None => Err(RankError::NonUniqueTropical(Box::new(data))),
            }
        }
    }
}

pub fn rank(args: RankArgs) -> CliResult {
    let cfg = solver(&args.solver)?;
    let input = load(&args.input)?;
    let a = input.as_additive();
    let ks = if args.all {
        let mut ks = vec![KParameter::Zero];
        if let KParameter::Finite(_) = args.k {
            ks.push(args.k);
        }
        ks.push(KParameter::Infinity);
        ks
    } else {
        vec![args.k]
    };
    let records = ks
        .into_iter()
        .map(|k| rank_at(&a, k, &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    match args.output {
        OutputFormat::Json if args.all => print_json(&records),
        OutputFormat::Json => print_json(&records[0]),
        OutputFormat::Csv => {
            let mut out = io::stdout().lock();
            writeln!(out, "k,index,score")?;
            for r in &records {
                for (i, s) in r.score.iter().enumerate() {
                    writeln!(out, "{},{},{:.16e}", r.k, i, s)?;
                }
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ConvergeRow {
    limit: &'static str,
    k: f64,
    /// Sup-norm distance to the limiting score; absent without a unique
    /// tropical eigenvector.
    error: Option<f64>,
}

pub fn converge(args: ConvergeArgs) -> CliResult {
    let cfg = solver(&args.solver)?;
    for (flag, ladder) in [("--k-ladder", &args.k_ladder), ("--inf-ladder", &args.inf_ladder)] {
        if let Some(bad) = ladder.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(usage(flag, format!("k values must be positive and finite, got {bad}")));
        }
    }
    let input = load(&args.input)?;
    let a = input.as_additive();
    let hodge = hodge_score_additive(&a);
    let tropical = tropical_eigen(&a);

    let mut rows = Vec::new();
    for &k in &args.k_ladder {
        let score = log_perron_score(&a, k, &cfg)?.score;
        rows.push(ConvergeRow { limit: "zero", k, error: Some(score.max_abs_diff(&hodge)) });
    }
    for &k in &args.inf_ladder {
        let error = match &tropical.eigenvector {
            Some(m) => Some(log_perron_score(&a, k, &cfg)?.score.max_abs_diff(m)),
            None => None,
        };
        rows.push(ConvergeRow { limit: "infinity", k, error });
    }

    match args.output {
        OutputFormat::Json => print_json(&json!({
            "hodge": hodge.values(),
            "tropical": tropical.eigenvector.as_ref().map(|v| v.values()),
            "tropical_unique": tropical.unique,
            "rows": rows,
        })),
        OutputFormat::Csv => {
            let mut out = io::stdout().lock();
            writeln!(out, "limit,k,error")?;
            for r in &rows {
                let e = r.error.map(|e| format!("{e:.16e}")).unwrap_or_default();
                writeln!(out, "{},{},{}", r.limit, r.k, e)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PerturbRecord {
    trial: usize,
    seed: u64,
    rho: Option<f64>,
    applicable: bool,
    passed: Option<bool>,
    observed: Option<f64>,
    bound: Option<f64>,
}

/// Noisy consistent matrix: `X_ij = kappa s_i / s_j exp(E_ij)` off the
/// diagonal, ones on it.
fn perturbed_instance(
    n: usize,
    sigma: f64,
    kappa: f64,
    seed: u64,
) -> Result<(PositiveMatrix, AdditiveScore), RankError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = AdditiveScore::centered((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    let noise = NoiseModel::LogNormalSkew { sigma }.sample(n, &mut rng);
    let base = rank_one_additive(&s);
    let m = Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            base.get(i, j) + noise.get(i, j) + kappa.ln()
        }
    });
    Ok((exp_scale_map(&AdditiveMatrix::new(m)?, 1.0)?, s))
}

pub fn perturb_check(args: PerturbArgs) -> CliResult {
    let cfg = solver(&args.solver)?;
    if args.n < 2 {
        return Err(usage("--n", "needs n >= 2"));
    }
    if !(args.sigma > 0.0 && args.sigma.is_finite()) {
        return Err(usage("--sigma", "must be positive"));
    }
    if !(args.kappa >= 1.0 && args.kappa.is_finite()) {
        return Err(usage("--kappa", "must be >= 1"));
    }
    let mut records = Vec::with_capacity(args.trials);
    for trial in 0..args.trials {
        let seed = trial_seed(args.seed, trial);
        let (x, s) = perturbed_instance(args.n, args.sigma, args.kappa, seed)?;
        let record = match verify_epsilon_bound(&x, &s.to_projective(), args.kappa, &cfg) {
            Ok(check) => PerturbRecord {
                trial,
                seed,
                rho: None,
                applicable: true,
                passed: Some(check.passed),
                observed: Some(check.observed_epsilon_norm),
                bound: Some(check.bound),
            },
            Err(RankError::NotApplicable { rho }) => PerturbRecord {
                trial,
                seed,
                rho: Some(rho),
                applicable: false,
                passed: None,
                observed: None,
                bound: None,
            },
            Err(RankError::DegenerateDenominator { .. }) => PerturbRecord {
                trial,
                seed,
                rho: None,
                applicable: false,
                passed: None,
                observed: None,
                bound: None,
            },
            Err(e) => return Err(e.into()),
        };
        records.push(record);
    }
    let applicable = records.iter().filter(|r| r.applicable).count();
    let passed = records.iter().filter(|r| r.passed == Some(true)).count();
    let worst_ratio = records
        .iter()
        .filter_map(|r| Some(r.observed? / r.bound?))
        .fold(0.0f64, f64::max);
    let mut summary = json!({
        "n": args.n,
        "sigma": args.sigma,
        "kappa": args.kappa,
        "seed": args.seed,
        "trials": args.trials,
        "applicable": applicable,
        "passed": passed,
        "failed": applicable - passed,
        "worst_observed_over_bound": worst_ratio,
        "all_passed": passed == applicable,
    });
    if args.verbose {
        summary["records"] = serde_json::to_value(&records)?;
    }
    print_json(&summary)
}

pub fn fiber(args: FiberArgs) -> CliResult {
    let cfg = solver(&args.solver)?;
    if !(args.fiber_tol > 0.0) {
        return Err(usage("--fiber-tol", "must be positive"));
    }
    let input = load(&args.input)?;
    let a = input.as_additive();
    let cert = if args.zero {
        zero_fiber_certificate(&a, args.k, args.fiber_tol)?
    } else {
        fiber_decompose(&a, args.k, &cfg)?
    };
    let reconstruction_defect = cert.reconstruction_defect(&a);
    print_json(&json!({
        "k": cert.k,
        "score": cert.score.values(),
        "c": cert.c,
        "rows": cert.row_components,
        "max_defect": cert.max_defect,
        "reconstruction_defect": reconstruction_defect,
    }))
}

fn emit_matrix(m: &Matrix, kind: MatrixKind, path: Option<&std::path::Path>) -> CliResult {
    match path {
        Some(p) => Ok(write_matrix(p, m, kind)?),
        None => {
            io::stdout().lock().write_all(format_csv_matrix(m).as_bytes())?;
            Ok(())
        }
    }
}

pub fn sample_kalman(args: SampleKalmanArgs) -> CliResult {
    if args.w.len() < 2 {
        return Err(usage("--w", "needs at least two entries"));
    }
    let w = normalize_projective(&args.w).map_err(|e| usage("--w", e.to_string()))?;
    if !(args.lambda > 0.0 && args.lambda.is_finite()) {
        return Err(usage("--lambda", "must be positive"));
    }
    let x = kalman_sample(&w, args.lambda, args.seed)?;
    emit_matrix(x.matrix(), MatrixKind::Multiplicative, args.output.as_deref())
}

pub fn sample_fiber(args: SampleFiberArgs) -> CliResult {
    if args.n < 2 {
        return Err(usage("--n", "needs n >= 2"));
    }
    if !args.c.is_finite() {
        return Err(usage("--c", "must be finite"));
    }
    let a = sample_zero_fiber(args.n, args.k, args.seed, args.c)?;
    emit_matrix(a.matrix(), MatrixKind::Additive, args.output.as_deref())
}

fn trial_config(args: &TrialArgs) -> Result<TrialConfig, CliError> {
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| usage("--config", e.to_string()))?
        }
        None => {
            let true_score = match &args.true_score {
                Some(v) => TrueScore::Fixed(AdditiveScore::centered(v.clone())),
                None => TrueScore::Random { random_scale: args.score_scale },
            };
            TrialConfig {
                n: args.n,
                true_score,
                noise: args.noise.model(args.sigma),
                k_grid: args.k_grid.clone().unwrap_or_else(default_k_grid),
                trials: args.trials,
                base_seed: args.seed,
                objectives: args.objectives.clone().unwrap_or_else(|| Objective::ALL.to_vec()),
                solver: solver(&args.solver)?,
            }
        }
    };
    cfg.validate().map_err(|e| match e {
        RankError::InvalidParameter(m) => usage(if args.config.is_some() { "--config" } else { "trial flags" }, m),
        other => other.into(),
    })?;
    Ok(cfg)
}

pub fn sweep(args: TrialArgs, recover: bool) -> CliResult {
    let cfg = trial_config(&args)?;
    let outcomes = run_trials(&cfg)?;
    let table = SweepTable::from_outcomes(&cfg, &outcomes);
    if !recover {
        return match args.output {
            OutputFormat::Json => print_json(&table),
            OutputFormat::Csv => Ok(table.write_csv(io::stdout().lock())?),
        };
    }
    let best = cfg
        .objectives
        .iter()
        .map(|&o| best_k(&table, o))
        .collect::<Result<Vec<_>, _>>()?;
    match args.output {
        OutputFormat::Json => print_json(&json!({ "config": cfg, "table": table, "best": best })),
        OutputFormat::Csv => {
            let mut out = io::stdout().lock();
            writeln!(out, "objective,k,mean,stderr")?;
            for b in &best {
                writeln!(out, "{},{},{:.16e},{:.16e}", b.objective.name(), b.k, b.mean, b.stderr)?;
            }
            Ok(())
        }
    }
}
