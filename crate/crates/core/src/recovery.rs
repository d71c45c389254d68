//! Monte-Carlo score recovery: plant a true score, observe it through noise,
//! rank the observation at every point of a k grid and score the estimates.
//!
//! The design is paired: each trial draws one observation and evaluates
//! every k on it. Trial seeds are derived from `(base_seed, trial)` alone, so
//! trials may run in any order or in parallel without changing the table.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{rank_one_additive, AdditiveMatrix, AdditiveScore, KParameter, Matrix};
use crate::error::{RankError, Result};
use crate::perron::{perron_family_score, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Skew Gaussian log-noise, `E_ij = sigma z_ij = -E_ji`.
    LogNormalSkew { sigma: f64 },
    /// Skew uniform log-noise on `(-delta, delta)`.
    UniformSkew { delta: f64 },
    /// Independent Gaussian log-noise on every off-diagonal entry.
    LogNormalFree { sigma: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let p = match *self {
            NoiseModel::LogNormalSkew { sigma } | NoiseModel::LogNormalFree { sigma } => sigma,
            NoiseModel::UniformSkew { delta } => delta,
        };
        if p > 0.0 && p.is_finite() {
            Ok(())
        } else {
            Err(RankError::InvalidParameter(format!("noise scale must be positive, got {p}")))
        }
    }

    pub fn is_skew(&self) -> bool {
        !matches!(self, NoiseModel::LogNormalFree { .. })
    }

    /// Noise matrix `E` for dimension `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Matrix {
        let mut e = Matrix::zeros(n);
        match *self {
            NoiseModel::LogNormalSkew { sigma } => {
                for i in 0..n {
                    for j in i + 1..n {
                        let v = sigma * rng.sample::<f64, _>(StandardNormal);
                        e.set(i, j, v);
                        e.set(j, i, -v);
                    }
                }
            }
            NoiseModel::UniformSkew { delta } => {
                for i in 0..n {
                    for j in i + 1..n {
                        let v = rng.random_range(-delta..delta);
                        e.set(i, j, v);
                        e.set(j, i, -v);
                    }
                }
            }
            NoiseModel::LogNormalFree { sigma } => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            e.set(i, j, sigma * rng.sample::<f64, _>(StandardNormal));
                        }
                    }
                }
            }
        }
        e
    }
}

/// `[s_i - s_j] + E`, with `E` drawn from `noise` using `seed` only.
pub fn generate_observation(s: &AdditiveScore, noise: &NoiseModel, seed: u64) -> Result<AdditiveMatrix> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = noise.sample(s.n(), &mut rng);
    let base = rank_one_additive(s);
    AdditiveMatrix::new(base.matrix().zip_map(&e, |a, b| a + b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Objective {
    KendallTau,
    L2Additive,
    TopOneAccuracy,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::KendallTau, Objective::L2Additive, Objective::TopOneAccuracy];

    /// Losses are minimized, accuracies maximized.
    pub fn is_loss(self) -> bool {
        !matches!(self, Objective::TopOneAccuracy)
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::KendallTau => "KendallTau",
            Objective::L2Additive => "L2Additive",
            Objective::TopOneAccuracy => "TopOneAccuracy",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "kendalltau" | "kendall" => Ok(Objective::KendallTau),
            "l2additive" | "l2" => Ok(Objective::L2Additive),
            "toponeaccuracy" | "top1" | "topone" => Ok(Objective::TopOneAccuracy),
            _ => Err(RankError::Parse(format!("unknown objective `{s}`"))),
        }
    }
}

/// Discordant-pair fraction, a pair tied in exactly one ranking counting half.
pub fn kendall_tau_distance(estimated: &[f64], truth: &[f64]) -> f64 {
    let n = estimated.len();
    let mut discordant = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let a = (estimated[i] - estimated[j]).partial_cmp(&0.0);
            let b = (truth[i] - truth[j]).partial_cmp(&0.0);
            let a = a.map(|o| o as i8).unwrap_or(0);
            let b = b.map(|o| o as i8).unwrap_or(0);
            discordant += match (a, b) {
                (0, 0) => 0.0,
                (0, _) | (_, 0) => 0.5,
                (x, y) if x != y => 1.0,
                _ => 0.0,
            };
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    if pairs == 0.0 {
        0.0
    } else {
        discordant / pairs
    }
}

fn unique_argmax(v: &[f64]) -> Option<usize> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut hits = v.iter().enumerate().filter(|(_, &x)| x == max);
    let first = hits.next()?.0;
    hits.next().is_none().then_some(first)
}

pub fn evaluate_objectives(
    estimated: &AdditiveScore,
    truth: &AdditiveScore,
    objectives: &[Objective],
) -> Result<BTreeMap<Objective, f64>> {
    if estimated.n() != truth.n() {
        return Err(RankError::DimensionMismatch { expected: truth.n(), got: estimated.n() });
    }
    let (e, t) = (estimated.values(), truth.values());
    Ok(objectives
        .iter()
        .map(|&o| {
            let value = match o {
                Objective::KendallTau => kendall_tau_distance(e, t),
                Objective::L2Additive => e
                    .iter()
                    .zip(t)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt(),
                Objective::TopOneAccuracy => match (unique_argmax(e), unique_argmax(t)) {
                    (Some(a), Some(b)) if a == b => 1.0,
                    _ => 0.0,
                },
            };
            (o, value)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrueScore {
    Fixed(AdditiveScore),
    Random { random_scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub true_score: TrueScore,
    pub noise: NoiseModel,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<KParameter>,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<Objective>,
    #[serde(default)]
    pub solver: SolverConfig,
}

pub fn default_k_grid() -> Vec<KParameter> {
    let mut grid = vec![KParameter::Zero];
    grid.extend([0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0].map(KParameter::Finite));
    grid.push(KParameter::Infinity);
    grid
}

fn default_objectives() -> Vec<Objective> {
    Objective::ALL.to_vec()
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(RankError::Dimension(self.n));
        }
        if self.k_grid.is_empty() {
            return Err(RankError::InvalidParameter("k grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(RankError::InvalidParameter("trials must be at least 1".into()));
        }
        if self.objectives.is_empty() {
            return Err(RankError::InvalidParameter("no objectives requested".into()));
        }
        match &self.true_score {
            TrueScore::Fixed(s) if s.n() != self.n => {
                return Err(RankError::DimensionMismatch { expected: self.n, got: s.n() })
            }
            TrueScore::Random { random_scale } if !(*random_scale >= 0.0) => {
                return Err(RankError::InvalidParameter("random score scale must be >= 0".into()))
            }
            _ => {}
        }
        self.noise.validate()?;
        self.solver.validate()
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the noise draw for `trial`; the `trial`-th SplitMix64 output of
/// the stream started at `base_seed`.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    splitmix64(base_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial as u64 + 1)))
}

fn truth_seed(base_seed: u64, trial: usize) -> u64 {
    splitmix64(trial_seed(base_seed, trial) ^ 0x005e_ed0f_7ac7_u64)
}

/// Metric values of one trial, per grid point; `None` marks a non-unique
/// tropical eigenvector at `k = Infinity`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub truth: AdditiveScore,
    pub metrics: Vec<Option<BTreeMap<Objective, f64>>>,
}

pub fn run_trial(cfg: &TrialConfig, trial: usize) -> Result<TrialOutcome> {
    let truth = match &cfg.true_score {
        TrueScore::Fixed(s) => s.clone(),
        TrueScore::Random { random_scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(truth_seed(cfg.base_seed, trial));
            AdditiveScore::centered(
                (0..cfg.n)
                    .map(|_| random_scale * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
        }
    };
    let a = generate_observation(&truth, &cfg.noise, trial_seed(cfg.base_seed, trial))?;
    let mut metrics = Vec::with_capacity(cfg.k_grid.len());
    for &k in &cfg.k_grid {
        match perron_family_score(&a, k, &cfg.solver) {
            Ok(est) => metrics.push(Some(evaluate_objectives(&est, &truth, &cfg.objectives)?)),
            Err(RankError::NonUniqueTropical(_)) => metrics.push(None),
            Err(e) => {
                return Err(RankError::Trial { trial, k, source: Box::new(e) });
            }
        }
    }
    Ok(TrialOutcome { trial, truth, metrics })
}

/// Every trial of `cfg`, in trial order.
pub fn run_trials(cfg: &TrialConfig) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub k: KParameter,
    pub objective: Objective,
    pub mean: f64,
    pub stderr: f64,
    /// Trials that entered the mean.
    pub trials: usize,
    /// Trials dropped for a non-unique tropical eigenvector.
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub total_trials: usize,
    pub cells: Vec<SweepCell>,
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl SweepTable {
    pub fn from_outcomes(cfg: &TrialConfig, outcomes: &[TrialOutcome]) -> Self {
        let mut cells = Vec::new();
        for (ki, &k) in cfg.k_grid.iter().enumerate() {
            for &objective in &cfg.objectives {
                let values: Vec<f64> = outcomes
                    .iter()
                    .filter_map(|o| o.metrics[ki].as_ref().map(|m| m[&objective]))
                    .collect();
                let count = values.len();
                let mut acc = CompensatedSum::default();
                values.iter().for_each(|&v| acc.add(v));
                let mean = if count > 0 { acc.total() / count as f64 } else { f64::NAN };
                let stderr = if count > 1 {
                    let mut sq = CompensatedSum::default();
                    values.iter().for_each(|&v| sq.add((v - mean).powi(2)));
                    (sq.total() / (count - 1) as f64).sqrt() / (count as f64).sqrt()
                } else {
                    0.0
                };
                cells.push(SweepCell {
                    k,
                    objective,
                    mean,
                    stderr,
                    trials: count,
                    excluded: outcomes.len() - count,
                });
            }
        }
        Self { total_trials: outcomes.len(), cells }
    }

    pub fn cell(&self, k: KParameter, objective: Objective) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.k == k && c.objective == objective)
    }

    /// Columns `k, objective, mean, stderr, trials, excluded`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "objective", "mean", "stderr", "trials", "excluded"])?;
        for c in &self.cells {
            w.write_record([
                c.k.to_string(),
                c.objective.name().to_string(),
                format!("{:.17e}", c.mean),
                format!("{:.17e}", c.stderr),
                c.trials.to_string(),
                c.excluded.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn k_sweep(cfg: &TrialConfig) -> Result<SweepTable> {
    let outcomes = run_trials(cfg)?;
    Ok(SweepTable::from_outcomes(cfg, &outcomes))
}

fn k_order(k: KParameter) -> f64 {
    k.as_f64()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestK {
    pub objective: Objective,
    pub k: KParameter,
    pub mean: f64,
    pub stderr: f64,
    /// Grid points whose mean is within one standard error of the best.
    pub within_one_stderr: Vec<KParameter>,
}

pub fn best_k(table: &SweepTable, objective: Objective) -> Result<BestK> {
    let mut cells: Vec<&SweepCell> = table
        .cells
        .iter()
        .filter(|c| c.objective == objective && c.trials > 0)
        .collect();
    if cells.is_empty() {
        return Err(RankError::MissingObjective(objective));
    }
    cells.sort_by(|a, b| k_order(a.k).total_cmp(&k_order(b.k)));
    let better = |a: f64, b: f64| if objective.is_loss() { a < b } else { a > b };
    let mut best = cells[0];
    for &c in &cells[1..] {
        if better(c.mean, best.mean) {
            best = c;
        }
    }
    let within_one_stderr = cells
        .iter()
        .filter(|c| (c.mean - best.mean).abs() <= best.stderr)
        .map(|c| c.k)
        .collect();
    Ok(BestK {
        objective,
        k: best.k,
        mean: best.mean,
        stderr: best.stderr,
        within_one_stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// `best_k` per truth, per objective.
    pub best: Vec<BTreeMap<Objective, KParameter>>,
    /// Whether the best k agrees across the non-degenerate truths.
    pub coincide: BTreeMap<Objective, bool>,
    /// Largest per-trial, per-k L2 loss difference between truths.
    pub max_l2_difference: Option<f64>,
    /// Per-trial L2 losses agree within 1e-9 (skew noise only).
    pub l2_identical: Option<bool>,
    /// Indices of truths with tied entries; left out of the comparisons.
    pub tied_truths: Vec<usize>,
}

const L2_IDENTITY_TOL: f64 = 1e-9;

/// Reruns the sweep with the same noise seeds under each truth.
pub fn score_independence_check(cfg: &TrialConfig, alt_scores: &[AdditiveScore]) -> Result<IndependenceReport> {
    if alt_scores.len() < 2 {
        return Err(RankError::InvalidParameter("need at least two truths".into()));
    }
    let mut runs = Vec::with_capacity(alt_scores.len());
    for s in alt_scores {
        let mut c = cfg.clone();
        c.true_score = TrueScore::Fixed(s.clone());
        let outcomes = run_trials(&c)?;
        let table = SweepTable::from_outcomes(&c, &outcomes);
        runs.push((outcomes, table));
    }

    let tied_truths: Vec<usize> = alt_scores
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let v = s.values();
            (0..v.len()).any(|i| (i + 1..v.len()).any(|j| v[i] == v[j]))
        })
        .map(|(i, _)| i)
        .collect();

    let mut best = Vec::with_capacity(runs.len());
    for (_, table) in &runs {
        let mut per = BTreeMap::new();
        for &o in &cfg.objectives {
            per.insert(o, best_k(table, o)?.k);
        }
        best.push(per);
    }

    let kept: Vec<usize> = (0..runs.len()).filter(|i| !tied_truths.contains(i)).collect();
    let coincide = cfg
        .objectives
        .iter()
        .map(|&o| {
            let agree = kept.windows(2).all(|w| best[w[0]][&o] == best[w[1]][&o]);
            (o, agree)
        })
        .collect();

    let max_l2_difference = cfg.objectives.contains(&Objective::L2Additive).then(|| {
        let mut worst = 0.0f64;
        for pair in kept.windows(2) {
            let (a, b) = (&runs[pair[0]].0, &runs[pair[1]].0);
            for (ta, tb) in a.iter().zip(b) {
                for (ma, mb) in ta.metrics.iter().zip(&tb.metrics) {
                    match (ma, mb) {
                        (Some(x), Some(y)) => {
                            let d = (x[&Objective::L2Additive] - y[&Objective::L2Additive]).abs();
                            worst = worst.max(d);
                        }
                        (None, None) => {}
                        _ => worst = f64::INFINITY,
                    }
                }
            }
        }
        worst
    });
    let l2_identical = match max_l2_difference {
        Some(d) if cfg.noise.is_skew() => Some(d <= L2_IDENTITY_TOL),
        _ => None,
    };

    Ok(IndependenceReport {
        best,
        coincide,
        max_l2_difference,
        l2_identical,
        tied_truths,
    })
}
