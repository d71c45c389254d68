//! Fibers of the Perron family maps.
//!
//! Every fiber of the log-version map is a translate of the zero fiber by a
//! strongly transitive matrix `[s_i - s_j]`, and the zero fiber splits into
//! independent per-row components plus multiples of the all-ones matrix:
//!
//! | k        | row component `a`                               |
//! |----------|-------------------------------------------------|
//! | finite   | `sum_j exp(k a_j) = 1` (so every `a_j < 0`)      |
//! | zero     | `sum_j a_j = 0`                                  |
//! | infinity | `a_j <= 0`, with `max_j a_j = 0`                 |
//!
//! On the multiplicative side, positive matrices with a prescribed Perron
//! pair `(w, lambda)` are exactly `lambda * w_i * Y_ij / w_j` for `Y` with
//! rows in the open simplex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::domain::{
    log_sum_exp, rank_one_additive, AdditiveMatrix, AdditiveScore, KParameter, Matrix,
    PositiveMatrix, ProjectiveScore,
};
use crate::error::{RankError, Result};
use crate::perron::{perron_family_score, SolverConfig};

/// Default absolute tolerance on the spread of row levels.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// n x n matrix whose rows lie in the open (n-1)-simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexRows(Matrix);

impl SimplexRows {
    pub fn new(m: Matrix) -> Result<Self> {
        for (i, row) in m.rows().enumerate() {
            if let Some(j) = row.iter().position(|&p| !(p > 0.0)) {
                return Err(RankError::NonPositiveEntry {
                    index: i * m.n() + j,
                    value: row[j],
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(RankError::NotInFiber {
                    row_sums: m.row_sums(),
                });
            }
        }
        Ok(Self(m))
    }

    /// Every row is the barycenter `(1/n, ..., 1/n)`.
    pub fn barycenter(n: usize) -> Self {
        Self(Matrix::constant(n, 1.0 / n as f64))
    }

    /// Rows drawn independently and uniformly from the open simplex
    /// (normalized standard exponentials).
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            let draws: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE))
                .collect();
            let total: f64 = draws.iter().sum();
            for (j, d) in draws.into_iter().enumerate() {
                m.set(i, j, d / total);
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(RankError::InvalidParameter(format!("lambda must be positive, got {lambda}")))
    }
}

/// Inverse of [`psi_map`]: `X_ij = lambda * w_i * Y_ij / w_j`.
pub fn kalman_from_simplex(w: &ProjectiveScore, lambda: f64, y: &SimplexRows) -> Result<PositiveMatrix> {
    check_lambda(lambda)?;
    if w.n() != y.n() {
        return Err(RankError::DimensionMismatch { expected: y.n(), got: w.n() });
    }
    let w = w.values();
    PositiveMatrix::new(Matrix::from_fn(y.n(), |i, j| lambda * w[i] * y.matrix().get(i, j) / w[j]))
}

/// Random positive matrix with Perron vector `w` and Perron root `lambda`.
pub fn kalman_sample(w: &ProjectiveScore, lambda: f64, seed: u64) -> Result<PositiveMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = SimplexRows::sample(w.n(), &mut rng);
    kalman_from_simplex(w, lambda, &y)
}

/// `Y_ij = X_ij * w_j / (lambda * w_i)`, accepted when every row of `Y`
/// sums to one within [`MEMBERSHIP_TOL`].
pub fn psi_map(x: &PositiveMatrix, w: &ProjectiveScore, lambda: f64) -> Result<SimplexRows> {
    check_lambda(lambda)?;
    if w.n() != x.n() {
        return Err(RankError::DimensionMismatch { expected: x.n(), got: w.n() });
    }
    let wv = w.values();
    let y = Matrix::from_fn(x.n(), |i, j| x.get(i, j) * wv[j] / (lambda * wv[i]));
    let row_sums = y.row_sums();
    if row_sums.iter().any(|s| (s - 1.0).abs() > MEMBERSHIP_TOL) {
        return Err(RankError::NotInFiber { row_sums });
    }
    Ok(SimplexRows(y))
}

/// Decomposition `A = [s_i - s_j] + rows + c 11^T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberCertificate {
    pub k: KParameter,
    pub score: AdditiveScore,
    pub c: f64,
    /// Row `i` is the component in the `i`-th summand.
    pub row_components: Matrix,
    /// Largest violation of the row-component equations.
    pub max_defect: f64,
}

impl FiberCertificate {
    /// `[s_i - s_j] + rows + c 11^T`.
    pub fn reconstruct(&self) -> Matrix {
        let s = self.score.values();
        Matrix::from_fn(self.row_components.n(), |i, j| {
            s[i] - s[j] + self.row_components.get(i, j) + self.c
        })
    }

    /// Largest entrywise gap between the reconstruction and `a`.
    pub fn reconstruction_defect(&self, a: &AdditiveMatrix) -> f64 {
        let r = self.reconstruct();
        crate::domain::max_abs_diff(r.as_slice(), a.matrix().as_slice())
    }
}

/// Per-row level `c_i` whose subtraction puts row `i` in its component.
fn row_levels(a: &Matrix, k: KParameter) -> Vec<f64> {
    let n = a.n() as f64;
    a.rows()
        .map(|row| match k {
            KParameter::Finite(k) => log_sum_exp(row.iter().map(|x| k * x)) / k,
            KParameter::Zero => row.iter().sum::<f64>() / n,
            KParameter::Infinity => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect()
}

/// Violation of the component equation for one row.
fn row_defect(row: &[f64], k: KParameter) -> f64 {
    match k {
        KParameter::Finite(k) => {
            let total: f64 = row.iter().map(|x| (k * x).exp()).sum();
            let positive = row.iter().fold(0.0f64, |m, &x| m.max(x));
            (total - 1.0).abs().max(positive)
        }
        KParameter::Zero => row.iter().sum::<f64>().abs(),
        KParameter::Infinity => row.iter().copied().fold(f64::NEG_INFINITY, f64::max).abs(),
    }
}

/// Certifies that `a` lies in the zero fiber of the map selected by `k`.
pub fn zero_fiber_certificate(a: &AdditiveMatrix, k: KParameter, tol: f64) -> Result<FiberCertificate> {
    if !(tol > 0.0) {
        return Err(RankError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let levels = row_levels(a.matrix(), k);
    let (lo, hi) = levels
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let spread = hi - lo;
    if spread > tol {
        return Err(RankError::NotInZeroFiber { spread, row_levels: levels });
    }
    let c = levels.iter().sum::<f64>() / levels.len() as f64;
    let row_components = a.matrix().map(|x| x - c);
    let max_defect = row_components
        .rows()
        .map(|row| row_defect(row, k))
        .fold(0.0, f64::max);
    Ok(FiberCertificate {
        k,
        score: AdditiveScore::zeros(a.n()),
        c,
        row_components,
        max_defect,
    })
}

/// Splits `a` into its fiber translate `[s_i - s_j]` and a zero-fiber part.
pub fn fiber_decompose(a: &AdditiveMatrix, k: KParameter, cfg: &SolverConfig) -> Result<FiberCertificate> {
    let score = perron_family_score(a, k, cfg)?;
    let translate = rank_one_additive(&score);
    let remainder = AdditiveMatrix::new(a.matrix().zip_map(translate.matrix(), |x, t| x - t))?;
    let allowed = 100.0 * cfg.tol * a.matrix().max_abs().max(1.0);
    let mut cert = match zero_fiber_certificate(&remainder, k, allowed) {
        Ok(cert) => cert,
        Err(RankError::NotInZeroFiber { spread, .. }) => {
            return Err(RankError::InternalInconsistency { spread, allowed })
        }
        Err(e) => return Err(e),
    };
    cert.score = score;
    Ok(cert)
}

/// How many zeros each sampled row carries at `k = Infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InfinityStratum {
    /// Exactly one zero per row.
    #[default]
    Generic,
    /// A random number (at least one) of zeros per row.
    MultiZero,
}

/// Random element of the zero fiber, shifted by `c 11^T`.
pub fn sample_zero_fiber(n: usize, k: KParameter, seed: u64, c: f64) -> Result<AdditiveMatrix> {
    sample_zero_fiber_in(n, k, seed, c, InfinityStratum::Generic)
}

pub fn sample_zero_fiber_in(
    n: usize,
    k: KParameter,
    seed: u64,
    c: f64,
    stratum: InfinityStratum,
) -> Result<AdditiveMatrix> {
    if n < 2 {
        return Err(RankError::Dimension(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = match k {
        KParameter::Finite(k) => {
            let p = SimplexRows::sample(n, &mut rng);
            p.matrix().map(|x| x.ln() / k + c)
        }
        KParameter::Zero => {
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                let row: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let mean = row.iter().sum::<f64>() / n as f64;
                for (j, v) in row.into_iter().enumerate() {
                    m.set(i, j, v - mean + c);
                }
            }
            m
        }
        KParameter::Infinity => {
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    // strictly negative: (-1, 0]
                    m.set(i, j, -rng.random::<f64>() - f64::MIN_POSITIVE);
                }
                let zeros = match stratum {
                    InfinityStratum::Generic => 1,
                    InfinityStratum::MultiZero => rng.random_range(1..=n),
                };
                let mut cols: Vec<usize> = (0..n).collect();
                for z in 0..zeros {
                    let pick = rng.random_range(z..n);
                    cols.swap(z, pick);
                    m.set(i, cols[z], 0.0);
                }
            }
            m.map(|x| x + c)
        }
    };
    AdditiveMatrix::new(m)
}
