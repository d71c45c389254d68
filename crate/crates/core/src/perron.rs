//! Principal eigenpairs of positive matrices and the Perron family of
//! ranking maps.
//!
//! Two iterations live here. [`perron_pair`] works on the matrix itself and
//! is meant for moderately scaled inputs. [`log_perron_score`] never forms
//! `exp(kA)`: it carries the logarithm of the iterate and applies the matrix
//! through a max-shifted log-sum-exp, so `k` in the thousands is fine.
//!
//! Both take plain power steps while the Collatz-Wielandt gap (the spread of
//! the ratios `(Mv)_i / v_i`) at least halves per step. When it does not, the
//! next step uses `M + mu I`, with `mu` the lower Collatz-Wielandt bound. The
//! fixed point is unchanged, but the near-periodic spectra that `exp(kA)`
//! develops for large `k` (a dominant critical cycle of length `p` puts `p`
//! eigenvalues close to the circle of radius `lambda`) no longer stall the
//! iteration.

use serde::{Deserialize, Serialize};

use crate::domain::{
    log_sum_exp, normalize_projective, AdditiveMatrix, AdditiveScore, AsAdditive, KParameter,
    PositiveMatrix, ProjectiveScore,
};
use crate::error::{RankError, Result};
use crate::hodge::hodge_score_additive;
use crate::tropical::tropical_eigen;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

impl SolverConfig {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        let cfg = Self { tol, max_iter };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(RankError::InvalidParameter(format!(
                "solver tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(RankError::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerronPair {
    pub v: ProjectiveScore,
    pub lambda: f64,
    pub iterations: usize,
    /// `||Xv - lambda v||_inf / (lambda ||v||_inf)`.
    pub residual: f64,
}

/// Perron eigenvector (geometric mean one) and eigenvalue of `x`.
pub fn perron_pair(x: &PositiveMatrix, cfg: &SolverConfig) -> Result<PerronPair> {
    cfg.validate()?;
    let m = x.matrix();
    let n = x.n();
    let mut v = vec![1.0; n];
    let mut residual = f64::INFINITY;
    let mut prev_gap = f64::INFINITY;

    for it in 1..=cfg.max_iter {
        let xv = m.mat_vec(&v);
        let (lo, hi) = ratio_bounds(&xv, &v);
        let lambda = xv.iter().sum::<f64>() / v.iter().sum::<f64>();
        let v_max = v.iter().fold(0.0f64, |a, &b| a.max(b));
        residual = xv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max)
            / (lambda * v_max);

        if residual <= cfg.tol || hi - lo <= 2.0 * cfg.tol * lambda {
            return Ok(PerronPair {
                v: normalize_projective(&v)?,
                lambda,
                iterations: it,
                residual,
            });
        }

        let gap = (hi - lo) / lambda;
        let shift = if gap < 0.5 * prev_gap { 0.0 } else { lo };
        prev_gap = gap;
        // (X + shift I) v, rescaled to unit max
        let mut next: Vec<f64> = xv.iter().zip(&v).map(|(a, b)| a + shift * b).collect();
        let scale = next.iter().fold(0.0f64, |a, &b| a.max(b));
        next.iter_mut().for_each(|e| *e /= scale);
        v = next;
    }

    Err(RankError::NoConvergence {
        iterations: cfg.max_iter,
        residual,
    })
}

fn ratio_bounds(image: &[f64], v: &[f64]) -> (f64, f64) {
    image
        .iter()
        .zip(v)
        .map(|(a, b)| a / b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

/// Outcome of the log-domain iteration for a finite `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogPerron {
    /// `(1/k) log v(exp(kA))`, centered.
    pub score: AdditiveScore,
    /// `(1/k) log lambda(exp(kA))`.
    pub log_lambda: f64,
    pub iterations: usize,
    /// `max_i |LSE(kA, y)_i - y_i - k * log_lambda|` at the returned iterate
    /// `y = k * score`.
    pub residual: f64,
}

/// `out_i = log sum_j exp(scaled_ij + y_j)`, one max shift per row.
fn lse_apply(scaled: &[f64], n: usize, y: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let row = &scaled[i * n..(i + 1) * n];
        *o = log_sum_exp(row.iter().zip(y).map(|(a, b)| a + b));
    }
}

/// Log-version Perron score of `exp(kA)` for finite `k > 0`.
///
/// The iterate `y` lives on the `kA` scale; it is re-centered every step and
/// declared converged once both its sup-norm change and the Collatz-Wielandt
/// half-gap drop below `tol * k` (floored at a few ulps of the row levels).
pub fn log_perron_score(a: &AdditiveMatrix, k: f64, cfg: &SolverConfig) -> Result<LogPerron> {
    cfg.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(RankError::InvalidParameter(format!(
            "log_perron_score needs a finite k > 0, got {k}"
        )));
    }
    let n = a.n();
    let scaled: Vec<f64> = a.matrix().as_slice().iter().map(|x| k * x).collect();
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut prev_gap = f64::INFINITY;

    for it in 1..=cfg.max_iter {
        lse_apply(&scaled, n, &y, &mut z);
        let (lo, hi) = z
            .iter()
            .zip(&y)
            .map(|(zi, yi)| zi - yi)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
                (lo.min(d), hi.max(d))
            });
        residual = 0.5 * (hi - lo);

        let level = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let threshold = (cfg.tol * k).max(8.0 * f64::EPSILON * level);

        let gap = hi - lo;
        if gap < 0.5 * prev_gap {
            next.copy_from_slice(&z);
        } else {
            // log of (M + e^lo I) e^y
            for ((nx, zi), yi) in next.iter_mut().zip(&z).zip(&y) {
                let (p, q) = (*zi, yi + lo);
                let top = p.max(q);
                *nx = top + ((p - top).exp() + (q - top).exp()).ln();
            }
        }
        prev_gap = gap;
        center(&mut next);
        let change = next
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

        if residual <= threshold && change <= 2.0 * threshold {
            let log_lambda = 0.5 * (hi + lo) / k;
            let score = AdditiveScore::centered(y.iter().map(|v| v / k).collect());
            return Ok(LogPerron {
                score,
                log_lambda,
                iterations: it,
                residual,
            });
        }
        std::mem::swap(&mut y, &mut next);
    }

    Err(RankError::NoConvergence {
        iterations: cfg.max_iter,
        residual,
    })
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Additive score of the Perron family member selected by `k`.
///
/// `Zero` is HodgeRank, `Infinity` the tropical eigenvector (an error when
/// it is not unique), finite `k` the log-domain Perron score.
pub fn perron_family_score<M: AsAdditive + ?Sized>(
    input: &M,
    k: KParameter,
    cfg: &SolverConfig,
) -> Result<AdditiveScore> {
    let a = input.as_additive();
    match k {
        KParameter::Zero => Ok(hodge_score_additive(&a)),
        KParameter::Infinity => {
            let data = tropical_eigen(&a);
            match data.eigenvector.clone() {
                Some(v) => Ok(v),
                None => Err(RankError::NonUniqueTropical(Box::new(data))),
            }
        }
        KParameter::Finite(k) => Ok(log_perron_score(&a, k, cfg)?.score),
    }
}
