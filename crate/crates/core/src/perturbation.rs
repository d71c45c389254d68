//! Linear estimate of the Perron vector of a perturbed consistent matrix,
//! and a checker for the accompanying error bound.
//!
//! Given a reference score `s` and `kappa >= 1`, the multiplicative
//! perturbation is `xi = [s_j / s_i * X_ij]` and its centered version is
//! `Xi = xi - kappa 11^T - (1 - kappa) I`. With `r = Xi 1` and `r_bar` its
//! mean, the Perron vector is approximated by
//! `s * (1 + (r - r_bar 1) / (kappa n))`, with a remainder `epsilon` whose
//! norm is compared against `rho / (1 - rho) * ||Xi|| / (kappa sqrt(n))`,
//! where `rho = (2 ||Xi|| / (n kappa - 2 ||Xi||))^2`.

use serde::Serialize;

use crate::domain::{Matrix, PositiveMatrix, ProjectiveScore};
use crate::error::{RankError, Result};
use crate::perron::{perron_pair, SolverConfig};

/// Largest singular value, by power iteration on `M^T M`.
pub fn spectral_norm(m: &Matrix, tol: f64) -> f64 {
    let n = m.n();
    if n == 0 || m.max_abs() == 0.0 {
        return 0.0;
    }
    let mt = m.transpose();
    // deterministic start with no special alignment to the all-ones direction
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i + 1) as f64).sin()).collect();
    normalize(&mut v);
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let w = mt.mat_vec(&m.mat_vec(&v));
        let next = dot(&v, &w);
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            // start vector in the null space; restart along a coordinate axis
            v = vec![0.0; n];
            let col = (0..n)
                .max_by(|&a, &b| col_norm(m, a).total_cmp(&col_norm(m, b)))
                .unwrap_or(0);
            v[col] = 1.0;
            continue;
        }
        v = w.iter().map(|x| x / norm).collect();
        if (next - estimate).abs() <= tol * next {
            return next.sqrt();
        }
        estimate = next;
    }
    estimate.sqrt()
}

fn col_norm(m: &Matrix, j: usize) -> f64 {
    (0..m.n()).map(|i| m.get(i, j).powi(2)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn l2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Accuracy used for `||Xi||` inside [`build_report`].
const NORM_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub kappa: f64,
    pub xi: PositiveMatrix,
    #[serde(rename = "Xi")]
    pub centered: Matrix,
    pub norm_xi: f64,
    pub rho: f64,
    pub r: Vec<f64>,
    pub r_bar: f64,
    pub linear_estimate: Vec<f64>,
    pub epsilon_bound: f64,
    pub applicable: bool,
}

pub fn build_report(x: &PositiveMatrix, s: &ProjectiveScore, kappa: f64) -> Result<PerturbationReport> {
    let n = x.n();
    if s.n() != n {
        return Err(RankError::DimensionMismatch { expected: n, got: s.n() });
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(RankError::InvalidParameter(format!("kappa must be >= 1, got {kappa}")));
    }
    let sv = s.values();
    let xi = PositiveMatrix::new(Matrix::from_fn(n, |i, j| sv[j] / sv[i] * x.get(i, j)))?;
    let centered = Matrix::from_fn(n, |i, j| {
        let diag = if i == j { 1.0 - kappa } else { 0.0 };
        xi.get(i, j) - kappa - diag
    });
    let norm_xi = spectral_norm(&centered, NORM_TOL);
    let nk = n as f64 * kappa;
    let denominator = nk - 2.0 * norm_xi;
    if denominator <= 0.0 {
        return Err(RankError::DegenerateDenominator { denominator, norm: norm_xi });
    }
    let rho = (2.0 * norm_xi / denominator).powi(2);
    let r = centered.row_sums();
    let r_bar = r.iter().sum::<f64>() / n as f64;
    let linear_estimate = sv
        .iter()
        .zip(&r)
        .map(|(si, ri)| si * (1.0 + (ri - r_bar) / nk))
        .collect();
    let epsilon_bound = if rho < 1.0 {
        rho / (1.0 - rho) * norm_xi / (kappa * (n as f64).sqrt())
    } else {
        f64::INFINITY
    };
    Ok(PerturbationReport {
        kappa,
        xi,
        centered,
        norm_xi,
        rho,
        r,
        r_bar,
        linear_estimate,
        epsilon_bound,
        applicable: rho < 0.5,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub passed: bool,
    /// `||epsilon||_2` after the best projective rescaling of `v(X)`.
    pub observed_epsilon_norm: f64,
    pub bound: f64,
    /// `bound - observed`.
    pub margin: f64,
    /// Scalar `c` applied to `v(X) / s` before extracting `epsilon`.
    pub fit_scale: f64,
    pub epsilon: Vec<f64>,
}

/// Slack on the strict inequality, for the exact-zero case.
const STRICT_SLACK: f64 = 1e-14;

/// Computes `v(X)` and checks the remainder of the linear estimate against
/// the bound.
///
/// `v(X)` is only defined up to scale; the representative is the `c`
/// minimizing `||c v(X)/s - 1 - (r - r_bar 1)/(kappa n)||_2`.
pub fn verify_epsilon_bound(
    x: &PositiveMatrix,
    s: &ProjectiveScore,
    kappa: f64,
    cfg: &SolverConfig,
) -> Result<EpsilonCheck> {
    let report = build_report(x, s, kappa)?;
    if !report.applicable {
        return Err(RankError::NotApplicable { rho: report.rho });
    }
    let n = x.n();
    let nk = n as f64 * kappa;
    let pair = perron_pair(x, cfg)?;
    let ratio: Vec<f64> = pair
        .v
        .values()
        .iter()
        .zip(s.values())
        .map(|(v, si)| v / si)
        .collect();
    let target: Vec<f64> = report.r.iter().map(|ri| 1.0 + (ri - report.r_bar) / nk).collect();
    let fit_scale = dot(&ratio, &target) / dot(&ratio, &ratio);
    let epsilon: Vec<f64> = ratio
        .iter()
        .zip(&target)
        .map(|(u, t)| fit_scale * u - t)
        .collect();
    let observed = l2(&epsilon);
    let bound = report.epsilon_bound;
    Ok(EpsilonCheck {
        passed: observed < bound + STRICT_SLACK,
        observed_epsilon_norm: observed,
        bound,
        margin: bound - observed,
        fit_scale,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{exp_scale_map, max_abs_diff, normalize_projective, rank_one_of, AdditiveScore};

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&Matrix::zeros(3), 1e-12), 0.0);
        let d = Matrix::from_rows(vec![vec![3.0, 0.0], vec![0.0, -5.0]]).unwrap();
        assert!((spectral_norm(&d, 1e-14) - 5.0).abs() < 1e-10);
        // rank one u v^T has norm |u||v|
        let r = Matrix::from_fn(3, |i, j| (i as f64 + 1.0) * (2.0 - j as f64));
        let expected = (14.0f64).sqrt() * (5.0f64).sqrt();
        assert!((spectral_norm(&r, 1e-14) - expected).abs() < 1e-10);
    }

    #[test]
    fn null_start_vector_recovers() {
        // M^T M v vanishes unless v has a component on the last axis
        let mut m = Matrix::zeros(3);
        m.set(0, 2, 2.0);
        assert!((spectral_norm(&m, 1e-14) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn consistent_matrix_has_zero_perturbation() {
        let s_add = AdditiveScore::centered(vec![0.3, -0.8, 0.5, 0.0]);
        let s = s_add.to_projective();
        let (x, _) = rank_one_of(&s_add).unwrap();
        let report = build_report(&x, &s, 1.0).unwrap();
        assert!(report.norm_xi < 1e-14);
        assert!(report.rho < 1e-27);
        assert!(max_abs_diff(&report.linear_estimate, s.values()) < 1e-14);
        assert!(report.epsilon_bound < 1e-27);
        let check = verify_epsilon_bound(&x, &s, 1.0, &SolverConfig::default()).unwrap();
        assert!(check.passed);
        assert!(check.observed_epsilon_norm < 1e-12);
    }

    #[test]
    fn kappa_base_case() {
        for kappa in [1.0, 1.5, 4.0] {
            let n = 4;
            let x = PositiveMatrix::new(Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { kappa })).unwrap();
            let s = normalize_projective(&[1.0; 4]).unwrap();
            let report = build_report(&x, &s, kappa).unwrap();
            assert!(report.centered.max_abs() < 1e-15);
            assert!(max_abs_diff(&report.linear_estimate, &[1.0; 4]) < 1e-15);
            assert!(report.applicable);
        }
    }

    #[test]
    fn boundary_rho_is_one() {
        // X = (1 + t) 11^T gives Xi = t 11^T with norm t n = n / 4
        let n = 4;
        let t = 0.25;
        let x = PositiveMatrix::new(Matrix::from_fn(n, |_, _| 1.0 + t)).unwrap();
        let s = normalize_projective(&[1.0; 4]).unwrap();
        let report = build_report(&x, &s, 1.0).unwrap();
        assert!((report.norm_xi - 1.0).abs() < 1e-12);
        assert!((report.rho - 1.0).abs() < 1e-10);
        assert!(!report.applicable);
        assert!(matches!(
            verify_epsilon_bound(&x, &s, 1.0, &SolverConfig::default()),
            Err(RankError::NotApplicable { .. })
        ));
    }

    #[test]
    fn degenerate_denominator() {
        let x = PositiveMatrix::new(Matrix::constant(3, 3.0)).unwrap();
        let s = normalize_projective(&[1.0; 3]).unwrap();
        assert!(matches!(build_report(&x, &s, 1.0), Err(RankError::DegenerateDenominator { .. })));
        assert!(build_report(&x, &s, 0.5).is_err());
    }

    #[test]
    fn report_depends_on_x_and_s_only_through_xi() {
        let a = crate::domain::AdditiveMatrix::from_rows(vec![
            vec![0.0, 0.05, -0.02],
            vec![-0.05, 0.0, 0.04],
            vec![0.02, -0.04, 0.0],
        ])
        .unwrap();
        let s_add = AdditiveScore::centered(vec![1.0, -0.4, 0.2]);
        let (consistent, _) = rank_one_of(&s_add).unwrap();
        let noise = exp_scale_map(&a, 1.0).unwrap();
        let x = PositiveMatrix::new(consistent.matrix().zip_map(noise.matrix(), |p, q| p * q)).unwrap();
        let with_s = build_report(&x, &s_add.to_projective(), 1.0).unwrap();
        let flat = build_report(&noise, &normalize_projective(&[1.0; 3]).unwrap(), 1.0).unwrap();
        assert!(max_abs_diff(with_s.centered.as_slice(), flat.centered.as_slice()) < 1e-14);
        assert!((with_s.rho - flat.rho).abs() < 1e-14);
    }
}
