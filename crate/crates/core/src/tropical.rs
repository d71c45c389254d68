//! Max-plus spectral theory on additive comparison matrices.
//!
//! Tropical Rank is the max-times eigenvector of `X`, computed here as the
//! max-plus eigenvector of `log X`: the eigenvalue is the maximum cycle mean
//! (Karp), the eigenvectors are spanned by the columns of the Kleene star of
//! `A - lambda` at critical nodes.

use serde::Serialize;

use crate::domain::{log_map, max_abs_diff, AdditiveMatrix, AdditiveScore, Matrix, PositiveMatrix, ProjectiveScore};
use crate::error::{RankError, Result};

/// Tolerance for criticality, eigen-equation and column coincidence.
pub const TROPICAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TropicalEigenData {
    /// Maximum cycle mean, in log-preference units.
    pub lambda: f64,
    pub critical_nodes: Vec<usize>,
    /// Distinct centered critical columns of `(A - lambda)*`.
    pub basis: Vec<AdditiveScore>,
    pub unique: bool,
    pub eigenvector: Option<AdditiveScore>,
}

/// Maximum over all cycles of weight / length (Karp's algorithm).
pub fn max_cycle_mean(a: &AdditiveMatrix) -> f64 {
    karp(a.matrix())
}

fn karp(m: &Matrix) -> f64 {
    let n = m.n();
    // walks[k][v]: heaviest walk of exactly k edges from node 0 to v
    let mut walks = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    walks[0][0] = 0.0;
    for k in 1..=n {
        for v in 0..n {
            walks[k][v] = (0..n)
                .map(|u| walks[k - 1][u] + m.get(u, v))
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    (0..n)
        .filter(|&v| walks[n][v] > f64::NEG_INFINITY)
        .map(|v| {
            (0..n)
                .filter(|&k| walks[k][v] > f64::NEG_INFINITY)
                .map(|k| (walks[n][v] - walks[k][v]) / (n - k) as f64)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Max-plus closure `I + B + B^2 + ... + B^(n-1)`; absent paths are `-inf`.
///
/// Requires every cycle of `b` to have nonpositive weight.
pub fn kleene_star(b: &AdditiveMatrix) -> Result<Matrix> {
    let mean = karp(b.matrix());
    if mean > TROPICAL_TOL {
        return Err(RankError::PositiveCycle { mean });
    }
    Ok(star_unchecked(b.matrix()))
}

fn star_unchecked(b: &Matrix) -> Matrix {
    let n = b.n();
    let mut s = b.clone();
    for via in 0..n {
        for i in 0..n {
            let left = s.get(i, via);
            if left == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..n {
                let through = left + s.get(via, j);
                if through > s.get(i, j) {
                    s.set(i, j, through);
                }
            }
        }
    }
    for i in 0..n {
        // identity term; cycle weights are <= 0
        s.set(i, i, s.get(i, i).max(0.0));
    }
    s
}

/// Max-plus product `a (x) b`.
pub fn max_plus_product(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.n();
    Matrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| a.get(i, k) + b.get(k, j))
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

pub fn tropical_eigen(a: &AdditiveMatrix) -> TropicalEigenData {
    let n = a.n();
    let lambda = max_cycle_mean(a);
    let b = a.matrix().map(|x| x - lambda);
    let star = star_unchecked(&b);
    let plus = max_plus_product(&b, &star);

    let critical_nodes: Vec<usize> = (0..n)
        .filter(|&i| plus.get(i, i) >= -TROPICAL_TOL)
        .collect();

    let mut basis: Vec<AdditiveScore> = Vec::new();
    for &c in &critical_nodes {
        let column = AdditiveScore::centered((0..n).map(|i| star.get(i, c)).collect());
        if !basis
            .iter()
            .any(|v| max_abs_diff(v.values(), column.values()) <= TROPICAL_TOL)
        {
            basis.push(column);
        }
    }
    let unique = basis.len() == 1;
    let eigenvector = unique.then(|| basis[0].clone());
    TropicalEigenData {
        lambda,
        critical_nodes,
        basis,
        unique,
        eigenvector,
    }
}

/// `max_i |max_j (A_ij + x_j) - lambda - x_i|`.
pub fn eigen_defect(a: &AdditiveMatrix, lambda: f64, x: &[f64]) -> f64 {
    (0..a.n())
        .map(|i| {
            let best = a
                .row(i)
                .iter()
                .zip(x)
                .map(|(aij, xj)| aij + xj)
                .fold(f64::NEG_INFINITY, f64::max);
            (best - lambda - x[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Max-times eigenvector of `x`, normalized to geometric mean one.
pub fn tropical_score(x: &PositiveMatrix) -> Result<ProjectiveScore> {
    let data = tropical_eigen(&log_map(x));
    match &data.eigenvector {
        Some(v) => Ok(v.to_projective()),
        None => Err(RankError::NonUniqueTropical(Box::new(data))),
    }
}
