//! HodgeRank: row geometric means, and the least-squares projection onto
//! strongly transitive matrices.

use serde::Serialize;

use crate::domain::{log_map, AdditiveMatrix, AdditiveScore, Matrix, PositiveMatrix, ProjectiveScore};

/// Row geometric means of `x`, normalized to geometric mean one.
///
/// Computed as `exp` of the centered row means of `log x`; never as an
/// `n`-fold product.
pub fn hodge_score_multiplicative(x: &PositiveMatrix) -> ProjectiveScore {
    hodge_score_additive(&log_map(x)).to_projective()
}

/// Centered row means of `a`.
pub fn hodge_score_additive(a: &AdditiveMatrix) -> AdditiveScore {
    let n = a.n() as f64;
    AdditiveScore::centered(a.matrix().row_sums().into_iter().map(|s| s / n).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StProjection {
    pub score: AdditiveScore,
    /// `A - [s_i - s_j]`.
    pub residual: Matrix,
}

/// Frobenius-nearest strongly transitive matrix `[s_i - s_j]` to `a`.
///
/// The normal equations give `s_m = (row_m - col_m) / 2n`. On skew input the
/// column sums are the negated row sums and this is exactly
/// [`hodge_score_additive`]; general input is projected the same way.
pub fn l2_project_to_st(a: &AdditiveMatrix) -> StProjection {
    let score = if a.is_skew() {
        hodge_score_additive(a)
    } else {
        let m = a.matrix();
        let two_n = 2.0 * a.n() as f64;
        AdditiveScore::centered(
            m.row_sums()
                .into_iter()
                .zip(m.col_sums())
                .map(|(r, c)| (r - c) / two_n)
                .collect(),
        )
    };
    let s = score.values();
    let residual = Matrix::from_fn(a.n(), |i, j| a.get(i, j) - (s[i] - s[j]));
    StProjection { score, residual }
}
