//! Comparison matrices, score vectors and the exp/log bridge between the
//! multiplicative and additive pictures.
//!
//! Multiplicative data lives in the open cone of elementwise positive
//! matrices ([`PositiveMatrix`]); additive data is an arbitrary finite real
//! matrix ([`AdditiveMatrix`]), skew-symmetric when it came from a reciprocal
//! matrix. Scores are only defined up to scale (multiplicative) or shift
//! (additive), so each has a canonical representative: geometric mean one for
//! [`ProjectiveScore`], sum zero for [`AdditiveScore`]. The two conventions
//! correspond under the entrywise logarithm.

use std::borrow::Cow;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{RankError, Result};

/// Absolute tolerance for the reciprocal / skew-symmetry flag.
pub const SKEW_TOL: f64 = 1e-12;

/// Largest |argument| accepted by routines that materialize `exp`.
pub const EXP_LIMIT: f64 = 700.0;

/// Dense square matrix of `f64`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != n {
                return Err(RankError::NotSquare {
                    n,
                    row,
                    len: values.len(),
                });
            }
            data.extend(values);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in self.rows() {
            for (s, &x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn is_skew(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| (self.get(i, j) + self.get(j, i)).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

fn check_comparison_shape(m: &Matrix) -> Result<()> {
    if m.n() < 2 {
        return Err(RankError::Dimension(m.n()));
    }
    for i in 0..m.n() {
        for j in 0..m.n() {
            let value = m.get(i, j);
            if !value.is_finite() {
                return Err(RankError::NonFinite { row: i, col: j, value });
            }
        }
    }
    Ok(())
}

/// Element of the open cone of elementwise positive n x n matrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PositiveMatrix(Matrix);

impl PositiveMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        check_comparison_shape(&m)?;
        if let Some((index, &value)) = m.as_slice().iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(RankError::NonPositiveEntry { index, value });
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// All-ones matrix.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(Matrix::constant(n, 1.0))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `X_ij * X_ji = 1` for all pairs, within [`SKEW_TOL`] in log space.
    pub fn is_reciprocal(&self) -> bool {
        self.0.map(f64::ln).is_skew(SKEW_TOL)
    }

    /// Entrywise `c * X`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.0.map(|x| c * x))
    }
}

/// Finite real n x n matrix of log-comparisons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdditiveMatrix {
    entries: Matrix,
    skew: bool,
}

impl AdditiveMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        check_comparison_shape(&entries)?;
        let skew = entries.is_skew(SKEW_TOL);
        Ok(Self { entries, skew })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(Matrix::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.entries.row(i)
    }

    /// Whether `A_ij = -A_ji` within [`SKEW_TOL`].
    pub fn is_skew(&self) -> bool {
        self.skew
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// Entrywise sum; the result is revalidated.
    pub fn add(&self, other: &AdditiveMatrix) -> Result<Self> {
        if self.n() != other.n() {
            return Err(RankError::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        Self::new(self.entries.zip_map(&other.entries, |a, b| a + b))
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.entries.map(|x| c * x))
    }

    /// `A + c * 11^T`.
    pub fn shift(&self, c: f64) -> Result<Self> {
        Self::new(self.entries.map(|x| x + c))
    }
}

/// Canonical positive score: geometric mean of the entries is one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectiveScore {
    normalization: Gm1,
    values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Gm1 {
    Gm1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Sum0 {
    Sum0,
}

impl ProjectiveScore {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Entrywise log; lands on the sum-zero representative.
    pub fn to_additive(&self) -> AdditiveScore {
        AdditiveScore::centered(self.values.iter().map(|x| x.ln()).collect())
    }
}

impl Index<usize> for ProjectiveScore {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Rescale a positive vector to geometric mean one.
pub fn normalize_projective(v: &[f64]) -> Result<ProjectiveScore> {
    if let Some((index, &value)) = v
        .iter()
        .enumerate()
        .find(|(_, &x)| !(x > 0.0 && x.is_finite()))
    {
        return Err(RankError::NonPositiveEntry { index, value });
    }
    let log_gm = v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64;
    let values = v.iter().map(|x| (x.ln() - log_gm).exp()).collect();
    Ok(ProjectiveScore {
        normalization: Gm1::Gm1,
        values,
    })
}

/// Canonical additive score: entries sum to zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdditiveScore {
    normalization: Sum0,
    values: Vec<f64>,
}

impl AdditiveScore {
    /// Validates that `values` already sums to zero (1e-12, scaled by the
    /// l1 mass of the vector when that exceeds one).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        let mass = values.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        if sum.abs() > 1e-12 * mass {
            return Err(RankError::NotCentered { sum });
        }
        Ok(Self {
            normalization: Sum0::Sum0,
            values,
        })
    }

    /// Subtracts the mean.
    pub fn centered(mut values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        values.iter_mut().for_each(|x| *x -= mean);
        Self {
            normalization: Sum0::Sum0,
            values,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::centered(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Entrywise exp; geometric mean one by construction.
    pub fn to_projective(&self) -> ProjectiveScore {
        ProjectiveScore {
            normalization: Gm1::Gm1,
            values: self.values.iter().map(|x| x.exp()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &AdditiveScore) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }
}

impl Index<usize> for AdditiveScore {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl<'de> Deserialize<'de> for AdditiveScore {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Bare(Vec<f64>),
            Tagged { values: Vec<f64> },
        }
        let values = match Repr::deserialize(deserializer)? {
            Repr::Bare(v) | Repr::Tagged { values: v } => v,
        };
        AdditiveScore::new(values).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// The ranking parameter: HodgeRank at zero, the Perron family for finite
/// positive k, Tropical Rank at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KParameter {
    Zero,
    Finite(f64),
    Infinity,
}

impl KParameter {
    pub fn finite(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(KParameter::Finite(k))
        } else {
            Err(RankError::InvalidParameter(format!(
                "finite k must be positive, got {k}"
            )))
        }
    }

    /// Maps 0 and +inf onto the limiting variants.
    pub fn from_f64(k: f64) -> Result<Self> {
        if k == 0.0 {
            Ok(KParameter::Zero)
        } else if k == f64::INFINITY {
            Ok(KParameter::Infinity)
        } else {
            Self::finite(k)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            KParameter::Zero => 0.0,
            KParameter::Finite(k) => k,
            KParameter::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for KParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KParameter::Zero => f.write_str("0"),
            KParameter::Finite(k) => write!(f, "{k}"),
            KParameter::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for KParameter {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(KParameter::Infinity),
            other => {
                let k: f64 = other
                    .parse()
                    .map_err(|_| RankError::Parse(format!("invalid k value `{s}`")))?;
                Self::from_f64(k)
            }
        }
    }
}

impl Serialize for KParameter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KParameter::Zero => serializer.serialize_f64(0.0),
            KParameter::Finite(k) => serializer.serialize_f64(*k),
            KParameter::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for KParameter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(k) => KParameter::from_f64(k),
            Repr::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Anything that can be viewed as an additive comparison matrix.
pub trait AsAdditive {
    fn as_additive(&self) -> Cow<'_, AdditiveMatrix>;
}

impl AsAdditive for AdditiveMatrix {
    fn as_additive(&self) -> Cow<'_, AdditiveMatrix> {
        Cow::Borrowed(self)
    }
}

impl AsAdditive for PositiveMatrix {
    fn as_additive(&self) -> Cow<'_, AdditiveMatrix> {
        Cow::Owned(log_map(self))
    }
}

/// Either picture of a comparison matrix, as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum ComparisonMatrix {
    Multiplicative(PositiveMatrix),
    Additive(AdditiveMatrix),
}

impl AsAdditive for ComparisonMatrix {
    fn as_additive(&self) -> Cow<'_, AdditiveMatrix> {
        match self {
            ComparisonMatrix::Multiplicative(x) => x.as_additive(),
            ComparisonMatrix::Additive(a) => a.as_additive(),
        }
    }
}

/// Entrywise natural log.
pub fn log_map(x: &PositiveMatrix) -> AdditiveMatrix {
    let entries = x.matrix().map(f64::ln);
    let skew = entries.is_skew(SKEW_TOL);
    AdditiveMatrix { entries, skew }
}

/// `[exp(k * A_ij)]`.
pub fn exp_scale_map(a: &AdditiveMatrix, k: f64) -> Result<PositiveMatrix> {
    check_positive_k(k)?;
    let magnitude = k * a.matrix().max_abs();
    if magnitude > EXP_LIMIT {
        return Err(RankError::OverflowRisk { magnitude });
    }
    PositiveMatrix::new(a.matrix().map(|x| (k * x).exp()))
}

/// `[X_ij^k]`.
pub fn hadamard_power(x: &PositiveMatrix, k: f64) -> Result<PositiveMatrix> {
    check_positive_k(k)?;
    let magnitude = k * x.matrix().as_slice().iter().fold(0.0f64, |m, v| m.max(v.ln().abs()));
    if magnitude > EXP_LIMIT {
        return Err(RankError::OverflowRisk { magnitude });
    }
    PositiveMatrix::new(x.matrix().map(|v| v.powf(k)))
}

fn check_positive_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(RankError::InvalidParameter(format!(
            "k must be a positive finite number, got {k}"
        )))
    }
}

/// `[s_i - s_j]`, the strongly transitive matrix generated by `s`.
pub fn rank_one_additive(s: &AdditiveScore) -> AdditiveMatrix {
    let v = s.values();
    let entries = Matrix::from_fn(v.len(), |i, j| v[i] - v[j]);
    AdditiveMatrix {
        entries,
        skew: true,
    }
}

/// Multiplicative and additive forms of the consistent matrix of `s`.
///
/// Fails with `OverflowRisk` when the score spread is too wide to
/// exponentiate.
pub fn rank_one_of(s: &AdditiveScore) -> Result<(PositiveMatrix, AdditiveMatrix)> {
    let additive = rank_one_additive(s);
    let multiplicative = exp_scale_map(&additive, 1.0)?;
    Ok((multiplicative, additive))
}

/// `|A_ij - A_ik - A_kj| <= tol` for every triple.
pub fn is_strongly_transitive(a: &AdditiveMatrix, tol: f64) -> bool {
    let n = a.n();
    (0..n).all(|i| {
        (0..n).all(|j| (0..n).all(|k| (a.get(i, j) - a.get(i, k) - a.get(k, j)).abs() <= tol))
    })
}

/// Numerically stable `log(sum(exp(x)))`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.into_iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;
    const E: f64 = std::f64::consts::E;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.n() == b.n() && max_abs_diff(a.as_slice(), b.as_slice()) <= tol
    }

    #[test]
    fn log_map_examples() {
        let zero = log_map(&PositiveMatrix::ones(3).unwrap());
        assert_eq!(zero.matrix(), &Matrix::zeros(3));
        assert!(zero.is_skew());

        let x = PositiveMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let a = log_map(&x);
        assert!(close(
            a.matrix(),
            &Matrix::from_rows(vec![vec![0.0, LN2], vec![-LN2, 0.0]]).unwrap(),
            1e-15
        ));
        assert!(a.is_skew());

        let x = PositiveMatrix::from_rows(vec![vec![E, E * E], vec![E.powi(3), E.powi(4)]]).unwrap();
        let a = log_map(&x);
        assert!(close(
            a.matrix(),
            &Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap(),
            1e-14
        ));
        assert!(!a.is_skew());
    }

    #[test]
    fn exp_scale_examples() {
        let ones = exp_scale_map(&AdditiveMatrix::zeros(4).unwrap(), 3.7).unwrap();
        assert_eq!(ones, PositiveMatrix::ones(4).unwrap());

        let a = AdditiveMatrix::from_rows(vec![vec![0.0, LN2], vec![-LN2, 0.0]]).unwrap();
        let x = exp_scale_map(&a, 2.0).unwrap();
        let expected = Matrix::from_rows(vec![vec![1.0, 4.0], vec![0.25, 1.0]]).unwrap();
        assert!(close(x.matrix(), &expected, 1e-14));

        let a = AdditiveMatrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(
            exp_scale_map(&a, 800.0),
            Err(RankError::OverflowRisk { .. })
        ));
        assert!(exp_scale_map(&a, 0.0).is_err());
    }

    #[test]
    fn hadamard_power_examples() {
        let x = PositiveMatrix::from_rows(vec![vec![1.0, 4.0], vec![0.25, 1.0]]).unwrap();
        let half = hadamard_power(&x, 0.5).unwrap();
        let expected = Matrix::from_rows(vec![vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        assert!(close(half.matrix(), &expected, 1e-15));
        assert_eq!(hadamard_power(&x, 1.0).unwrap(), x);

        let twos = PositiveMatrix::new(Matrix::constant(2, 2.0)).unwrap();
        assert!(close(
            hadamard_power(&twos, 3.0).unwrap().matrix(),
            &Matrix::constant(2, 8.0),
            1e-14
        ));
    }

    #[test]
    fn rank_one_examples() {
        let (mult, add) = rank_one_of(&AdditiveScore::zeros(3)).unwrap();
        assert_eq!(mult, PositiveMatrix::ones(3).unwrap());
        assert_eq!(add.matrix(), &Matrix::zeros(3));

        let s = AdditiveScore::centered(vec![LN2, -LN2]);
        let (mult, _) = rank_one_of(&s).unwrap();
        let expected = Matrix::from_rows(vec![vec![1.0, 4.0], vec![0.25, 1.0]]).unwrap();
        assert!(close(mult.matrix(), &expected, 1e-14));

        let s = AdditiveScore::centered(vec![0.3, -1.2, 2.5, 0.1]);
        let add = rank_one_additive(&s);
        for (i, sum) in add.matrix().row_sums().into_iter().enumerate() {
            assert!((sum - 4.0 * s[i]).abs() < 1e-14);
        }
        assert!(is_strongly_transitive(&add, 1e-12));
    }

    #[test]
    fn normalize_projective_examples() {
        let p = normalize_projective(&[2.0, 0.5]).unwrap();
        assert!(max_abs_diff(p.values(), &[2.0, 0.5]) < 1e-15);
        let p = normalize_projective(&[4.0, 1.0]).unwrap();
        assert!(max_abs_diff(p.values(), &[2.0, 0.5]) < 1e-15);
        assert!(matches!(
            normalize_projective(&[1.0, 0.0]),
            Err(RankError::NonPositiveEntry { index: 1, .. })
        ));
        assert!(normalize_projective(&[1.0, -3.0]).is_err());
    }

    #[test]
    fn strong_transitivity_examples() {
        assert!(is_strongly_transitive(&AdditiveMatrix::zeros(4).unwrap(), 1e-12));
        let a = AdditiveMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(!is_strongly_transitive(&a, 1e-12));
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(
            PositiveMatrix::from_rows(vec![vec![1.0]]),
            Err(RankError::Dimension(1))
        ));
        assert!(matches!(
            PositiveMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(RankError::NotSquare { .. })
        ));
        assert!(PositiveMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).is_err());
        assert!(AdditiveMatrix::from_rows(vec![vec![0.0, f64::NAN], vec![0.0, 0.0]]).is_err());
        assert!(matches!(
            AdditiveScore::new(vec![1.0, 1.0]),
            Err(RankError::NotCentered { .. })
        ));
    }

    #[test]
    fn near_skew_matrix_is_accepted_unflagged() {
        let a = AdditiveMatrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0 + 1e-9, 0.0]]).unwrap();
        assert!(!a.is_skew());
    }

    #[test]
    fn k_parameter_parsing() {
        assert_eq!("0".parse::<KParameter>().unwrap(), KParameter::Zero);
        assert_eq!("inf".parse::<KParameter>().unwrap(), KParameter::Infinity);
        assert_eq!("2.5".parse::<KParameter>().unwrap(), KParameter::Finite(2.5));
        assert!("-1".parse::<KParameter>().is_err());
        assert!("abc".parse::<KParameter>().is_err());
        let json = serde_json::to_string(&[KParameter::Zero, KParameter::Finite(0.5), KParameter::Infinity]).unwrap();
        assert_eq!(json, r#"[0.0,0.5,"inf"]"#);
        let back: Vec<KParameter> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![KParameter::Zero, KParameter::Finite(0.5), KParameter::Infinity]);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert!((log_sum_exp([1234.0, 1232.0]) - 1234.126928011043).abs() < 1e-12);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp([0.0; 4]) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn scores_serialize_with_normalization() {
        let s = AdditiveScore::centered(vec![1.0, -1.0]);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"normalization":"sum0","values":[1.0,-1.0]}"#
        );
        let p = s.to_projective();
        assert!(serde_json::to_string(&p).unwrap().starts_with(r#"{"normalization":"gm1""#));
        let back: AdditiveScore = serde_json::from_str(r#"{"normalization":"sum0","values":[0.5,-0.5]}"#).unwrap();
        assert_eq!(back.values(), &[0.5, -0.5]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn square(max_n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Matrix> {
            (2..=max_n).prop_flat_map(move |n| {
                prop::collection::vec(lo..hi, n * n).prop_map(move |data| Matrix { n, data })
            })
        }

        proptest! {
            #[test]
            fn log_exp_round_trip(m in square(6, -5.0, 5.0)) {
                let a = AdditiveMatrix::new(m).unwrap();
                let back = log_map(&exp_scale_map(&a, 1.0).unwrap());
                prop_assert!(max_abs_diff(back.matrix().as_slice(), a.matrix().as_slice()) <= 1e-12);
            }

            #[test]
            fn hadamard_power_is_homogeneous(m in square(5, 0.1, 10.0), c in 0.1f64..10.0, k in 0.1f64..3.0) {
                let x = PositiveMatrix::new(m).unwrap();
                let lhs = hadamard_power(&x.scale(c).unwrap(), k).unwrap();
                let rhs = hadamard_power(&x, k).unwrap();
                for (l, r) in lhs.matrix().as_slice().iter().zip(rhs.matrix().as_slice()) {
                    prop_assert!((l - c.powf(k) * r).abs() <= 1e-12 * l.abs().max(1.0));
                }
            }

            #[test]
            fn rank_one_is_strongly_transitive(v in prop::collection::vec(-4.0f64..4.0, 2..8)) {
                let (_, add) = rank_one_of(&AdditiveScore::centered(v)).unwrap();
                prop_assert!(is_strongly_transitive(&add, 1e-12));
            }

            #[test]
            fn projective_normalization_is_scale_invariant(
                v in prop::collection::vec(0.01f64..100.0, 2..8),
                c in 0.001f64..1000.0,
            ) {
                let a = normalize_projective(&v).unwrap();
                let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
                let b = normalize_projective(&scaled).unwrap();
                let again = normalize_projective(a.values()).unwrap();
                for i in 0..v.len() {
                    prop_assert!((a[i] - b[i]).abs() <= 1e-12 * a[i]);
                    prop_assert!((a[i] - again[i]).abs() <= 1e-12 * a[i]);
                }
                let log_gm: f64 = a.values().iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64;
                prop_assert!(log_gm.abs() <= 1e-12);
            }
        }
    }
}
