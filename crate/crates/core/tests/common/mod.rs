//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls into the solvers under test.

#![allow(dead_code)]

use perron_rank::{AdditiveMatrix, AdditiveScore, Matrix, PositiveMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Skew matrix with independent standard normal upper entries, scaled.
pub fn random_skew<R: Rng>(n: usize, scale: f64, rng: &mut R) -> AdditiveMatrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = scale * normal(rng);
            m.set(i, j, v);
            m.set(j, i, -v);
        }
    }
    AdditiveMatrix::new(m).unwrap()
}

/// General (not skew) matrix with standard normal entries, scaled.
pub fn random_general<R: Rng>(n: usize, scale: f64, rng: &mut R) -> AdditiveMatrix {
    AdditiveMatrix::new(Matrix::from_fn(n, |_, _| scale * normal(rng))).unwrap()
}

pub fn random_score<R: Rng>(n: usize, scale: f64, rng: &mut R) -> AdditiveScore {
    AdditiveScore::centered((0..n).map(|_| scale * normal(rng)).collect())
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `[s_i - s_j]`, built by hand.
pub fn consistent(s: &[f64]) -> Matrix {
    Matrix::from_fn(s.len(), |i, j| s[i] - s[j])
}

/// Coefficients `c_0..c_n` of `det(x I - M)` (Faddeev-LeVerrier).
pub fn char_poly(m: &Matrix) -> Vec<f64> {
    let n = m.n();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut acc = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // acc <- M acc + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += m.get(i, l) * acc[l][j];
                }
                next[i][j] = s + if i == j { c[n - k + 1] } else { 0.0 };
            }
        }
        let mut trace = 0.0;
        for i in 0..n {
            for l in 0..n {
                trace += m.get(i, l) * next[l][i];
            }
        }
        c[n - k] = -trace / k as f64;
        acc = next;
    }
    c
}

fn horner(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Largest real root of a monic polynomial whose roots lie in `[-bound, bound]`.
pub fn largest_real_root(c: &[f64], bound: f64) -> f64 {
    let steps = 20_000;
    let mut hi = bound * (1.0 + 1e-9) + 1e-300;
    let h = 2.0 * hi / steps as f64;
    let mut lo = hi;
    for _ in 0..steps {
        lo = hi - h;
        if horner(c, lo).0 <= 0.0 {
            break;
        }
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if horner(c, mid).0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (p, dp) = horner(c, x);
        if dp != 0.0 {
            let step = p / dp;
            if step.abs() < (hi - lo).abs().max(1e-15 * x.abs()) {
                x -= step;
            }
        }
    }
    x
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Perron pair of a positive matrix from its characteristic polynomial and
/// a null-space solve with the last coordinate pinned to one. The vector is
/// returned with geometric mean one.
pub fn perron_oracle(x: &PositiveMatrix) -> (f64, Vec<f64>) {
    let m = x.matrix();
    let n = m.n();
    let bound = m.row_sums().into_iter().fold(0.0, f64::max);
    let lambda = largest_real_root(&char_poly(m), bound);
    let head: Vec<Vec<f64>> = (0..n - 1)
        .map(|i| (0..n - 1).map(|j| m.get(i, j) - if i == j { lambda } else { 0.0 }).collect())
        .collect();
    let rhs: Vec<f64> = (0..n - 1).map(|i| -m.get(i, n - 1)).collect();
    let mut v = solve(head, rhs);
    v.push(1.0);
    let gm = (v.iter().map(|x| x.ln()).sum::<f64>() / n as f64).exp();
    (lambda, v.into_iter().map(|x| x / gm).collect())
}

/// Largest singular value via the characteristic polynomial of `M^T M`.
pub fn spectral_norm_oracle(m: &Matrix) -> f64 {
    let n = m.n();
    let g = Matrix::from_fn(n, |i, j| (0..n).map(|l| m.get(l, i) * m.get(l, j)).sum());
    let bound = (0..n)
        .map(|i| (0..n).map(|j| g.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    largest_real_root(&char_poly(&g), bound).max(0.0).sqrt()
}

/// Maximum cycle mean by exhaustive enumeration of simple cycles.
pub fn brute_cycle_mean(m: &Matrix) -> f64 {
    fn extend(m: &Matrix, path: &mut Vec<usize>, weight: f64, best: &mut f64) {
        let start = path[0];
        let last = *path.last().unwrap();
        *best = best.max((weight + m.get(last, start)) / path.len() as f64);
        for next in start + 1..m.n() {
            if !path.contains(&next) {
                path.push(next);
                extend(m, path, weight + m.get(last, next), best);
                path.pop();
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for start in 0..m.n() {
        extend(m, &mut vec![start], 0.0, &mut best);
    }
    best
}
