mod common;

use common::*;
use perron_rank::{
    build_report, exp_scale_map, rank_one_of, verify_epsilon_bound, AdditiveMatrix, AdditiveScore,
    Matrix, PositiveMatrix, RankError, SolverConfig,
};
use rand::Rng;

/// `exp([s_i - s_j] + E)` with skew Gaussian `E` of scale `sigma`.
fn noisy<R: Rng>(n: usize, sigma: f64, r: &mut R) -> (PositiveMatrix, AdditiveScore, Matrix) {
    let s = random_score(n, 1.0, r);
    let e = random_skew(n, 1.0, r).into_matrix();
    (instance(&s, &e, sigma), s, e)
}

fn instance(s: &AdditiveScore, e: &Matrix, sigma: f64) -> PositiveMatrix {
    let base = consistent(s.values());
    let a = AdditiveMatrix::new(base.zip_map(e, |b, x| b + sigma * x)).unwrap();
    exp_scale_map(&a, 1.0).unwrap()
}

#[test]
fn zero_perturbation_is_exact() {
    let s = AdditiveScore::centered(vec![0.7, -0.2, 0.4, -0.9, 0.0]);
    let (x, _) = rank_one_of(&s).unwrap();
    let check = verify_epsilon_bound(&x, &s.to_projective(), 1.0, &SolverConfig::default()).unwrap();
    assert!(check.passed);
    assert!(check.bound < 1e-25);
}

#[test]
fn small_noise_instances_meet_the_bound() {
    let cfg = SolverConfig::default();
    let mut r = rng(21);
    let mut failures = Vec::new();
    for seed in 0..100 {
        let (x, s, _) = noisy(5, 0.05, &mut r);
        let check = verify_epsilon_bound(&x, &s.to_projective(), 1.0, &cfg).unwrap();
        if !check.passed {
            failures.push((seed, check.observed_epsilon_norm, check.bound));
        }
    }
    assert!(failures.is_empty(), "{} of 100 instances exceed the bound, first: {:?}", failures.len(), failures.first());
}

#[test]
fn large_noise_is_mostly_not_applicable() {
    let cfg = SolverConfig::default();
    let mut r = rng(22);
    let mut not_applicable = 0;
    for _ in 0..100 {
        let (x, s, _) = noisy(5, 2.0, &mut r);
        match verify_epsilon_bound(&x, &s.to_projective(), 1.0, &cfg) {
            Err(RankError::NotApplicable { .. }) | Err(RankError::DegenerateDenominator { .. }) => {
                not_applicable += 1
            }
            Ok(_) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(not_applicable > 50, "only {not_applicable} of 100 not applicable");
}

#[test]
fn bound_shrinks_quadratically_when_sigma_halves() {
    let mut r = rng(23);
    for _ in 0..20 {
        let (_, s, e) = noisy(5, 0.0, &mut r);
        let p = s.to_projective();
        let coarse = build_report(&instance(&s, &e, 0.004), &p, 1.0).unwrap().epsilon_bound;
        let fine = build_report(&instance(&s, &e, 0.002), &p, 1.0).unwrap().epsilon_bound;
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "bound ratio {ratio}");
    }
}

#[test]
fn xi_is_invariant_under_joint_rescaling() {
    let mut r = rng(24);
    let (x, s, e) = noisy(4, 0.1, &mut r);
    let with_s = build_report(&x, &s.to_projective(), 1.0).unwrap();
    let flat = instance(&AdditiveScore::zeros(4), &e, 0.1);
    let without = build_report(&flat, &AdditiveScore::zeros(4).to_projective(), 1.0).unwrap();
    assert!(sup_diff(with_s.centered.as_slice(), without.centered.as_slice()) < 1e-12);
    assert!((with_s.rho - without.rho).abs() < 1e-12);
}
