//! Pairwise-comparison ranking with the Perron family of maps.
//!
//! For a positive comparison matrix `X` and `k > 0`, the Perron family ranks
//! by `V_k(X) = v(X^(k))^(1/k)`, the `k`-th root of the principal eigenvector
//! of the `k`-th Hadamard power. Its log version acts on additive matrices,
//! `A -> (1/k) log v(exp(kA))`. The two ends of the family are HodgeRank
//! (`k -> 0`, row geometric means) and Tropical Rank (`k -> inf`, the max-plus
//! eigenvector of `log X`).
//!
//! | module | contents |
//! |--------|----------|
//! | [`domain`] | matrix and score types, exp/log bridges |
//! | [`perron`] | Perron pairs and the log-domain family map |
//! | [`hodge`] | HodgeRank and the least-squares projection |
//! | [`tropical`] | max cycle mean, Kleene star, tropical eigenvectors |
//! | [`perturbation`] | linear estimate of a perturbed Perron vector |
//! | [`fiber`] | fiber decomposition and prescribed-eigenpair sampling |
//! | [`recovery`] | Monte-Carlo score recovery over a k grid |
//! | [`io`] | CSV / JSON matrix files |
//!
//! ```
//! use perron_rank::{perron_family_score, AdditiveMatrix, KParameter, SolverConfig};
//!
//! let a = AdditiveMatrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
//! let s = perron_family_score(&a, KParameter::Finite(2.0), &SolverConfig::default()).unwrap();
//! assert!((s[0] - 0.5).abs() < 1e-12);
//! ```

pub mod domain;
pub mod error;
pub mod fiber;
pub mod hodge;
pub mod io;
pub mod perron;
pub mod perturbation;
pub mod recovery;
pub mod tropical;

pub use domain::{
    exp_scale_map, hadamard_power, is_strongly_transitive, log_map, normalize_projective,
    rank_one_additive, rank_one_of, AdditiveMatrix, AdditiveScore, AsAdditive, ComparisonMatrix,
    KParameter, Matrix, PositiveMatrix, ProjectiveScore,
};
pub use error::{RankError, Result};
pub use fiber::{
    fiber_decompose, kalman_sample, psi_map, sample_zero_fiber, zero_fiber_certificate,
    FiberCertificate, SimplexRows,
};
pub use hodge::{hodge_score_additive, hodge_score_multiplicative, l2_project_to_st};
pub use perron::{log_perron_score, perron_family_score, perron_pair, PerronPair, SolverConfig};
pub use perturbation::{build_report, spectral_norm, verify_epsilon_bound, PerturbationReport};
pub use recovery::{
    best_k, evaluate_objectives, generate_observation, k_sweep, score_independence_check,
    NoiseModel, Objective, SweepTable, TrialConfig,
};
pub use tropical::{kleene_star, max_cycle_mean, tropical_eigen, tropical_score, TropicalEigenData};
