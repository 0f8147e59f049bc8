//! Executable checks of the score's statistical guarantees, a synthetic
//! trace generator, and the DP-SGD aggregation step.
//!
//! All stochastic routines take an explicit seed and draw from ChaCha8
//! (see [`rng`]), so results are reproducible across platforms.

mod dp_sgd;
mod hoeffding;
mod neyman_pearson;
pub mod rng;
mod selection;
mod synthetic;
mod validation;

use thiserror::Error;

pub use dp_sgd::{dp_sgd_step, DpSgdOutput, GradientBatch};
pub use hoeffding::{
    check_sample_complexity, hoeffding_bound, sample_complexity, simulate_errors, BernoulliWorld,
    ErrorSimulation, PowerCheck, MC_SLACK_SE,
};
pub use neyman_pearson::{binomial_pmf, verify_threshold_dominance, DominanceReport};
pub use selection::{monotone_instance, verify_selection_optimality, MAX_ENUMERATION_LEN};
pub use synthetic::{generate_synthetic, SyntheticDataset, SyntheticTraceSpec};
pub use validation::{run_theory_validation, HoeffdingCell, SelectionSummary, TheoryConfig, TheoryReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("threshold {tau} must lie strictly between p_non ({p_non}) and p_mem ({p_mem})")]
    ThresholdOutOfRange { tau: f64, p_non: f64, p_mem: f64 },
    #[error("subset enumeration refused for L = {len} (limit {MAX_ENUMERATION_LEN})")]
    TooManyPositions { len: usize },
    #[error("input violates the monotone coupling between probability and signal at positions {0} and {1}")]
    NotMonotone(usize, usize),
    #[error("gradient batch is empty")]
    EmptyBatch,
    #[error("gradient vectors have zero dimension")]
    ZeroDimension,
    #[error("gradient {index} has dimension {found}, expected {expected}")]
    RaggedBatch {
        index: usize,
        expected: usize,
        found: usize,
    },
}
