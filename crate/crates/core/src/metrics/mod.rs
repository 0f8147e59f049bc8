//! ROC analysis of labeled attack scores.

mod report;
mod roc;
mod sweep;

use thiserror::Error;

pub use report::{evaluate, write_eval_csv, write_roc_csv, AttackEval, EvalReport, TprAtFpr};
pub use roc::{auc, mann_whitney_auc, roc, tpr_at_fpr, OperatingPoint, RocCurve, RocPoint};
pub use sweep::{sweep, write_sweep_csv, SweepGrid, SweepPoint, SweepRow};

/// Target false-positive rates reported by default.
pub const DEFAULT_FPR_TARGETS: [f64; 2] = [0.1, 0.01];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no {missing} samples among the labeled scores; both classes are required")]
    MissingClass { missing: &'static str },
    #[error("need at least {required} samples per class, got {members} members and {nonmembers} nonmembers")]
    TooFewSamples {
        required: usize,
        members: usize,
        nonmembers: usize,
    },
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
    #[error("target FPR {0} must lie in (0, 1)")]
    InvalidFprTarget(f64),
    #[error("trapezoidal AUC {trapezoid} disagrees with rank-sum AUC {rank_sum}")]
    AucSelfCheck { trapezoid: f64, rank_sum: f64 },
    #[error(transparent)]
    Attack(#[from] crate::attacks::AttackError),
}
