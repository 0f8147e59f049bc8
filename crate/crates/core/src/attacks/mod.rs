//! Membership scores computed from joined traces.
//!
//! Every attack is oriented so that a higher score means "more member-like";
//! loss-style quantities are negated here, at the attack boundary.

mod baselines;
mod batch;
mod ht_mia;
mod score_csv;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baselines::{
    loss_score, lowercase_score, mean_nll, min_k_pp_score, pac_score, perplexity, polarized_distance,
    ratio_score, zlib_entropy, zlib_score,
};
pub use batch::{score_records, AttackParams};
pub use ht_mia::{fraction_improved, hard_token_indices, ht_mia_score, ht_mia_score_with_margin, select_k};
pub use score_csv::{read_scores, write_scores, ScoreRow};

use crate::trace::Variant;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample '{sample_id}': missing {variant} trace for model '{model_id}'")]
    MissingVariant {
        sample_id: String,
        model_id: String,
        variant: Variant,
    },
    #[error("sample '{sample_id}': no raw text in the sidecar file")]
    MissingText { sample_id: String },
}

/// Which token ranking drives hard-token selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    /// Rank positions by the target (fine-tuned) model's probability.
    ByTarget,
    /// Rank positions by the reference model's probability.
    ByReference,
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionStrategy::ByTarget => "by_target",
            SelectionStrategy::ByReference => "by_reference",
        })
    }
}

impl FromStr for SelectionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "by_target" => Ok(Self::ByTarget),
            "by_reference" => Ok(Self::ByReference),
            other => Err(format!("unknown selection strategy '{other}'")),
        }
    }
}

/// Parameters of the adaptive hard-token count `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub min_k: usize,
    pub max_k: usize,
    pub alpha: f64,
    pub strategy: SelectionStrategy,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            min_k: 5,
            max_k: 100,
            alpha: 0.2,
            strategy: SelectionStrategy::ByTarget,
        }
    }
}

impl SelectionConfig {
    pub fn new(
        min_k: usize,
        max_k: usize,
        alpha: f64,
        strategy: SelectionStrategy,
    ) -> Result<Self, AttackError> {
        let cfg = Self {
            min_k,
            max_k,
            alpha,
            strategy,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        if self.min_k == 0 {
            return Err(AttackError::InvalidParameter("min_k must be >= 1".into()));
        }
        if self.max_k < self.min_k {
            return Err(AttackError::InvalidParameter(format!(
                "max_k ({}) must be >= min_k ({})",
                self.max_k, self.min_k
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(AttackError::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    HtMia,
    Loss,
    Ratio,
    Zlib,
    MinKPp,
    Lowercase,
    Pac,
}

impl AttackKind {
    pub const ALL: [AttackKind; 7] = [
        AttackKind::HtMia,
        AttackKind::Loss,
        AttackKind::Ratio,
        AttackKind::Zlib,
        AttackKind::MinKPp,
        AttackKind::Lowercase,
        AttackKind::Pac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::HtMia => "ht_mia",
            AttackKind::Loss => "loss",
            AttackKind::Ratio => "ratio",
            AttackKind::Zlib => "zlib",
            AttackKind::MinKPp => "min_k_pp",
            AttackKind::Lowercase => "lowercase",
            AttackKind::Pac => "pac",
        }
    }

    /// Human-facing name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            AttackKind::HtMia => "HT-MIA",
            AttackKind::Loss => "Loss",
            AttackKind::Ratio => "Ratio",
            AttackKind::Zlib => "Zlib",
            AttackKind::MinKPp => "Min-K++",
            AttackKind::Lowercase => "Lowercase",
            AttackKind::Pac => "PAC",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown attack '{s}'"))
    }
}

/// One attack's score for one sample. Higher is more member-like.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackScore {
    pub sample_id: String,
    pub attack: AttackKind,
    pub score: f64,
    /// Set when the input was degenerate and `score` is a sentinel.
    pub degenerate: bool,
}

impl AttackScore {
    pub(crate) fn new(sample_id: &str, attack: AttackKind, score: f64) -> Self {
        debug_assert!(score.is_finite(), "{attack} produced non-finite score {score}");
        Self {
            sample_id: sample_id.to_string(),
            attack,
            score,
            degenerate: false,
        }
    }

    pub(crate) fn degenerate(sample_id: &str, attack: AttackKind, score: f64) -> Self {
        Self {
            degenerate: true,
            ..Self::new(sample_id, attack, score)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Member,
    Nonmember,
}

/// Threshold rule: member iff `score >= tau`.
pub fn classify(score: f64, tau: f64) -> Decision {
    if score >= tau {
        Decision::Member
    } else {
        Decision::Nonmember
    }
}
