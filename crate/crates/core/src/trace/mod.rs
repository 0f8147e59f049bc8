//! Per-token probability traces and the JSONL interchange format.
//!
//! A trace holds one model's teacher-forced next-token probabilities for one
//! sample. Position `i` of `next_token_probs` is the probability the model
//! assigned to `token_ids[i + 1]` given `token_ids[..=i]`, so a trace over
//! `L + 1` tokens carries `L` probabilities.

mod io;
mod join;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{
    parse_trace_file, read_labels, read_texts, write_labels, write_texts, TraceError, TraceReader,
    TraceWriter,
};
pub use join::{join_samples, JoinError, JoinOutcome, JoinSummary};

/// Only schema version understood by this crate.
pub const SCHEMA_VERSION: &str = "1";

/// Probabilities in `(1, 1 + PROB_CLAMP_SLACK]` are clamped to 1.
pub const PROB_CLAMP_SLACK: f64 = 1e-9;

/// Floor applied before taking the log of a probability.
pub const LOG_PROB_FLOOR: f64 = 1e-12;

/// `ln(max(p, LOG_PROB_FLOOR))`.
#[inline]
pub fn floored_ln(p: f64) -> f64 {
    p.max(LOG_PROB_FLOOR).ln()
}

/// Which text a trace was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Lowercase,
    Augmented(u32),
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Original => f.write_str("original"),
            Variant::Lowercase => f.write_str("lowercase"),
            Variant::Augmented(i) => write!(f, "augmented({i})"),
        }
    }
}

/// Ground-truth membership of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Member,
    Nonmember,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Member => "member",
            Label::Nonmember => "nonmember",
            Label::Unknown => "unknown",
        }
    }

    /// `Some(true)` for members, `Some(false)` for nonmembers.
    pub fn is_member(self) -> Option<bool> {
        match self {
            Label::Member => Some(true),
            Label::Nonmember => Some(false),
            Label::Unknown => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "member" => Ok(Label::Member),
            "nonmember" => Ok(Label::Nonmember),
            "unknown" | "" => Ok(Label::Unknown),
            other => Err(format!("unknown label '{other}'")),
        }
    }
}

/// First line of every trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFileHeader {
    pub schema_version: String,
    pub tokenizer_id: String,
    pub model_id: String,
    pub max_length: u64,
}

impl TraceFileHeader {
    pub fn new(tokenizer_id: impl Into<String>, model_id: impl Into<String>, max_length: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            tokenizer_id: tokenizer_id.into(),
            model_id: model_id.into(),
            max_length,
        }
    }
}

/// Validation failures for a single trace, independent of file position.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceValidationError {
    #[error("sample '{sample_id}': {probs} probabilities for {tokens} tokens (expected tokens - 1)")]
    LengthMismatch {
        sample_id: String,
        tokens: usize,
        probs: usize,
    },
    #[error("sample '{sample_id}': probability {value} at position {position} is outside [0, 1]")]
    ProbabilityOutOfRange {
        sample_id: String,
        position: usize,
        value: f64,
    },
}

/// One model's next-token probabilities over one encoded text.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenTrace {
    pub sample_id: String,
    pub model_id: String,
    pub variant: Variant,
    pub token_ids: Vec<u32>,
    pub next_token_probs: Vec<f64>,
}

impl TokenTrace {
    /// Builds a trace, clamping near-one probabilities and checking invariants.
    pub fn new(
        sample_id: impl Into<String>,
        model_id: impl Into<String>,
        variant: Variant,
        token_ids: Vec<u32>,
        next_token_probs: Vec<f64>,
    ) -> Result<Self, TraceValidationError> {
        let mut trace = Self {
            sample_id: sample_id.into(),
            model_id: model_id.into(),
            variant,
            token_ids,
            next_token_probs,
        };
        trace.validate_and_clamp()?;
        Ok(trace)
    }

    /// Number of scored positions, `L`.
    pub fn len(&self) -> usize {
        self.next_token_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next_token_probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.next_token_probs
    }

    /// Floored natural-log probabilities.
    pub fn log_probs(&self) -> impl Iterator<Item = f64> + '_ {
        self.next_token_probs.iter().map(|&p| floored_ln(p))
    }

    pub(crate) fn validate_and_clamp(&mut self) -> Result<(), TraceValidationError> {
        let tokens = self.token_ids.len();
        let probs = self.next_token_probs.len();
        let length_ok = if tokens <= 1 {
            probs == 0
        } else {
            probs == tokens - 1
        };
        if !length_ok {
            return Err(TraceValidationError::LengthMismatch {
                sample_id: self.sample_id.clone(),
                tokens,
                probs,
            });
        }
        for (position, p) in self.next_token_probs.iter_mut().enumerate() {
            // NaN fails both comparisons and lands in the error arm.
            if *p >= 0.0 && *p <= 1.0 {
                continue;
            }
            if *p > 1.0 && *p <= 1.0 + PROB_CLAMP_SLACK {
                *p = 1.0;
                continue;
            }
            return Err(TraceValidationError::ProbabilityOutOfRange {
                sample_id: self.sample_id.clone(),
                position,
                value: *p,
            });
        }
        Ok(())
    }
}

/// A sample's target and reference traces over one shared token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub sample_id: String,
    pub label: Label,
    pub target_trace: TokenTrace,
    pub reference_trace: TokenTrace,
    /// Extra traces keyed by `(model_id, variant)`, used by Lowercase and PAC.
    pub variant_traces: BTreeMap<(String, Variant), TokenTrace>,
}

impl SampleRecord {
    /// Joins a target and reference trace, enforcing the shared-tokenizer invariant.
    pub fn new(
        label: Label,
        target_trace: TokenTrace,
        reference_trace: TokenTrace,
    ) -> Result<Self, JoinError> {
        if target_trace.sample_id != reference_trace.sample_id {
            return Err(JoinError::SampleIdMismatch {
                target: target_trace.sample_id,
                reference: reference_trace.sample_id,
            });
        }
        if target_trace.token_ids != reference_trace.token_ids {
            return Err(JoinError::TokenMismatch {
                sample_id: target_trace.sample_id,
            });
        }
        Ok(Self {
            sample_id: target_trace.sample_id.clone(),
            label,
            target_trace,
            reference_trace,
            variant_traces: BTreeMap::new(),
        })
    }

    /// Number of scored positions shared by target and reference.
    pub fn len(&self) -> usize {
        self.target_trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_trace.is_empty()
    }

    pub fn target_probs(&self) -> &[f64] {
        self.target_trace.probs()
    }

    pub fn reference_probs(&self) -> &[f64] {
        self.reference_trace.probs()
    }

    /// Attaches a variant trace; an existing entry for the same key is replaced.
    pub fn attach_variant(&mut self, trace: TokenTrace) {
        self.variant_traces
            .insert((trace.model_id.clone(), trace.variant), trace);
    }

    pub fn variant(&self, model_id: &str, variant: Variant) -> Option<&TokenTrace> {
        self.variant_traces.get(&(model_id.to_string(), variant))
    }

    /// Variant trace of the target model.
    pub fn target_variant(&self, variant: Variant) -> Option<&TokenTrace> {
        self.variant(&self.target_trace.model_id, variant)
    }
}
