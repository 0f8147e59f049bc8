//! Membership-inference auditing over per-token probability traces.
//!
//! The crate scores text samples for training-set membership from the
//! teacher-forced next-token probabilities of a fine-tuned target model and
//! a reference model. It contains:
//!
//! - [`trace`]: the trace data model, JSONL reader/writer and target/reference join;
//! - [`attacks`]: the hard-token attack (HT-MIA) plus Loss, Ratio, Zlib,
//!   Min-K%++, Lowercase and PAC baselines;
//! - [`metrics`]: ROC, AUC, TPR at fixed FPR, reports and parameter sweeps;
//! - [`theory`]: Monte Carlo checks of the concentration bounds, subset
//!   enumeration, a synthetic trace generator and the DP-SGD step;
//! - [`cli`]: the `htmia` command-line driver.

pub mod attacks;
pub mod cli;
pub mod metrics;
pub mod provenance;
pub mod theory;
pub mod trace;
