use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use thiserror::Error;

use super::{Label, SampleRecord, TokenTrace, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error("duplicate sample_id '{sample_id}' ({variant}) in {input} input")]
    DuplicateId {
        input: &'static str,
        sample_id: String,
        variant: Variant,
    },
    #[error("sample '{sample_id}': target and reference token_ids differ (tokenizers must match)")]
    TokenMismatch { sample_id: String },
    #[error("sample ids differ: target '{target}', reference '{reference}'")]
    SampleIdMismatch { target: String, reference: String },
}

/// Everything that did not make it into a record.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JoinSummary {
    pub joined: usize,
    /// Ids present only in the target input.
    pub unmatched_target: Vec<String>,
    /// Ids present only in the reference input.
    pub unmatched_reference: Vec<String>,
    pub token_mismatches: Vec<String>,
    /// Variant traces whose sample id has no joined record.
    pub orphan_variants: Vec<(String, Variant)>,
}

impl JoinSummary {
    pub fn is_clean(&self) -> bool {
        self.issue_count() == 0
    }

    pub fn issue_count(&self) -> usize {
        self.unmatched_target.len()
            + self.unmatched_reference.len()
            + self.token_mismatches.len()
            + self.orphan_variants.len()
    }

    /// Share of distinct sample ids that failed to join.
    pub fn issue_fraction(&self) -> f64 {
        let failed =
            self.unmatched_target.len() + self.unmatched_reference.len() + self.token_mismatches.len();
        let total = failed + self.joined;
        if total == 0 {
            0.0
        } else {
            failed as f64 / total as f64
        }
    }
}

impl std::fmt::Display for JoinSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "joined {} samples", self.joined)?;
        if !self.unmatched_target.is_empty() {
            write!(
                f,
                "; {} only in target: {:?}",
                self.unmatched_target.len(),
                self.unmatched_target
            )?;
        }
        if !self.unmatched_reference.is_empty() {
            write!(
                f,
                "; {} only in reference: {:?}",
                self.unmatched_reference.len(),
                self.unmatched_reference
            )?;
        }
        if !self.token_mismatches.is_empty() {
            write!(
                f,
                "; {} token mismatches: {:?}",
                self.token_mismatches.len(),
                self.token_mismatches
            )?;
        }
        if !self.orphan_variants.is_empty() {
            write!(f, "; {} orphan variant traces", self.orphan_variants.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct JoinOutcome {
    /// Sorted by sample id.
    pub records: Vec<SampleRecord>,
    pub summary: JoinSummary,
}

impl JoinOutcome {
    /// Attaches variant traces (lowercase, augmented, or other models) to
    /// their records. Traces without a matching record land in the summary.
    pub fn attach_variants<I>(&mut self, traces: I) -> Result<(), JoinError>
    where
        I: IntoIterator<Item = TokenTrace>,
    {
        let positions: BTreeMap<String, usize> = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.sample_id.clone(), i))
            .collect();
        for trace in traces {
            match positions.get(&trace.sample_id) {
                Some(&i) => {
                    let record = &mut self.records[i];
                    let key = (trace.model_id.clone(), trace.variant);
                    if record.variant_traces.contains_key(&key) {
                        return Err(JoinError::DuplicateId {
                            input: "variant",
                            sample_id: trace.sample_id,
                            variant: trace.variant,
                        });
                    }
                    record.variant_traces.insert(key, trace);
                }
                None => self
                    .summary
                    .orphan_variants
                    .push((trace.sample_id, trace.variant)),
            }
        }
        self.summary.orphan_variants.sort();
        Ok(())
    }
}

fn index_by_id(
    input: &'static str,
    traces: impl IntoIterator<Item = TokenTrace>,
    variants: &mut Vec<TokenTrace>,
) -> Result<BTreeMap<String, TokenTrace>, JoinError> {
    let mut originals = BTreeMap::new();
    for trace in traces {
        if trace.variant != Variant::Original {
            variants.push(trace);
            continue;
        }
        match originals.entry(trace.sample_id.clone()) {
            Entry::Occupied(_) => {
                return Err(JoinError::DuplicateId {
                    input,
                    sample_id: trace.sample_id,
                    variant: Variant::Original,
                })
            }
            Entry::Vacant(slot) => {
                slot.insert(trace);
            }
        }
    }
    Ok(originals)
}

/// Pairs target and reference traces by sample id and attaches labels.
///
/// Original-variant traces form the records; non-original traces found in
/// either input are attached as variant traces. Ids without a counterpart and
/// token-sequence disagreements are collected in the summary. Records are
/// returned sorted by sample id, so input order never matters.
pub fn join_samples<T, R>(
    target: T,
    reference: R,
    labels: &BTreeMap<String, Label>,
) -> Result<JoinOutcome, JoinError>
where
    T: IntoIterator<Item = TokenTrace>,
    R: IntoIterator<Item = TokenTrace>,
{
    let mut variants = Vec::new();
    let mut targets = index_by_id("target", target, &mut variants)?;
    let references = index_by_id("reference", reference, &mut variants)?;

    let mut outcome = JoinOutcome::default();
    for (id, reference_trace) in references {
        let Some(target_trace) = targets.remove(&id) else {
            outcome.summary.unmatched_reference.push(id);
            continue;
        };
        let label = labels.get(&id).copied().unwrap_or(Label::Unknown);
        match SampleRecord::new(label, target_trace, reference_trace) {
            Ok(record) => outcome.records.push(record),
            Err(_) => outcome.summary.token_mismatches.push(id),
        }
    }
    outcome.summary.unmatched_target = targets.into_keys().collect();
    outcome.summary.joined = outcome.records.len();

    // Deterministic attachment order regardless of input order.
    variants
        .sort_by(|a, b| (&a.sample_id, &a.model_id, a.variant).cmp(&(&b.sample_id, &b.model_id, b.variant)));
    outcome.attach_variants(variants)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(id: &str, model: &str, tokens: &[u32]) -> TokenTrace {
        let probs = vec![0.5; tokens.len().saturating_sub(1)];
        TokenTrace::new(id, model, Variant::Original, tokens.to_vec(), probs).unwrap()
    }

    #[test]
    fn matching_inputs_join_fully() {
        let t = ["a", "b", "c"].map(|id| trace(id, "ft", &[1, 2, 3]));
        let r = ["c", "a", "b"].map(|id| trace(id, "base", &[1, 2, 3]));
        let labels = BTreeMap::from([("a".to_string(), Label::Member)]);
        let out = join_samples(t, r, &labels).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.summary.is_clean());
        assert_eq!(out.records[0].label, Label::Member);
        assert_eq!(out.records[1].label, Label::Unknown);
        let ids: Vec<_> = out.records.iter().map(|r| r.sample_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn token_mismatch_is_collected_per_sample() {
        let t = vec![trace("a", "ft", &[1, 2]), trace("b", "ft", &[1, 2])];
        let r = vec![trace("a", "base", &[1, 2]), trace("b", "base", &[1, 9])];
        let out = join_samples(t, r, &BTreeMap::new()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.summary.token_mismatches, vec!["b".to_string()]);
        assert!(!out.summary.is_clean());
    }

    #[test]
    fn unmatched_ids_are_reported() {
        let t = vec![trace("a", "ft", &[1, 2]), trace("b", "ft", &[1, 2])];
        let r = vec![trace("a", "base", &[1, 2])];
        let out = join_samples(t, r, &BTreeMap::new()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.summary.unmatched_target, vec!["b".to_string()]);
        assert!((out.summary.issue_fraction() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn duplicate_id_is_an_error() {
        let t = vec![trace("a", "ft", &[1, 2]), trace("a", "ft", &[1, 2])];
        let err = join_samples(t, vec![], &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, JoinError::DuplicateId { input: "target", .. }));
    }

    #[test]
    fn non_original_traces_become_variants() {
        let lower = TokenTrace::new(
            "a",
            "ft",
            Variant::Lowercase,
            vec![4, 5, 6, 7],
            vec![0.1, 0.2, 0.3],
        )
        .unwrap();
        let stray = TokenTrace::new("zzz", "ft", Variant::Lowercase, vec![], vec![]).unwrap();
        let t = vec![trace("a", "ft", &[1, 2]), lower.clone(), stray];
        let r = vec![trace("a", "base", &[1, 2])];
        let out = join_samples(t, r, &BTreeMap::new()).unwrap();
        assert_eq!(out.records[0].target_variant(Variant::Lowercase), Some(&lower));
        assert_eq!(
            out.summary.orphan_variants,
            vec![("zzz".to_string(), Variant::Lowercase)]
        );
    }
}
