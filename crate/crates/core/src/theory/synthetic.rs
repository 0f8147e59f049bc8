use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, seeded};
use super::TheoryError;
use crate::trace::{Label, TokenTrace, TraceFileHeader, TraceWriter, Variant};

/// Recipe for synthetic target/reference traces with planted hard-token uplift.
///
/// Each position is either easy or hard. The reference probability is drawn
/// uniformly from the matching range; the target copies it, except that at a
/// hard position it is raised by `uplift_magnitude` with probability
/// `member_uplift` (members) or `nonmember_uplift` (nonmembers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticTraceSpec {
    pub n_per_class: usize,
    /// Inclusive range of the number of scored positions `L`.
    pub len_range: (usize, usize),
    pub easy_prob_range: (f64, f64),
    pub hard_prob_range: (f64, f64),
    pub hard_fraction: f64,
    pub member_uplift: f64,
    pub nonmember_uplift: f64,
    pub uplift_magnitude: f64,
    /// Probability that a position repeats the previous position's
    /// easy/hard state; 0 gives independent positions.
    pub correlation: f64,
    pub vocab_size: u32,
    pub seed: u64,
    pub tokenizer_id: String,
    pub target_model_id: String,
    pub reference_model_id: String,
}

impl Default for SyntheticTraceSpec {
    fn default() -> Self {
        Self {
            n_per_class: 1000,
            len_range: (200, 400),
            easy_prob_range: (0.6, 0.99),
            hard_prob_range: (0.001, 0.1),
            hard_fraction: 0.25,
            member_uplift: 0.91,
            nonmember_uplift: 0.70,
            uplift_magnitude: 0.05,
            correlation: 0.0,
            vocab_size: 50_257,
            seed: 0,
            tokenizer_id: "synthetic".into(),
            target_model_id: "synthetic-target".into(),
            reference_model_id: "synthetic-reference".into(),
        }
    }
}

impl SyntheticTraceSpec {
    pub fn validate(&self) -> Result<(), TheoryError> {
        let bad = |msg: String| Err(TheoryError::InvalidParameter(msg));
        let open_unit = |p: f64| p > 0.0 && p < 1.0;
        let closed_unit = |p: f64| (0.0..=1.0).contains(&p);
        if self.n_per_class == 0 {
            return bad("n_per_class must be >= 1".into());
        }
        if self.len_range.0 > self.len_range.1 {
            return bad(format!("len_range {:?} is empty", self.len_range));
        }
        for (name, (lo, hi)) in [
            ("easy_prob_range", self.easy_prob_range),
            ("hard_prob_range", self.hard_prob_range),
        ] {
            if !(open_unit(lo) && open_unit(hi) && lo <= hi) {
                return bad(format!(
                    "{name} ({lo}, {hi}) must be an ordered range inside (0, 1)"
                ));
            }
        }
        if !open_unit(self.hard_fraction) {
            return bad(format!("hard_fraction {} must lie in (0, 1)", self.hard_fraction));
        }
        for (name, p) in [
            ("member_uplift", self.member_uplift),
            ("nonmember_uplift", self.nonmember_uplift),
            ("correlation", self.correlation),
        ] {
            if !closed_unit(p) {
                return bad(format!("{name} {p} must lie in [0, 1]"));
            }
        }
        if !(self.uplift_magnitude > 0.0 && self.uplift_magnitude < 1.0) {
            return bad(format!(
                "uplift_magnitude {} must lie in (0, 1)",
                self.uplift_magnitude
            ));
        }
        if self.vocab_size == 0 {
            return bad("vocab_size must be >= 1".into());
        }
        Ok(())
    }

    fn max_length(&self) -> u64 {
        self.len_range.1 as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub target_header: TraceFileHeader,
    pub reference_header: TraceFileHeader,
    pub target: Vec<TokenTrace>,
    pub reference: Vec<TokenTrace>,
    pub labels: BTreeMap<String, Label>,
}

impl SyntheticDataset {
    pub fn write_target<W: Write>(&self, out: W) -> io::Result<()> {
        write_traces(out, &self.target_header, &self.target)
    }

    pub fn write_reference<W: Write>(&self, out: W) -> io::Result<()> {
        write_traces(out, &self.reference_header, &self.reference)
    }
}

fn write_traces<W: Write>(out: W, header: &TraceFileHeader, traces: &[TokenTrace]) -> io::Result<()> {
    let mut w = TraceWriter::new(out, header)?;
    for t in traces {
        w.write(t)?;
    }
    w.finish().map(|_| ())
}

fn sample_pair(spec: &SyntheticTraceSpec, id: &str, member: bool, seed: u64) -> (TokenTrace, TokenTrace) {
    let mut rng = seeded(seed);
    let len = rng.random_range(spec.len_range.0..=spec.len_range.1);
    let tokens: Vec<u32> = (0..=len).map(|_| rng.random_range(0..spec.vocab_size)).collect();
    let uplift = if member {
        spec.member_uplift
    } else {
        spec.nonmember_uplift
    };

    let mut reference = Vec::with_capacity(len);
    let mut target = Vec::with_capacity(len);
    let mut hard = false;
    for i in 0..len {
        hard = if i > 0 && rng.random_bool(spec.correlation) {
            hard
        } else {
            rng.random_bool(spec.hard_fraction)
        };
        let (lo, hi) = if hard {
            spec.hard_prob_range
        } else {
            spec.easy_prob_range
        };
        let p = rng.random_range(lo..=hi);
        let raised = hard && rng.random_bool(uplift);
        reference.push(p);
        target.push(if raised {
            (p + spec.uplift_magnitude).min(1.0)
        } else {
            p
        });
    }
    let t = TokenTrace::new(
        id,
        &spec.target_model_id,
        Variant::Original,
        tokens.clone(),
        target,
    )
    .expect("generated target probabilities are valid");
    let r = TokenTrace::new(id, &spec.reference_model_id, Variant::Original, tokens, reference)
        .expect("generated reference probabilities are valid");
    (t, r)
}

/// Generates `n_per_class` members and nonmembers. Deterministic in `spec.seed`;
/// sample `i` of each class draws from its own derived stream.
pub fn generate_synthetic(spec: &SyntheticTraceSpec) -> Result<SyntheticDataset, TheoryError> {
    spec.validate()?;
    let mut data = SyntheticDataset {
        target_header: TraceFileHeader::new(&spec.tokenizer_id, &spec.target_model_id, spec.max_length()),
        reference_header: TraceFileHeader::new(
            &spec.tokenizer_id,
            &spec.reference_model_id,
            spec.max_length(),
        ),
        target: Vec::with_capacity(2 * spec.n_per_class),
        reference: Vec::with_capacity(2 * spec.n_per_class),
        labels: BTreeMap::new(),
    };
    for (class, member, prefix) in [(0u64, true, "mem"), (1u64, false, "non")] {
        let class_seed = derive_seed(spec.seed, class);
        for i in 0..spec.n_per_class {
            let id = format!("{prefix}-{i:06}");
            let (t, r) = sample_pair(spec, &id, member, derive_seed(class_seed, i as u64));
            data.target.push(t);
            data.reference.push(r);
            data.labels
                .insert(id, if member { Label::Member } else { Label::Nonmember });
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{ht_mia_score, SelectionConfig, SelectionStrategy};
    use crate::metrics::{auc, roc};
    use crate::trace::{join_samples, parse_trace_file};

    fn scores(spec: &SyntheticTraceSpec) -> Vec<(f64, bool)> {
        scores_with(spec, &SelectionConfig::default())
    }

    fn scores_with(spec: &SyntheticTraceSpec, cfg: &SelectionConfig) -> Vec<(f64, bool)> {
        let data = generate_synthetic(spec).unwrap();
        let joined = join_samples(data.target, data.reference, &data.labels).unwrap();
        assert!(joined.summary.is_clean());
        joined
            .records
            .iter()
            .map(|r| (ht_mia_score(r, cfg).score, r.label.is_member().unwrap()))
            .collect()
    }

    #[test]
    fn deterministic_and_parseable() {
        let spec = SyntheticTraceSpec {
            n_per_class: 20,
            seed: 9,
            ..Default::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);

        let mut buf = Vec::new();
        a.write_target(&mut buf).unwrap();
        let (header, parsed) = parse_trace_file(&buf[..]).unwrap();
        assert_eq!(header, a.target_header);
        assert_eq!(parsed, a.target);
    }

    #[test]
    fn fully_separated_construction() {
        let spec = SyntheticTraceSpec {
            n_per_class: 50,
            len_range: (80, 120),
            hard_fraction: 0.9,
            member_uplift: 1.0,
            nonmember_uplift: 0.0,
            seed: 1,
            ..Default::default()
        };
        let s = scores(&spec);
        assert!(s.iter().filter(|x| x.1).all(|x| x.0 == 1.0));
        assert!(s.iter().filter(|x| !x.1).all(|x| x.0 == 0.0));
        assert_eq!(auc(&roc(&s).unwrap()), 1.0);
    }

    #[test]
    fn equal_uplift_gives_no_signal() {
        let spec = SyntheticTraceSpec {
            n_per_class: 1000,
            len_range: (30, 60),
            member_uplift: 0.8,
            nonmember_uplift: 0.8,
            seed: 2,
            ..Default::default()
        };
        let a = auc(&roc(&scores(&spec)).unwrap());
        assert!((a - 0.5).abs() < 0.04, "{a}");
    }

    #[test]
    fn class_means_track_uplift_rates() {
        let spec = SyntheticTraceSpec {
            n_per_class: 1000,
            len_range: (100, 200),
            hard_fraction: 0.4,
            seed: 3,
            ..Default::default()
        };
        let by_reference = SelectionConfig {
            strategy: SelectionStrategy::ByReference,
            ..Default::default()
        };
        let s = scores_with(&spec, &by_reference);
        let mean = |m: bool| {
            let v: Vec<f64> = s.iter().filter(|x| x.1 == m).map(|x| x.0).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((mean(true) - 0.91).abs() < 0.02, "{}", mean(true));
        assert!((mean(false) - 0.70).abs() < 0.02, "{}", mean(false));
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            SyntheticTraceSpec {
                n_per_class: 0,
                ..Default::default()
            },
            SyntheticTraceSpec {
                hard_fraction: 1.0,
                ..Default::default()
            },
            SyntheticTraceSpec {
                len_range: (5, 4),
                ..Default::default()
            },
            SyntheticTraceSpec {
                easy_prob_range: (0.9, 0.1),
                ..Default::default()
            },
            SyntheticTraceSpec {
                member_uplift: 1.5,
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(generate_synthetic(&spec).is_err());
        }
    }
}
