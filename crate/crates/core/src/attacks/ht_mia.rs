use std::cmp::Ordering;

use super::{AttackKind, AttackScore, SelectionConfig, SelectionStrategy};
use crate::trace::SampleRecord;

/// Score returned when no token can be selected.
const EMPTY_SELECTION_SCORE: f64 = 0.5;

/// Adaptive hard-token count: `min(L, min(max_k, max(min_k, floor(alpha * L))))`.
pub fn select_k(len: usize, cfg: &SelectionConfig) -> usize {
    let proportional = (cfg.alpha * len as f64).floor() as usize;
    cfg.max_k.min(cfg.min_k.max(proportional)).min(len)
}

fn by_value_then_index(probs: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| probs[a].total_cmp(&probs[b]).then(a.cmp(&b))
}

/// Positions of the `k` smallest probabilities, ties broken by position.
///
/// The returned indices are in ascending (probability, position) order.
pub fn hard_token_indices(probs: &[f64], k: usize) -> Vec<usize> {
    let k = k.min(probs.len());
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    if k == 0 {
        return Vec::new();
    }
    let cmp = by_value_then_index(probs);
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, &cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(&cmp);
    idx
}

/// Fraction of `indices` where the target beats the reference by more than
/// `margin`. An empty index set scores 0.5.
pub fn fraction_improved(target: &[f64], reference: &[f64], indices: &[usize], margin: f64) -> f64 {
    if indices.is_empty() {
        return EMPTY_SELECTION_SCORE;
    }
    let improved = indices
        .iter()
        .filter(|&&i| target[i] - reference[i] > margin)
        .count();
    improved as f64 / indices.len() as f64
}

/// HT-MIA score: share of the `K` hardest positions where the target model
/// assigns strictly higher probability than the reference model.
pub fn ht_mia_score(rec: &SampleRecord, cfg: &SelectionConfig) -> AttackScore {
    ht_mia_score_with_margin(rec, cfg, 0.0)
}

/// HT-MIA with the per-token indicator `1{delta > margin}`; `margin = 0`
/// is the standard attack.
pub fn ht_mia_score_with_margin(rec: &SampleRecord, cfg: &SelectionConfig, margin: f64) -> AttackScore {
    let target = rec.target_probs();
    let reference = rec.reference_probs();
    let k = select_k(target.len(), cfg);
    if k == 0 {
        return AttackScore::degenerate(&rec.sample_id, AttackKind::HtMia, EMPTY_SELECTION_SCORE);
    }
    let ranking = match cfg.strategy {
        SelectionStrategy::ByTarget => target,
        SelectionStrategy::ByReference => reference,
    };
    let selected = hard_token_indices(ranking, k);
    let score = fraction_improved(target, reference, &selected, margin);
    AttackScore::new(&rec.sample_id, AttackKind::HtMia, score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{Label, TokenTrace, Variant};
    use proptest::prelude::*;

    fn record(target: &[f64], reference: &[f64]) -> SampleRecord {
        let tokens: Vec<u32> = (0..=target.len() as u32).collect();
        let t = TokenTrace::new("s", "f", Variant::Original, tokens.clone(), target.to_vec()).unwrap();
        let r = TokenTrace::new("s", "b", Variant::Original, tokens, reference.to_vec()).unwrap();
        SampleRecord::new(Label::Unknown, t, r).unwrap()
    }

    fn cfg(min_k: usize, max_k: usize, alpha: f64) -> SelectionConfig {
        SelectionConfig::new(min_k, max_k, alpha, SelectionStrategy::ByTarget).unwrap()
    }

    /// Naive version: stable full sort, explicit loop.
    fn brute_force(target: &[f64], reference: &[f64], cfg: &SelectionConfig) -> f64 {
        let len = target.len();
        let mut k = ((cfg.alpha * len as f64).floor() as usize).max(cfg.min_k);
        if k > cfg.max_k {
            k = cfg.max_k;
        }
        if k > len {
            k = len;
        }
        if k == 0 {
            return 0.5;
        }
        let ranking = match cfg.strategy {
            SelectionStrategy::ByTarget => target,
            SelectionStrategy::ByReference => reference,
        };
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| ranking[a].partial_cmp(&ranking[b]).unwrap());
        let mut hits = 0usize;
        for &i in &order[..k] {
            if target[i] - reference[i] > 0.0 {
                hits += 1;
            }
        }
        hits as f64 / k as f64
    }

    #[test]
    fn select_k_cases() {
        assert_eq!(select_k(200, &cfg(5, 50, 0.1)), 20);
        assert_eq!(select_k(10, &cfg(5, 50, 0.1)), 5);
        assert_eq!(select_k(3, &cfg(5, 50, 0.1)), 3);
        assert_eq!(select_k(0, &cfg(5, 50, 0.1)), 0);
        assert_eq!(select_k(10_000, &cfg(5, 50, 0.1)), 50);
    }

    #[test]
    fn worked_example() {
        let t = [0.1, 0.9, 0.2, 0.8, 0.05];
        let b = [0.2, 0.5, 0.1, 0.9, 0.01];
        let c = cfg(1, 3, 0.5);
        assert_eq!(select_k(5, &c), 2);
        assert_eq!(hard_token_indices(&t, 2), vec![4, 0]);
        let s = ht_mia_score(&record(&t, &b), &c);
        assert_eq!(s.score, 0.5);
        assert_eq!(s.score, brute_force(&t, &b, &c));
    }

    #[test]
    fn empty_trace_scores_half() {
        let s = ht_mia_score(&record(&[], &[]), &SelectionConfig::default());
        assert_eq!(s.score, 0.5);
        assert!(s.degenerate);
    }

    #[test]
    fn all_improved_and_identical() {
        let t = [0.3, 0.6, 0.9, 0.2];
        let b = [0.1, 0.5, 0.8, 0.1];
        for c in [cfg(1, 1, 0.1), cfg(2, 3, 0.5), cfg(5, 100, 1.0)] {
            assert_eq!(ht_mia_score(&record(&t, &b), &c).score, 1.0);
            assert_eq!(ht_mia_score(&record(&t, &t), &c).score, 0.0);
        }
    }

    #[test]
    fn ties_resolve_by_position() {
        assert_eq!(hard_token_indices(&[0.5, 0.1, 0.5, 0.1, 0.5], 3), vec![1, 3, 0]);
    }

    #[test]
    fn reference_strategy_ranks_by_reference() {
        let t = [0.1, 0.9, 0.5];
        let b = [0.9, 0.05, 0.4];
        let mut c = cfg(1, 1, 0.1);
        assert_eq!(ht_mia_score(&record(&t, &b), &c).score, 0.0);
        c.strategy = SelectionStrategy::ByReference;
        assert_eq!(ht_mia_score(&record(&t, &b), &c).score, 1.0);
    }

    #[test]
    fn margin_tightens_indicator() {
        let t = [0.10, 0.20];
        let b = [0.05, 0.19];
        let c = cfg(2, 2, 1.0);
        assert_eq!(ht_mia_score_with_margin(&record(&t, &b), &c, 0.0).score, 1.0);
        assert_eq!(ht_mia_score_with_margin(&record(&t, &b), &c, 0.02).score, 0.5);
        assert_eq!(ht_mia_score_with_margin(&record(&t, &b), &c, 1.0).score, 0.0);
    }

    fn probs_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        // Coarse grid so ties are common.
        (0usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec((0u32..=20).prop_map(|v| v as f64 / 20.0), n),
                prop::collection::vec((0u32..=20).prop_map(|v| v as f64 / 20.0), n),
            )
        })
    }

    fn any_cfg() -> impl Strategy<Value = SelectionConfig> {
        (1usize..20, 0usize..40, 1u32..=20, any::<bool>()).prop_map(|(min_k, extra, a, by_ref)| {
            SelectionConfig {
                min_k,
                max_k: min_k + extra,
                alpha: a as f64 / 20.0,
                strategy: if by_ref {
                    SelectionStrategy::ByReference
                } else {
                    SelectionStrategy::ByTarget
                },
            }
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_stays_in_unit_interval((t, b) in probs_pair(), c in any_cfg()) {
            let s = ht_mia_score(&record(&t, &b), &c).score;
            prop_assert_eq!(s, brute_force(&t, &b, &c));
            prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn complement_on_fixed_index_set(
            (t, b) in probs_pair(),
            picks in prop::collection::vec(any::<prop::sample::Index>(), 1..20),
        ) {
            prop_assume!(!t.is_empty());
            let mut idx: Vec<usize> = picks.iter().map(|p| p.index(t.len())).collect();
            idx.sort_unstable();
            idx.dedup();
            prop_assume!(idx.iter().all(|&i| t[i] != b[i]));
            let forward = fraction_improved(&t, &b, &idx, 0.0);
            let backward = fraction_improved(&b, &t, &idx, 0.0);
            prop_assert!((forward + backward - 1.0).abs() < 1e-12);
        }

        #[test]
        fn flipping_one_selected_delta_adds_one_over_k((t, b) in probs_pair(), c in any_cfg(), pick in any::<prop::sample::Index>()) {
            prop_assume!(!t.is_empty());
            let k = select_k(t.len(), &c);
            let idx = hard_token_indices(&t, k);
            let i = idx[pick.index(idx.len())];
            prop_assume!(t[i] < b[i]);
            let before = fraction_improved(&t, &b, &idx, 0.0);
            let mut raised = t.clone();
            raised[i] = b[i] + 1e-3;
            let after = fraction_improved(&raised, &b, &idx, 0.0);
            prop_assert!((after - before - 1.0 / k as f64).abs() < 1e-12);
        }
    }
}
