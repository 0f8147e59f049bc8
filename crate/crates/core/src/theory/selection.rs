use rand::seq::SliceRandom;
use rand::Rng;

use super::TheoryError;
use crate::attacks::hard_token_indices;

/// Largest sequence length accepted by the exhaustive subset search.
pub const MAX_ENUMERATION_LEN: usize = 20;

fn check_monotone(pairs: &[(f64, f64)]) -> Result<(), TheoryError> {
    for i in 0..pairs.len() {
        for j in 0..pairs.len() {
            let (pi, mi) = pairs[i];
            let (pj, mj) = pairs[j];
            let violates = (pi < pj && mi < mj) || (pi == pj && mi != mj);
            if violates {
                return Err(TheoryError::NotMonotone(i, j));
            }
        }
    }
    Ok(())
}

/// Best `k`-subset sum of the signal magnitudes and the number of subsets
/// visited.
fn max_subset_sum(pairs: &[(f64, f64)], k: usize) -> (f64, u64) {
    let full: u64 = (1u64 << pairs.len()) - 1;
    let mut best = f64::NEG_INFINITY;
    let mut visited = 0;
    // Gosper's hack: visit every len-bit mask with exactly k ones.
    let mut mask: u64 = (1u64 << k) - 1;
    while mask <= full {
        let mut sum = 0.0;
        let mut bits = mask;
        while bits != 0 {
            sum += pairs[bits.trailing_zeros() as usize].1;
            bits &= bits - 1;
        }
        best = best.max(sum);
        visited += 1;
        let low = mask & mask.wrapping_neg();
        let ripple = mask + low;
        mask = (((ripple ^ mask) >> 2) / low) | ripple;
    }
    (best, visited)
}

/// Confirms by exhaustive enumeration that the `k` positions with the
/// smallest target probability maximize the summed signal magnitude over
/// all size-`k` subsets.
///
/// `pairs[i]` is `(target probability, |mean gap|)` at position `i`, with the
/// gap non-increasing in the probability. Returns `false` only on a
/// counterexample.
pub fn verify_selection_optimality(pairs: &[(f64, f64)], k: usize) -> Result<bool, TheoryError> {
    let len = pairs.len();
    if len > MAX_ENUMERATION_LEN {
        return Err(TheoryError::TooManyPositions { len });
    }
    if k == 0 || k > len {
        return Err(TheoryError::InvalidParameter(format!(
            "subset size {k} must lie in 1..={len}"
        )));
    }
    check_monotone(pairs)?;

    let probs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let selected_sum: f64 = hard_token_indices(&probs, k).iter().map(|&i| pairs[i].1).sum();

    let (best, _) = max_subset_sum(pairs, k);
    let tolerance = 1e-9 * (1.0 + best.abs());
    Ok(selected_sum >= best - tolerance)
}

/// Random instance satisfying the monotone coupling: distinct probabilities,
/// signal magnitudes (with ties) assigned in decreasing order of probability
/// rank, positions shuffled.
pub fn monotone_instance<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<(f64, f64)> {
    let mut probs: Vec<f64> = Vec::with_capacity(len);
    while probs.len() < len {
        let p = rng.random_range(0.0..1.0);
        if !probs.contains(&p) {
            probs.push(p);
        }
    }
    probs.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = (0..len).map(|_| rng.random_range(0u32..6) as f64 * 0.5).collect();
    gaps.sort_by(|a, b| b.total_cmp(a));
    let mut pairs: Vec<(f64, f64)> = probs.into_iter().zip(gaps).collect();
    pairs.shuffle(rng);
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::rng::seeded;

    #[test]
    fn worked_example() {
        let pairs = [(0.1, 5.0), (0.2, 4.0), (0.3, 3.0), (0.4, 2.0), (0.5, 1.0)];
        assert!(verify_selection_optimality(&pairs, 2).unwrap());
        assert_eq!(max_subset_sum(&pairs, 2), (9.0, 10));
    }

    #[test]
    fn full_and_constant_cases() {
        let pairs = [(0.3, 1.0), (0.1, 2.0), (0.2, 1.5)];
        assert!(verify_selection_optimality(&pairs, 3).unwrap());
        let flat = [(0.3, 1.0), (0.1, 1.0), (0.2, 1.0), (0.9, 1.0)];
        assert!(verify_selection_optimality(&flat, 2).unwrap());
    }

    #[test]
    fn detects_counterexample_shape() {
        // Not monotone: the easiest token carries the most signal.
        let pairs = [(0.1, 1.0), (0.9, 5.0)];
        assert!(matches!(
            verify_selection_optimality(&pairs, 1),
            Err(TheoryError::NotMonotone(..))
        ));
    }

    #[test]
    fn refuses_long_inputs_and_bad_k() {
        let pairs: Vec<(f64, f64)> = (0..21).map(|i| (i as f64 / 21.0, 1.0)).collect();
        assert!(matches!(
            verify_selection_optimality(&pairs, 3),
            Err(TheoryError::TooManyPositions { len: 21 })
        ));
        assert!(verify_selection_optimality(&pairs[..4], 0).is_err());
        assert!(verify_selection_optimality(&pairs[..4], 5).is_err());
    }

    #[test]
    fn enumerates_all_subsets_at_the_cap() {
        let mut rng = seeded(3);
        let pairs = monotone_instance(&mut rng, MAX_ENUMERATION_LEN);
        assert!(verify_selection_optimality(&pairs, 10).unwrap());
        assert_eq!(max_subset_sum(&pairs, 10).1, 184_756);
        assert!(verify_selection_optimality(&pairs, 20).unwrap());
        assert!(verify_selection_optimality(&pairs, 1).unwrap());
    }

    #[test]
    fn random_instances_hold() {
        let mut rng = seeded(12);
        for _ in 0..30 {
            let len = rng.random_range(1..=12);
            let k = rng.random_range(1..=len);
            let pairs = monotone_instance(&mut rng, len);
            assert!(verify_selection_optimality(&pairs, k).unwrap());
        }
    }
}
