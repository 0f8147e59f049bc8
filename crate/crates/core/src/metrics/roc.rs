use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Classify member iff `score >= threshold`; `+inf` for the empty rule.
    pub threshold: f64,
    pub true_positives: u64,
    pub false_positives: u64,
}

/// Step ROC curve from `(0, 0)` to `(1, 1)`, one step per distinct score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub n_members: u64,
    pub n_nonmembers: u64,
}

/// Builds the ROC curve of `(score, is_member)` pairs.
///
/// The threshold sweeps the distinct scores in descending order; tied scores
/// cross the threshold together.
pub fn roc(scores: &[(f64, bool)]) -> Result<RocCurve, MetricsError> {
    if let Some(&(bad, _)) = scores.iter().find(|(s, _)| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(bad));
    }
    let n_members = scores.iter().filter(|(_, m)| *m).count() as u64;
    let n_nonmembers = scores.len() as u64 - n_members;
    if n_members == 0 {
        return Err(MetricsError::MissingClass { missing: "member" });
    }
    if n_nonmembers == 0 {
        return Err(MetricsError::MissingClass { missing: "nonmember" });
    }

    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));

    let point = |tp: u64, fp: u64, threshold: f64| RocPoint {
        fpr: fp as f64 / n_nonmembers as f64,
        tpr: tp as f64 / n_members as f64,
        threshold,
        true_positives: tp,
        false_positives: fp,
    };
    let mut points = vec![point(0, 0, f64::INFINITY)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(point(tp, fp, threshold));
    }
    Ok(RocCurve {
        points,
        n_members,
        n_nonmembers,
    })
}

/// Trapezoidal area under the curve, accumulated in integer counts.
pub fn auc(curve: &RocCurve) -> f64 {
    let twice_area: u128 = curve
        .points
        .windows(2)
        .map(|w| {
            let dx = (w[1].false_positives - w[0].false_positives) as u128;
            dx * (w[0].true_positives + w[1].true_positives) as u128
        })
        .sum();
    let denom = 2 * curve.n_members as u128 * curve.n_nonmembers as u128;
    twice_area as f64 / denom as f64
}

/// Mann-Whitney U statistic over all member/nonmember pairs, ties counting
/// one half, normalized to `[0, 1]`. Computed from ranks in `O(n log n)`.
pub fn mann_whitney_auc(scores: &[(f64, bool)]) -> Result<f64, MetricsError> {
    let n_members = scores.iter().filter(|(_, m)| *m).count() as u128;
    let n_nonmembers = scores.len() as u128 - n_members;
    if n_members == 0 {
        return Err(MetricsError::MissingClass { missing: "member" });
    }
    if n_nonmembers == 0 {
        return Err(MetricsError::MissingClass { missing: "nonmember" });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut nonmembers_below = 0u128;
    let mut twice_u = 0u128;
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i].0;
        let (mut m, mut n) = (0u128, 0u128);
        while i < sorted.len() && sorted[i].0 == value {
            if sorted[i].1 {
                m += 1;
            } else {
                n += 1;
            }
            i += 1;
        }
        twice_u += m * (2 * nonmembers_below + n);
        nonmembers_below += n;
    }
    Ok(twice_u as f64 / (2 * n_members * n_nonmembers) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub tpr: f64,
    pub achieved_fpr: f64,
    pub threshold: f64,
}

/// Best TPR among curve points with FPR at most `target_fpr`; no interpolation.
pub fn tpr_at_fpr(curve: &RocCurve, target_fpr: f64) -> OperatingPoint {
    let best = curve
        .points
        .iter()
        .take_while(|p| p.fpr <= target_fpr)
        .last()
        .unwrap_or(&curve.points[0]);
    OperatingPoint {
        tpr: best.tpr,
        achieved_fpr: best.fpr,
        threshold: best.threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labeled(members: &[f64], nonmembers: &[f64]) -> Vec<(f64, bool)> {
        members
            .iter()
            .map(|&s| (s, true))
            .chain(nonmembers.iter().map(|&s| (s, false)))
            .collect()
    }

    fn brute_force_auc(scores: &[(f64, bool)]) -> f64 {
        let mut num = 0.0;
        let mut pairs = 0.0;
        for &(a, am) in scores {
            if !am {
                continue;
            }
            for &(b, bm) in scores {
                if bm {
                    continue;
                }
                pairs += 1.0;
                if a > b {
                    num += 1.0;
                } else if a == b {
                    num += 0.5;
                }
            }
        }
        num / pairs
    }

    #[test]
    fn perfect_separation() {
        let curve = roc(&labeled(&[0.9, 0.8], &[0.1, 0.2])).unwrap();
        assert!(curve.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert_eq!(auc(&curve), 1.0);
        let op = tpr_at_fpr(&curve, 0.01);
        assert_eq!((op.tpr, op.achieved_fpr), (1.0, 0.0));
        assert_eq!(op.threshold, 0.8);
    }

    #[test]
    fn constant_scores() {
        let curve = roc(&labeled(&[0.3, 0.3], &[0.3, 0.3, 0.3])).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!((curve.points[0].fpr, curve.points[0].tpr), (0.0, 0.0));
        assert_eq!((curve.points[1].fpr, curve.points[1].tpr), (1.0, 1.0));
        assert_eq!(auc(&curve), 0.5);
    }

    #[test]
    fn half_concordant() {
        let s = labeled(&[0.8, 0.2], &[0.6, 0.4]);
        assert_eq!(brute_force_auc(&s), 0.5);
        assert_eq!(auc(&roc(&s).unwrap()), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        assert_eq!(
            roc(&labeled(&[0.1, 0.2], &[])).unwrap_err(),
            MetricsError::MissingClass { missing: "nonmember" }
        );
        assert_eq!(
            roc(&labeled(&[], &[0.1])).unwrap_err(),
            MetricsError::MissingClass { missing: "member" }
        );
        assert!(matches!(
            roc(&labeled(&[f64::NAN], &[0.1])),
            Err(MetricsError::NonFiniteScore(_))
        ));
    }

    #[test]
    fn conservative_operating_points() {
        // Ten nonmembers: smallest nonzero FPR is 0.1.
        let members: Vec<f64> = (0..10).map(|i| 0.5 + i as f64 * 0.01).collect();
        let nonmembers: Vec<f64> = (0..10).map(|i| 0.55 + i as f64 * 0.01).collect();
        let curve = roc(&labeled(&members, &nonmembers)).unwrap();
        assert_eq!(tpr_at_fpr(&curve, 0.05).achieved_fpr, 0.0);

        // Hand-built curve: (0.08, 0.6) then (0.12, 0.7).
        let mk = |fp: u64, tp: u64| RocPoint {
            fpr: fp as f64 / 100.0,
            tpr: tp as f64 / 10.0,
            threshold: 1.0 - fp as f64 / 100.0,
            true_positives: tp,
            false_positives: fp,
        };
        let curve = RocCurve {
            points: vec![mk(0, 0), mk(8, 6), mk(12, 7), mk(100, 10)],
            n_members: 10,
            n_nonmembers: 100,
        };
        let op = tpr_at_fpr(&curve, 0.1);
        assert_eq!((op.tpr, op.achieved_fpr), (0.6, 0.08));
    }

    fn labeled_scores() -> impl Strategy<Value = Vec<(f64, bool)>> {
        prop::collection::vec(((0u32..15).prop_map(|v| v as f64 / 4.0), any::<bool>()), 2..200)
            .prop_filter("both classes", |v| {
                v.iter().any(|x| x.1) && v.iter().any(|x| !x.1)
            })
    }

    proptest! {
        #[test]
        fn trapezoid_equals_pairwise(scores in labeled_scores()) {
            let curve = roc(&scores).unwrap();
            let a = auc(&curve);
            prop_assert!((a - brute_force_auc(&scores)).abs() <= 1e-12);
            prop_assert!((a - mann_whitney_auc(&scores).unwrap()).abs() <= 1e-12);
            prop_assert_eq!(curve.points.first().map(|p| (p.fpr, p.tpr)), Some((0.0, 0.0)));
            prop_assert_eq!(curve.points.last().map(|p| (p.fpr, p.tpr)), Some((1.0, 1.0)));
            for w in curve.points.windows(2) {
                prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
            }
        }

        #[test]
        fn invariant_under_increasing_transform(scores in labeled_scores()) {
            let transformed: Vec<(f64, bool)> =
                scores.iter().map(|&(s, m)| (s.powi(3) + 2.0 * s - 7.0, m)).collect();
            prop_assert_eq!(auc(&roc(&scores).unwrap()), auc(&roc(&transformed).unwrap()));
        }

        #[test]
        fn label_swap_complements(scores in labeled_scores()) {
            let swapped: Vec<(f64, bool)> = scores.iter().map(|&(s, m)| (s, !m)).collect();
            let a = auc(&roc(&scores).unwrap());
            let b = auc(&roc(&swapped).unwrap());
            prop_assert!((a + b - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn duplicating_samples_keeps_curve(scores in labeled_scores()) {
            let doubled: Vec<(f64, bool)> = scores.iter().chain(scores.iter()).copied().collect();
            let a = roc(&scores).unwrap();
            let b = roc(&doubled).unwrap();
            prop_assert_eq!(auc(&a), auc(&b));
            let pa: Vec<_> = a.points.iter().map(|p| (p.fpr, p.tpr, p.threshold)).collect();
            let pb: Vec<_> = b.points.iter().map(|p| (p.fpr, p.tpr, p.threshold)).collect();
            prop_assert_eq!(pa, pb);
        }

        #[test]
        fn tpr_monotone_in_target(scores in labeled_scores(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let curve = roc(&scores).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p_lo = tpr_at_fpr(&curve, lo);
            let p_hi = tpr_at_fpr(&curve, hi);
            prop_assert!(p_lo.tpr <= p_hi.tpr);
            prop_assert!(p_lo.achieved_fpr <= lo && p_hi.achieved_fpr <= hi);
        }
    }
}
