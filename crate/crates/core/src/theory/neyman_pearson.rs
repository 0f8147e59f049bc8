use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::seeded;
use super::{BernoulliWorld, TheoryError};

/// Probability mass of `Bin(k, p)` at `0..=k`, computed in log space.
pub fn binomial_pmf(k: usize, p: f64) -> Vec<f64> {
    let mut ln_fact = vec![0.0f64; k + 1];
    for i in 1..=k {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=k)
        .map(|c| {
            let ln = ln_fact[k] - ln_fact[c] - ln_fact[k - c]
                + c as f64 * p.ln()
                + (k - c) as f64 * (1.0 - p).ln();
            ln.exp()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub world: BernoulliWorld,
    pub rules_checked: usize,
    /// Rules whose TPR beat the threshold frontier at their FPR.
    pub violations: usize,
    /// Largest `rule TPR - frontier TPR` seen; negative when all rules lose.
    pub max_excess: f64,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// ROC points of the threshold rules `S >= c / k`, from `c = k + 1` (flag
/// nothing) down to `c = 0` (flag everything).
fn threshold_frontier(member: &[f64], nonmember: &[f64]) -> Vec<(f64, f64)> {
    let k = member.len() - 1;
    let mut points = vec![(0.0, 0.0)];
    let (mut fpr, mut tpr) = (0.0, 0.0);
    for c in (0..=k).rev() {
        fpr += nonmember[c];
        tpr += member[c];
        points.push((fpr, tpr));
    }
    points
}

/// TPR of the boundary-randomized threshold test at the given FPR.
fn frontier_tpr(frontier: &[(f64, f64)], fpr: f64) -> f64 {
    for w in frontier.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if fpr <= x1 {
            if x1 <= x0 {
                return y1;
            }
            return y0 + (y1 - y0) * (fpr - x0) / (x1 - x0);
        }
    }
    frontier.last().map_or(1.0, |p| p.1)
}

fn is_threshold_rule(rule: &[f64]) -> bool {
    // Deterministic upper sets {c >= t}: zeros followed by ones.
    rule.iter().all(|&v| v == 0.0 || v == 1.0) && rule.windows(2).all(|w| w[0] <= w[1])
}

/// Draws `n_rules` non-threshold decision rules over the score levels of
/// `world` and checks that none beats the threshold test at its FPR.
///
/// Half of the rules are deterministic subsets of levels, half flag each
/// level with an independent random probability. Both classes' score
/// distributions are the exact binomial laws of the world, and the
/// threshold side may randomize at the boundary level so it can match any
/// FPR exactly.
pub fn verify_threshold_dominance(
    world: &BernoulliWorld,
    n_rules: usize,
    seed: u64,
) -> Result<DominanceReport, TheoryError> {
    if n_rules == 0 {
        return Err(TheoryError::InvalidParameter("n_rules must be >= 1".into()));
    }
    let member = binomial_pmf(world.k, world.p_mem);
    let nonmember = binomial_pmf(world.k, world.p_non);
    let frontier = threshold_frontier(&member, &nonmember);
    let mut rng = seeded(seed);

    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut checked = 0;
    while checked < n_rules {
        let rule: Vec<f64> = if checked % 2 == 0 {
            (0..=world.k)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
                .collect()
        } else {
            (0..=world.k).map(|_| rng.random_range(0.0..=1.0)).collect()
        };
        if is_threshold_rule(&rule) {
            continue;
        }
        checked += 1;
        let fpr: f64 = rule.iter().zip(&nonmember).map(|(r, q)| r * q).sum();
        let tpr: f64 = rule.iter().zip(&member).map(|(r, q)| r * q).sum();
        let excess = tpr - frontier_tpr(&frontier, fpr);
        max_excess = max_excess.max(excess);
        if excess > 1e-12 {
            violations += 1;
        }
    }
    Ok(DominanceReport {
        world: *world,
        rules_checked: checked,
        violations,
        max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sums_to_one() {
        for (k, p) in [(1, 0.3), (20, 0.7), (200, 0.55)] {
            let pmf = binomial_pmf(k, p);
            assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let pmf = binomial_pmf(2, 0.5);
        assert!((pmf[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn thresholds_dominate_random_rules() {
        for (k, p_mem, p_non) in [(1, 0.9, 0.1), (5, 0.7, 0.5), (20, 0.91, 0.70)] {
            let world = BernoulliWorld::new(p_mem, p_non, k, 0).unwrap();
            let report = verify_threshold_dominance(&world, 1000, 4).unwrap();
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.rules_checked, 1000);
        }
    }

    #[test]
    fn reversed_world_is_caught() {
        // Inverting the roles breaks the monotone likelihood ratio, so the
        // "threshold" side should lose to rules that flag low scores.
        let world = BernoulliWorld {
            p_mem: 0.2,
            p_non: 0.8,
            k: 10,
            seed: 0,
        };
        let report = verify_threshold_dominance(&world, 200, 1).unwrap();
        assert!(report.violations > 0);
    }

    #[test]
    fn threshold_rule_detection() {
        assert!(is_threshold_rule(&[0.0, 0.0, 1.0]));
        assert!(!is_threshold_rule(&[1.0, 0.0, 1.0]));
        assert!(!is_threshold_rule(&[0.0, 0.5, 1.0]));
    }
}
