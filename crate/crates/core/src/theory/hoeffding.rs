use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, seeded};
use super::TheoryError;

/// Monte Carlo tolerance, in binomial standard errors.
pub const MC_SLACK_SE: f64 = 3.0;

const TRIALS_PER_CHUNK: u64 = 1024;

/// Independent Bernoulli token indicators with class-dependent success rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliWorld {
    pub p_mem: f64,
    pub p_non: f64,
    /// Number of selected tokens per sample.
    pub k: usize,
    pub seed: u64,
}

impl BernoulliWorld {
    pub fn new(p_mem: f64, p_non: f64, k: usize, seed: u64) -> Result<Self, TheoryError> {
        let unit = |p: f64| p > 0.0 && p < 1.0;
        if !unit(p_mem) || !unit(p_non) {
            return Err(TheoryError::InvalidParameter(format!(
                "p_mem ({p_mem}) and p_non ({p_non}) must lie in (0, 1)"
            )));
        }
        if p_non >= p_mem {
            return Err(TheoryError::InvalidParameter(format!(
                "p_non ({p_non}) must be below p_mem ({p_mem})"
            )));
        }
        if k == 0 {
            return Err(TheoryError::InvalidParameter("k must be >= 1".into()));
        }
        Ok(Self {
            p_mem,
            p_non,
            k,
            seed,
        })
    }

    pub fn gap(&self) -> f64 {
        self.p_mem - self.p_non
    }

    /// Success counts out of `k` for `n` simulated samples of one class.
    ///
    /// Trials are drawn in fixed-size chunks from derived seeds, so the
    /// result does not depend on the thread count.
    pub fn draw_counts(&self, member: bool, n: u64) -> Vec<u32> {
        let p = if member { self.p_mem } else { self.p_non };
        let class_seed = derive_seed(self.seed, member as u64);
        let chunks = n.div_ceil(TRIALS_PER_CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|chunk| {
                let mut rng = seeded(derive_seed(class_seed, chunk));
                let start = chunk * TRIALS_PER_CHUNK;
                let len = TRIALS_PER_CHUNK.min(n - start);
                let k = self.k;
                (0..len)
                    .map(move |_| (0..k).filter(|_| rng.random_bool(p)).count() as u32)
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// `exp(-2 k t^2)`, the one-sided Hoeffding tail bound at deviation `t`.
pub fn hoeffding_bound(k: usize, deviation: f64) -> f64 {
    (-2.0 * k as f64 * deviation * deviation).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSimulation {
    pub world: BernoulliWorld,
    pub tau: f64,
    pub n_trials: u64,
    /// Share of member samples with `S <= tau`.
    pub empirical_fnr: f64,
    /// Share of nonmember samples with `S >= tau`.
    pub empirical_fpr: f64,
    pub bound_fnr: f64,
    pub bound_fpr: f64,
}

impl ErrorSimulation {
    fn slack(&self, bound: f64) -> f64 {
        MC_SLACK_SE * (bound * (1.0 - bound) / self.n_trials as f64).sqrt()
    }

    /// Both empirical rates sit under their bounds plus `MC_SLACK_SE` binomial
    /// standard errors.
    pub fn within_bounds(&self) -> bool {
        self.empirical_fnr <= self.bound_fnr + self.slack(self.bound_fnr)
            && self.empirical_fpr <= self.bound_fpr + self.slack(self.bound_fpr)
    }
}

/// Simulates `n_trials` member and nonmember scores `S = mean of k indicators`
/// and compares both error rates at `tau` with their tail bounds.
pub fn simulate_errors(
    world: &BernoulliWorld,
    tau: f64,
    n_trials: u64,
) -> Result<ErrorSimulation, TheoryError> {
    if !(tau > world.p_non && tau < world.p_mem) {
        return Err(TheoryError::ThresholdOutOfRange {
            tau,
            p_non: world.p_non,
            p_mem: world.p_mem,
        });
    }
    if n_trials == 0 {
        return Err(TheoryError::InvalidParameter("n_trials must be >= 1".into()));
    }
    let k = world.k as f64;
    let misses = world
        .draw_counts(true, n_trials)
        .into_iter()
        .filter(|&c| c as f64 / k <= tau)
        .count();
    let false_alarms = world
        .draw_counts(false, n_trials)
        .into_iter()
        .filter(|&c| c as f64 / k >= tau)
        .count();
    Ok(ErrorSimulation {
        world: *world,
        tau,
        n_trials,
        empirical_fnr: misses as f64 / n_trials as f64,
        empirical_fpr: false_alarms as f64 / n_trials as f64,
        bound_fnr: hoeffding_bound(world.k, world.p_mem - tau),
        bound_fpr: hoeffding_bound(world.k, tau - world.p_non),
    })
}

/// Smallest `K` with `K >= ln(1/beta) / (2 gamma^2)`.
pub fn sample_complexity(gamma: f64, beta: f64) -> Result<u64, TheoryError> {
    if !(gamma > 0.0 && gamma < 1.0) || !(beta > 0.0 && beta < 1.0) {
        return Err(TheoryError::InvalidParameter(format!(
            "gamma ({gamma}) and beta ({beta}) must lie in (0, 1)"
        )));
    }
    let exact = -beta.ln() / (2.0 * gamma * gamma);
    // Absorb rounding noise when the exact value is an integer.
    Ok((exact - 1e-9).ceil().max(1.0) as u64)
}

/// Empirical power of the threshold test at the sample-complexity `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCheck {
    pub gamma: f64,
    pub beta: f64,
    pub k: u64,
    pub p_mem: f64,
    pub p_non: f64,
    pub tau: f64,
    pub n_trials: u64,
    /// Share of member samples with `S >= tau`.
    pub empirical_power: f64,
    /// `1 - beta - MC_SLACK_SE * sqrt(beta (1 - beta) / n_trials)`.
    pub required_power: f64,
    pub passed: bool,
}

/// Draws member scores at `K = sample_complexity(gamma, beta)` with
/// `p_non = p_mem - gamma` and `tau` midway between them, and checks the
/// empirical power against `1 - beta`.
pub fn check_sample_complexity(
    gamma: f64,
    beta: f64,
    p_mem: f64,
    n_trials: u64,
    seed: u64,
) -> Result<PowerCheck, TheoryError> {
    let k = sample_complexity(gamma, beta)?;
    let p_non = p_mem - gamma;
    let world = BernoulliWorld::new(p_mem, p_non, k as usize, seed)?;
    let tau = 0.5 * (p_mem + p_non);
    let hits = world
        .draw_counts(true, n_trials)
        .into_iter()
        .filter(|&c| c as f64 / k as f64 >= tau)
        .count();
    let empirical_power = hits as f64 / n_trials as f64;
    let required_power = 1.0 - beta - MC_SLACK_SE * (beta * (1.0 - beta) / n_trials as f64).sqrt();
    Ok(PowerCheck {
        gamma,
        beta,
        k,
        p_mem,
        p_non,
        tau,
        n_trials,
        empirical_power,
        required_power,
        passed: empirical_power >= required_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `P[Bin(k, p) <= c]` by direct summation.
    fn binomial_cdf(k: usize, p: f64, c: usize) -> f64 {
        let mut total = 0.0;
        for j in 0..=c.min(k) {
            let mut coef = 1.0;
            for i in 0..j {
                coef *= (k - i) as f64 / (i + 1) as f64;
            }
            total += coef * p.powi(j as i32) * (1.0 - p).powi((k - j) as i32);
        }
        total
    }

    #[test]
    fn bound_formula() {
        let b = hoeffding_bound(50, 0.9 - 0.7);
        assert!((b - (-4.0f64).exp()).abs() < 1e-12);
        assert!((b - 0.018315638888734).abs() < 1e-12);
    }

    #[test]
    fn single_token_world_matches_exact_rates() {
        let world = BernoulliWorld::new(0.9, 0.1, 1, 17).unwrap();
        let sim = simulate_errors(&world, 0.5, 10_000).unwrap();
        // S <= 0.5 iff the single indicator is 0.
        let exact_fnr = binomial_cdf(1, 0.9, 0);
        assert!((exact_fnr - 0.1).abs() < 1e-12);
        let se = (exact_fnr * (1.0 - exact_fnr) / 10_000.0).sqrt();
        assert!(
            (sim.empirical_fnr - exact_fnr).abs() <= 4.0 * se,
            "{}",
            sim.empirical_fnr
        );
        assert!((sim.bound_fnr - (-0.32f64).exp()).abs() < 1e-12);
        assert!(sim.within_bounds());
    }

    #[test]
    fn empirical_rates_match_exact_binomial() {
        let world = BernoulliWorld::new(0.7, 0.4, 20, 5).unwrap();
        let tau = 0.55;
        let sim = simulate_errors(&world, tau, 20_000).unwrap();
        let exact_fnr = binomial_cdf(20, 0.7, 11);
        let exact_fpr = 1.0 - binomial_cdf(20, 0.4, 10);
        let se = |p: f64| (p * (1.0 - p) / 20_000.0).sqrt();
        assert!((sim.empirical_fnr - exact_fnr).abs() <= 4.0 * se(exact_fnr));
        assert!((sim.empirical_fpr - exact_fpr).abs() <= 4.0 * se(exact_fpr));
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let world = BernoulliWorld::new(0.8, 0.6, 37, 99).unwrap();
        let a = simulate_errors(&world, 0.7, 5_000).unwrap();
        let b = simulate_errors(&world, 0.7, 5_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(world.draw_counts(true, 3000), world.draw_counts(true, 3000));
    }

    #[test]
    fn threshold_precondition() {
        let world = BernoulliWorld::new(0.8, 0.6, 5, 0).unwrap();
        assert!(matches!(
            simulate_errors(&world, 0.6, 10),
            Err(TheoryError::ThresholdOutOfRange { .. })
        ));
        assert!(matches!(
            simulate_errors(&world, 0.9, 10),
            Err(TheoryError::ThresholdOutOfRange { .. })
        ));
        assert!(BernoulliWorld::new(0.5, 0.6, 5, 0).is_err());
        assert!(BernoulliWorld::new(0.5, 0.4, 0, 0).is_err());
    }

    #[test]
    fn sample_complexity_values() {
        assert_eq!(sample_complexity(0.2, 0.05).unwrap(), 38);
        assert_eq!(sample_complexity(0.5, (-1.0f64).exp()).unwrap(), 2);
        assert!(sample_complexity(0.0, 0.05).is_err());
        assert!(sample_complexity(0.2, 1.0).is_err());
    }

    #[test]
    fn power_check_shape() {
        let check = check_sample_complexity(0.3, 0.05, 0.91, 2_000, 1).unwrap();
        assert_eq!(check.k, 17);
        assert!((check.tau - 0.76).abs() < 1e-12);
        assert!(check.passed, "{check:?}");
    }
}
