//! The full theory validation run behind `htmia theory`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, seeded};
use super::{
    check_sample_complexity, monotone_instance, simulate_errors, verify_selection_optimality,
    verify_threshold_dominance, BernoulliWorld, DominanceReport, ErrorSimulation, PowerCheck, TheoryError,
    MAX_ENUMERATION_LEN,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoryConfig {
    pub seed: u64,
    pub n_trials: u64,
    /// Token counts of the concentration grid.
    pub ks: Vec<usize>,
    /// Member/nonmember gaps; worlds sit symmetrically around `center`.
    pub gammas: Vec<f64>,
    pub center: f64,
    /// Thresholds as fractions of the way from `p_non` to `p_mem`.
    pub tau_fractions: Vec<f64>,
    pub power_gammas: Vec<f64>,
    pub power_beta: f64,
    /// Member rate of the worlds used for the power check.
    pub power_p_mem: f64,
    pub selection_instances: usize,
    pub dominance_rules: usize,
    /// `(k, p_mem, p_non)` worlds for the threshold dominance check.
    pub dominance_worlds: Vec<(usize, f64, f64)>,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_trials: 10_000,
            ks: vec![1, 5, 20, 50, 200],
            gammas: vec![0.1, 0.2, 0.4],
            center: 0.5,
            tau_fractions: vec![0.25, 0.5, 0.75],
            power_gammas: vec![0.1, 0.2, 0.3],
            power_beta: 0.05,
            power_p_mem: 0.91,
            selection_instances: 100,
            dominance_rules: 1000,
            dominance_worlds: vec![(1, 0.9, 0.1), (5, 0.6, 0.4), (20, 0.91, 0.70), (50, 0.55, 0.45)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingCell {
    pub k: usize,
    pub gamma: f64,
    pub tau: f64,
    pub simulation: ErrorSimulation,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub instances: usize,
    pub counterexamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub config: TheoryConfig,
    pub hoeffding: Vec<HoeffdingCell>,
    pub sample_complexity: Vec<PowerCheck>,
    pub selection_optimality: SelectionSummary,
    pub threshold_dominance: Vec<DominanceReport>,
    pub all_passed: bool,
}

/// Runs every check in `cfg`. Cells are evaluated in parallel but each has
/// its own derived seed, so the report is identical for a given config.
pub fn run_theory_validation(cfg: &TheoryConfig) -> Result<TheoryReport, TheoryError> {
    let mut grid = Vec::new();
    for &k in &cfg.ks {
        for &gamma in &cfg.gammas {
            for &frac in &cfg.tau_fractions {
                grid.push((k, gamma, frac));
            }
        }
    }
    let hoeffding = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(k, gamma, frac))| {
            let p_mem = cfg.center + gamma / 2.0;
            let p_non = cfg.center - gamma / 2.0;
            let world = BernoulliWorld::new(p_mem, p_non, k, derive_seed(cfg.seed, i as u64))?;
            let tau = p_non + frac * gamma;
            let simulation = simulate_errors(&world, tau, cfg.n_trials)?;
            Ok(HoeffdingCell {
                k,
                gamma,
                tau,
                passed: simulation.within_bounds(),
                simulation,
            })
        })
        .collect::<Result<Vec<_>, TheoryError>>()?;

    let power_seed = derive_seed(cfg.seed, 1 << 32);
    let sample_complexity = cfg
        .power_gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| {
            check_sample_complexity(
                gamma,
                cfg.power_beta,
                cfg.power_p_mem,
                cfg.n_trials,
                derive_seed(power_seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rng = seeded(derive_seed(cfg.seed, 2 << 32));
    let mut counterexamples = 0;
    for _ in 0..cfg.selection_instances {
        let len = rng.random_range(1..=MAX_ENUMERATION_LEN);
        let k = rng.random_range(1..=len);
        let pairs = monotone_instance(&mut rng, len);
        if !verify_selection_optimality(&pairs, k)? {
            counterexamples += 1;
        }
    }

    let dominance_seed = derive_seed(cfg.seed, 3 << 32);
    let threshold_dominance = cfg
        .dominance_worlds
        .iter()
        .enumerate()
        .map(|(i, &(k, p_mem, p_non))| {
            let world = BernoulliWorld::new(p_mem, p_non, k, 0)?;
            verify_threshold_dominance(&world, cfg.dominance_rules, derive_seed(dominance_seed, i as u64))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let all_passed = hoeffding.iter().all(|c| c.passed)
        && sample_complexity.iter().all(|c| c.passed)
        && counterexamples == 0
        && threshold_dominance.iter().all(DominanceReport::passed);
    Ok(TheoryReport {
        config: cfg.clone(),
        hoeffding,
        sample_complexity,
        selection_optimality: SelectionSummary {
            instances: cfg.selection_instances,
            counterexamples,
        },
        threshold_dominance,
        all_passed,
    })
}
