//! Compares simulated HT-MIA error rates in a Bernoulli token model with the
//! Hoeffding tail bound, and checks the sample-complexity formula.
//!
//! Run with `cargo run --release --example hoeffding_bounds`.

use htmia::theory::{check_sample_complexity, sample_complexity, simulate_errors, BernoulliWorld};

fn main() {
    println!(
        "{:>4} {:>6} {:>10} {:>10} {:>10}",
        "K", "tau", "FNR", "FPR", "bound"
    );
    for k in [5, 20, 50, 200] {
        let world = BernoulliWorld::new(0.91, 0.70, k, 1).unwrap();
        let tau = 0.805;
        let sim = simulate_errors(&world, tau, 20_000).unwrap();
        println!(
            "{:>4} {:>6} {:>10.5} {:>10.5} {:>10.5}",
            k, tau, sim.empirical_fnr, sim.empirical_fpr, sim.bound_fnr
        );
    }

    println!();
    for gamma in [0.1, 0.2, 0.3] {
        let k = sample_complexity(gamma, 0.05).unwrap();
        let check = check_sample_complexity(gamma, 0.05, 0.91, 20_000, 2).unwrap();
        println!(
            "gamma {gamma}: K = {k}, power {:.4} (required {:.4})",
            check.empirical_power, check.required_power
        );
    }
}
