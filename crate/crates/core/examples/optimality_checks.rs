//! Exhaustive check that the lowest-probability tokens give the largest
//! expected improvement, and a dominance check of threshold decision rules
//! against randomized alternatives.
//!
//! Run with `cargo run --release --example optimality_checks`.

use htmia::theory::rng::seeded;
use htmia::theory::{
    monotone_instance, verify_selection_optimality, verify_threshold_dominance, BernoulliWorld,
};

fn main() {
    let mut rng = seeded(3);
    let mut failures = 0;
    for len in 2..=16 {
        let pairs = monotone_instance(&mut rng, len);
        for k in 1..=len {
            if !verify_selection_optimality(&pairs, k).unwrap() {
                failures += 1;
            }
        }
    }
    println!("selection optimality: {failures} counterexamples");

    for (k, p_mem, p_non) in [(5, 0.6, 0.4), (20, 0.91, 0.7)] {
        let world = BernoulliWorld::new(p_mem, p_non, k, 0).unwrap();
        let report = verify_threshold_dominance(&world, 1000, 9).unwrap();
        println!(
            "K={k} p_mem={p_mem} p_non={p_non}: {} rules, {} violations, max excess {:.2e}",
            report.rules_checked, report.violations, report.max_excess
        );
    }
}
