//! Runs a reduced version of the full theory validation and prints the
//! report as JSON.
//!
//! Run with `cargo run --release --example theory_validation`.

use htmia::theory::{run_theory_validation, TheoryConfig};

fn main() {
    let cfg = TheoryConfig {
        n_trials: 2_000,
        ks: vec![5, 50],
        selection_instances: 20,
        dominance_rules: 200,
        ..Default::default()
    };
    let report = run_theory_validation(&cfg).unwrap();
    for cell in &report.hoeffding {
        let s = &cell.simulation;
        println!(
            "K={:<3} gamma={} tau={:.3}: FNR {:.4} <= {:.4}, FPR {:.4} <= {:.4}",
            cell.k, cell.gamma, cell.tau, s.empirical_fnr, s.bound_fnr, s.empirical_fpr, s.bound_fpr
        );
    }
    println!("all checks passed: {}", report.all_passed);
}
