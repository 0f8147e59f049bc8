//! Generates a synthetic audit set, scores it, and reports AUC and TPR at
//! fixed FPR for each attack, plus a few points of the HT-MIA ROC curve.
//!
//! Run with `cargo run --release --example evaluate_roc`.

use htmia::attacks::{score_records, AttackKind, AttackParams};
use htmia::metrics::{evaluate, DEFAULT_FPR_TARGETS};
use htmia::theory::{generate_synthetic, SyntheticTraceSpec};
use htmia::trace::join_samples;

fn main() {
    let spec = SyntheticTraceSpec {
        n_per_class: 300,
        seed: 11,
        ..Default::default()
    };
    let data = generate_synthetic(&spec).unwrap();
    let joined = join_samples(data.target, data.reference, &data.labels).unwrap();

    let attacks = [
        AttackKind::HtMia,
        AttackKind::Loss,
        AttackKind::Ratio,
        AttackKind::MinKPp,
    ];
    let rows = score_records(&joined.records, &attacks, &AttackParams::default(), None).unwrap();
    let report = evaluate(&rows, &DEFAULT_FPR_TARGETS).unwrap();

    println!(
        "{:<10} {:>7} {:>10} {:>10}",
        "attack", "AUC", "TPR@0.1", "TPR@0.01"
    );
    for a in &report.attacks {
        println!(
            "{:<10} {:>7.4} {:>10.4} {:>10.4}",
            a.attack.display_name(),
            a.auc,
            a.tpr_at_fpr[0].tpr,
            a.tpr_at_fpr[1].tpr
        );
    }

    let curve = report
        .attack(AttackKind::HtMia)
        .and_then(|a| a.roc.as_ref())
        .unwrap();
    println!("\nHT-MIA ROC (every 5th point):");
    for p in curve.points.iter().step_by(5) {
        println!("  fpr {:.3}  tpr {:.3}  threshold {}", p.fpr, p.tpr, p.threshold);
    }
}
