//! Shows why averaging over all tokens hides the membership signal: the
//! planted uplift lives only on hard tokens, so HT-MIA separates the classes
//! while the whole-sequence loss barely does.
//!
//! Run with `cargo run --release --example signal_dilution`.

use htmia::attacks::{score_records, AttackKind, AttackParams};
use htmia::metrics::evaluate;
use htmia::theory::{generate_synthetic, SyntheticTraceSpec};
use htmia::trace::join_samples;

fn main() {
    println!("{:>14} {:>10} {:>10}", "hard fraction", "HT-MIA", "Loss");
    for hard_fraction in [0.05, 0.1, 0.25, 0.5] {
        let spec = SyntheticTraceSpec {
            n_per_class: 500,
            hard_fraction,
            seed: 5,
            ..Default::default()
        };
        let data = generate_synthetic(&spec).unwrap();
        let joined = join_samples(data.target, data.reference, &data.labels).unwrap();
        let rows = score_records(
            &joined.records,
            &[AttackKind::HtMia, AttackKind::Loss],
            &AttackParams::default(),
            None,
        )
        .unwrap();
        let report = evaluate(&rows, &[0.1]).unwrap();
        let auc = |kind| report.attack(kind).unwrap().auc;
        println!(
            "{:>14} {:>10.4} {:>10.4}",
            hard_fraction,
            auc(AttackKind::HtMia),
            auc(AttackKind::Loss)
        );
    }
}
