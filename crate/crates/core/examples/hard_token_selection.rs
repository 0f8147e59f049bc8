//! Walks through the HT-MIA computation on a single sample: the adaptive
//! token budget, the selected hard positions and the improvement fraction.
//!
//! Run with `cargo run --example hard_token_selection`.

use htmia::attacks::{
    fraction_improved, hard_token_indices, ht_mia_score, select_k, SelectionConfig, SelectionStrategy,
};
use htmia::trace::{Label, SampleRecord, TokenTrace, Variant};

fn main() {
    let target = vec![0.90, 0.08, 0.75, 0.30, 0.02, 0.66, 0.11, 0.95, 0.05, 0.40];
    let reference = vec![0.88, 0.03, 0.80, 0.10, 0.04, 0.60, 0.05, 0.97, 0.02, 0.45];
    let tokens: Vec<u32> = (100..111).collect();
    let rec = SampleRecord::new(
        Label::Unknown,
        TokenTrace::new("s", "target", Variant::Original, tokens.clone(), target.clone()).unwrap(),
        TokenTrace::new("s", "reference", Variant::Original, tokens, reference.clone()).unwrap(),
    )
    .unwrap();

    for strategy in [SelectionStrategy::ByTarget, SelectionStrategy::ByReference] {
        let cfg = SelectionConfig::new(2, 100, 0.4, strategy).unwrap();
        let k = select_k(rec.len(), &cfg);
        let ranking = match strategy {
            SelectionStrategy::ByTarget => &target,
            SelectionStrategy::ByReference => &reference,
        };
        let hard = hard_token_indices(ranking, k);
        println!("strategy {strategy}: K = {k}, hard positions {hard:?}");
        for &i in &hard {
            let mark = if target[i] > reference[i] { "improved" } else { "" };
            println!(
                "  pos {i}: target {:.2} reference {:.2} {mark}",
                target[i], reference[i]
            );
        }
        println!(
            "  fraction improved = {:.3} (score {:.3})",
            fraction_improved(&target, &reference, &hard, 0.0),
            ht_mia_score(&rec, &cfg).score
        );
    }
}
