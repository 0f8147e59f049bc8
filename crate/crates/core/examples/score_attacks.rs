//! Scores two hand-built samples with every attack, including the ones that
//! need variant traces (Lowercase, PAC) and raw text (Zlib).
//!
//! Run with `cargo run --example score_attacks`.

use std::collections::BTreeMap;

use htmia::attacks::{score_records, AttackKind, AttackParams};
use htmia::trace::{Label, SampleRecord, TokenTrace, Variant};

fn trace(id: &str, model: &str, variant: Variant, probs: &[f64]) -> TokenTrace {
    let tokens = (0..=probs.len() as u32).collect();
    TokenTrace::new(id, model, variant, tokens, probs.to_vec()).expect("valid probabilities")
}

fn record(id: &str, label: Label, target: &[f64], reference: &[f64]) -> SampleRecord {
    let mut rec = SampleRecord::new(
        label,
        trace(id, "target", Variant::Original, target),
        trace(id, "reference", Variant::Original, reference),
    )
    .expect("same tokens");
    let lower: Vec<f64> = target.iter().map(|p| p * 0.8).collect();
    rec.attach_variant(trace(id, "target", Variant::Lowercase, &lower));
    for j in 0..2u32 {
        let aug: Vec<f64> = target.iter().map(|p| p.powf(1.2 + 0.3 * j as f64)).collect();
        rec.attach_variant(trace(id, "target", Variant::Augmented(j), &aug));
    }
    rec
}

fn main() {
    let records = vec![
        record(
            "doc-a",
            Label::Member,
            &[0.95, 0.04, 0.88, 0.07, 0.91, 0.03],
            &[0.94, 0.02, 0.87, 0.03, 0.90, 0.01],
        ),
        record(
            "doc-b",
            Label::Nonmember,
            &[0.93, 0.02, 0.85, 0.05, 0.90, 0.02],
            &[0.93, 0.03, 0.86, 0.06, 0.89, 0.02],
        ),
    ];
    let texts: BTreeMap<String, String> = [
        ("doc-a", "patient reports mild headache after dosage change"),
        ("doc-b", "follow-up visit scheduled for next tuesday morning"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();

    let mut params = AttackParams::default();
    params.selection.min_k = 2;
    params.pac_k_tokens = 2;
    params.pac_n_aug = 2;

    let rows = score_records(&records, &AttackKind::ALL, &params, Some(&texts)).expect("all inputs present");
    println!("{:<8} {:<10} {:>12}  degenerate", "sample", "attack", "score");
    for row in rows {
        let s = row.score;
        println!(
            "{:<8} {:<10} {:>12.6}  {}",
            s.sample_id,
            s.attack.display_name(),
            s.score,
            s.degenerate
        );
    }
}
