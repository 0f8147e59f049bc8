use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::{AttackError, AttackKind, AttackScore};
use crate::trace::{SampleRecord, TokenTrace, Variant};

/// Mean per-token negative log-likelihood; `None` for an empty trace.
pub fn mean_nll(trace: &TokenTrace) -> Option<f64> {
    if trace.is_empty() {
        return None;
    }
    Some(total_nll(trace) / trace.len() as f64)
}

fn total_nll(trace: &TokenTrace) -> f64 {
    -trace.log_probs().sum::<f64>()
}

/// `exp(mean NLL)`; `None` for an empty trace.
pub fn perplexity(trace: &TokenTrace) -> Option<f64> {
    mean_nll(trace).map(f64::exp)
}

/// Negated mean NLL, i.e. mean log-probability.
pub fn loss_score(trace: &TokenTrace) -> AttackScore {
    match mean_nll(trace) {
        Some(nll) => AttackScore::new(&trace.sample_id, AttackKind::Loss, -nll),
        None => AttackScore::degenerate(&trace.sample_id, AttackKind::Loss, 0.0),
    }
}

/// `-NLL_target / NLL_reference` over summed token NLLs.
///
/// A reference NLL of zero maps to 0 when the target NLL is also zero and to
/// `f64::MIN` otherwise; both cases are flagged degenerate.
pub fn ratio_score(rec: &SampleRecord) -> AttackScore {
    let target = total_nll(&rec.target_trace);
    let reference = total_nll(&rec.reference_trace);
    if reference == 0.0 {
        let sentinel = if target == 0.0 { 0.0 } else { f64::MIN };
        return AttackScore::degenerate(&rec.sample_id, AttackKind::Ratio, sentinel);
    }
    AttackScore::new(&rec.sample_id, AttackKind::Ratio, -target / reference)
}

/// Compressed bytes per input byte, using the zlib stream format at level 6.
/// `None` for empty text.
pub fn zlib_entropy(text: &[u8]) -> Option<f64> {
    if text.is_empty() {
        return None;
    }
    let mut encoder = ZlibEncoder::new(Vec::new(), Compression::new(6));
    encoder
        .write_all(text)
        .expect("writing to an in-memory zlib encoder");
    let compressed = encoder.finish().expect("finishing an in-memory zlib encoder");
    Some(compressed.len() as f64 / text.len() as f64)
}

/// `-L(x) / zlibEntropy(x)` with `L` the mean token NLL.
pub fn zlib_score(trace: &TokenTrace, raw_text: &[u8]) -> AttackScore {
    match (mean_nll(trace), zlib_entropy(raw_text)) {
        (Some(nll), Some(entropy)) if entropy > 0.0 => {
            AttackScore::new(&trace.sample_id, AttackKind::Zlib, -nll / entropy)
        }
        _ => AttackScore::degenerate(&trace.sample_id, AttackKind::Zlib, 0.0),
    }
}

/// Ascending (log-prob, position) order.
fn sorted_log_probs(trace: &TokenTrace) -> Vec<f64> {
    let mut values: Vec<(f64, usize)> = trace.log_probs().zip(0..).collect();
    values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    values.into_iter().map(|(v, _)| v).collect()
}

/// Min-K%++ with per-sequence moments: z-score each token log-probability
/// against the mean and population standard deviation of the whole
/// sequence, then average the z-scores of the `ceil(k_percent * L)` lowest.
pub fn min_k_pp_score(trace: &TokenTrace, k_percent: f64) -> Result<AttackScore, AttackError> {
    if !(k_percent > 0.0 && k_percent <= 1.0) {
        return Err(AttackError::InvalidParameter(format!(
            "min_k_pp k_percent must lie in (0, 1], got {k_percent}"
        )));
    }
    let id = &trace.sample_id;
    let len = trace.len();
    if len == 0 {
        return Ok(AttackScore::degenerate(id, AttackKind::MinKPp, 0.0));
    }
    let sorted = sorted_log_probs(trace);
    if sorted[0] == sorted[len - 1] {
        return Ok(AttackScore::degenerate(id, AttackKind::MinKPp, 0.0));
    }
    let n = len as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let std = (sorted.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n).sqrt();
    // The epsilon keeps products like 0.2 * 15 = 3.0000000000000004 at 3.
    let count = ((k_percent * n - 1e-9).ceil() as usize).clamp(1, len);
    let z_sum: f64 = sorted[..count].iter().map(|g| (g - mean) / std).sum();
    Ok(AttackScore::new(id, AttackKind::MinKPp, z_sum / count as f64))
}

/// `PPL(x) - PPL(lowercase(x))` on the target model.
pub fn lowercase_score(rec: &SampleRecord) -> Result<AttackScore, AttackError> {
    let lower = rec
        .target_variant(Variant::Lowercase)
        .ok_or_else(|| AttackError::MissingVariant {
            sample_id: rec.sample_id.clone(),
            model_id: rec.target_trace.model_id.clone(),
            variant: Variant::Lowercase,
        })?;
    Ok(match (perplexity(&rec.target_trace), perplexity(lower)) {
        (Some(original), Some(lowered)) => {
            AttackScore::new(&rec.sample_id, AttackKind::Lowercase, original - lowered)
        }
        _ => AttackScore::degenerate(&rec.sample_id, AttackKind::Lowercase, 0.0),
    })
}

/// Mean of the top-k minus mean of the bottom-k token log-probabilities,
/// `k = min(k_tokens, L)`. The two sets may overlap on short traces.
pub fn polarized_distance(trace: &TokenTrace, k_tokens: usize) -> Option<f64> {
    let len = trace.len();
    if len == 0 || k_tokens == 0 {
        return None;
    }
    let k = k_tokens.min(len);
    let sorted = sorted_log_probs(trace);
    let bottom = sorted[..k].iter().sum::<f64>() / k as f64;
    let top = sorted[len - k..].iter().sum::<f64>() / k as f64;
    Some(top - bottom)
}

/// `PD(x) - mean_j PD(augmented_j(x))` on the target model.
pub fn pac_score(rec: &SampleRecord, k_tokens: usize, n_aug: usize) -> Result<AttackScore, AttackError> {
    if k_tokens == 0 || n_aug == 0 {
        return Err(AttackError::InvalidParameter(
            "pac k_tokens and n_aug must be >= 1".into(),
        ));
    }
    let mut augmented = Vec::with_capacity(n_aug);
    for j in 0..n_aug {
        let variant = Variant::Augmented(j as u32);
        let trace = rec
            .target_variant(variant)
            .ok_or_else(|| AttackError::MissingVariant {
                sample_id: rec.sample_id.clone(),
                model_id: rec.target_trace.model_id.clone(),
                variant,
            })?;
        augmented.push(polarized_distance(trace, k_tokens));
    }
    let original = polarized_distance(&rec.target_trace, k_tokens);
    let augmented: Option<Vec<f64>> = augmented.into_iter().collect();
    Ok(match (original, augmented) {
        (Some(original), Some(aug)) => {
            let mean_aug = aug.iter().sum::<f64>() / aug.len() as f64;
            AttackScore::new(&rec.sample_id, AttackKind::Pac, original - mean_aug)
        }
        _ => AttackScore::degenerate(&rec.sample_id, AttackKind::Pac, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Label;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace(id: &str, model: &str, variant: Variant, probs: &[f64]) -> TokenTrace {
        let tokens: Vec<u32> = if probs.is_empty() {
            vec![]
        } else {
            (0..=probs.len() as u32).collect()
        };
        TokenTrace::new(id, model, variant, tokens, probs.to_vec()).unwrap()
    }

    fn record(target: &[f64], reference: &[f64]) -> SampleRecord {
        SampleRecord::new(
            Label::Unknown,
            trace("s", "ft", Variant::Original, target),
            trace("s", "base", Variant::Original, reference),
        )
        .unwrap()
    }

    fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(1e-6..1.0)).collect()
    }

    #[test]
    fn loss_cases() {
        assert_eq!(
            loss_score(&trace("a", "m", Variant::Original, &[1.0, 1.0])).score,
            0.0
        );
        let e = std::f64::consts::E;
        let s = loss_score(&trace("a", "m", Variant::Original, &[1.0 / e, 1.0 / e.powi(3)])).score;
        assert!((s + 2.0).abs() < 1e-12);
        // -(ln 2 + ln 4) / 2, evaluated independently.
        let s = loss_score(&trace("a", "m", Variant::Original, &[0.5, 0.25])).score;
        assert!((s - -1.0397207708399179).abs() < 1e-15);
        let empty = loss_score(&trace("a", "m", Variant::Original, &[]));
        assert_eq!((empty.score, empty.degenerate), (0.0, true));
    }

    #[test]
    fn loss_floors_zero_probability() {
        let s = loss_score(&trace("a", "m", Variant::Original, &[0.0])).score;
        assert!((s - 1e-12f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ratio_cases() {
        let e = std::f64::consts::E;
        // NLL_tgt = 2, NLL_ref = 4.
        let s = ratio_score(&record(&[1.0 / e, 1.0 / e], &[e.powi(-2), e.powi(-2)])).score;
        assert!((s + 0.5).abs() < 1e-12);
        let p = [0.3, 0.7, 0.01];
        assert_eq!(ratio_score(&record(&p, &p)).score, -1.0);

        let degenerate = ratio_score(&record(&[0.5], &[1.0]));
        assert_eq!((degenerate.score, degenerate.degenerate), (f64::MIN, true));
        let both = ratio_score(&record(&[1.0], &[1.0]));
        assert_eq!((both.score, both.degenerate), (0.0, true));
    }

    #[test]
    fn ratio_unchanged_by_certain_trailing_token() {
        let base = ratio_score(&record(&[0.2, 0.4], &[0.1, 0.3])).score;
        let extended = ratio_score(&record(&[0.2, 0.4, 1.0], &[0.1, 0.3, 1.0])).score;
        assert_eq!(base, extended);
        // Loss is a mean, so the extra position changes it: -(ln .2 + ln .4)/3.
        let loss = loss_score(&trace("s", "m", Variant::Original, &[0.2, 0.4, 1.0])).score;
        assert!((loss - (0.2f64.ln() + 0.4f64.ln()) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_matches_independent_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..40);
            let t = random_probs(&mut rng, n);
            let b = random_probs(&mut rng, n);
            let mut nt = 0.0;
            let mut nb = 0.0;
            for i in 0..n {
                nt -= t[i].ln();
                nb -= b[i].ln();
            }
            let s = ratio_score(&record(&t, &b)).score;
            assert!((s - (-nt / nb)).abs() < 1e-12 * (1.0 + (nt / nb).abs()));
        }
    }

    #[test]
    fn zlib_golden_and_formula() {
        // Length measured once with an independent zlib (level 6): 13 bytes.
        let text = "ab".repeat(50);
        assert_eq!(zlib_entropy(text.as_bytes()), Some(13.0 / 100.0));
        let e = std::f64::consts::E;
        let t = trace("z", "m", Variant::Original, &[1.0 / e, 1.0 / e]);
        let s = zlib_score(&t, text.as_bytes()).score;
        assert!((s - -1.0 / 0.13).abs() < 1e-12);

        let certain = trace("z", "m", Variant::Original, &[1.0, 1.0]);
        assert_eq!(zlib_score(&certain, text.as_bytes()).score, 0.0);
        assert!(zlib_score(&t, b"").degenerate);
        // 44-byte pangram compresses to 51 bytes.
        let pangram = b"The quick brown fox jumps over the lazy dog.";
        assert_eq!(zlib_entropy(pangram), Some(51.0 / 44.0));
    }

    #[test]
    fn min_k_pp_worked_example() {
        let probs: Vec<f64> = (1..=5).map(|i| (-(i as f64)).exp()).collect();
        let s = min_k_pp_score(&trace("m", "m", Variant::Original, &probs), 0.4).unwrap();
        // Selected {-4, -5}, mean -3, population std sqrt(2).
        assert!((s.score - -1.0606601717798212).abs() < 1e-12, "{}", s.score);
    }

    #[test]
    fn min_k_pp_degenerate_and_full_k() {
        let flat = min_k_pp_score(&trace("m", "m", Variant::Original, &[0.1, 0.1, 0.1]), 0.5).unwrap();
        assert_eq!((flat.score, flat.degenerate), (0.0, true));
        let empty = min_k_pp_score(&trace("m", "m", Variant::Original, &[]), 0.5).unwrap();
        assert!(empty.degenerate);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_probs(&mut rng, 17);
        let full = min_k_pp_score(&trace("m", "m", Variant::Original, &p), 1.0).unwrap();
        assert!(full.score.abs() < 1e-12);
        assert!(min_k_pp_score(&trace("m", "m", Variant::Original, &p), 0.0).is_err());
    }

    #[test]
    fn min_k_pp_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(2..60);
            let p: Vec<f64> = (0..n).map(|_| (rng.random_range(1u32..8) as f64) / 8.0).collect();
            let k = rng.random_range(1u32..=10) as f64 / 10.0;
            let g: Vec<f64> = p.iter().map(|x| x.ln()).collect();
            let mu = g.iter().sum::<f64>() / n as f64;
            let var = g.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n as f64;
            if var == 0.0 {
                continue;
            }
            let mut sorted = g.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = ((k * n as f64) - 1e-9).ceil() as usize;
            let expected = sorted[..m].iter().map(|x| (x - mu) / var.sqrt()).sum::<f64>() / m as f64;
            let got = min_k_pp_score(&trace("m", "m", Variant::Original, &p), k)
                .unwrap()
                .score;
            assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }

    #[test]
    fn lowercase_cases() {
        let p = [0.2, 0.5, 0.9];
        let mut rec = record(&p, &p);
        assert!(matches!(
            lowercase_score(&rec),
            Err(AttackError::MissingVariant { .. })
        ));
        rec.attach_variant(trace("s", "ft", Variant::Lowercase, &p));
        assert_eq!(lowercase_score(&rec).unwrap().score, 0.0);

        // PPL 20 vs PPL 10.
        let mut rec = record(&[1.0 / 20.0], &[0.5]);
        rec.attach_variant(trace("s", "ft", Variant::Lowercase, &[0.1, 0.1]));
        assert!((lowercase_score(&rec).unwrap().score - 10.0).abs() < 1e-9);
    }

    #[test]
    fn lowercase_matches_ppl_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let na = rng.random_range(1..30);
            let a = random_probs(&mut rng, na);
            let nb = rng.random_range(1..30);
            let b = random_probs(&mut rng, nb);
            let ppl = |v: &[f64]| (v.iter().map(|x| -x.ln()).sum::<f64>() / v.len() as f64).exp();
            let mut rec = record(&a, &a);
            rec.attach_variant(trace("s", "ft", Variant::Lowercase, &b));
            let got = lowercase_score(&rec).unwrap().score;
            let expected = ppl(&a) - ppl(&b);
            assert!((got - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn pac_cases() {
        let p = [0.1, 0.4, 0.8, 0.95];
        let mut rec = record(&p, &p);
        assert!(matches!(
            pac_score(&rec, 2, 2),
            Err(AttackError::MissingVariant { .. })
        ));
        for j in 0..3 {
            rec.attach_variant(trace("s", "ft", Variant::Augmented(j), &p));
        }
        assert_eq!(pac_score(&rec, 2, 3).unwrap().score, 0.0);
        assert!(matches!(
            pac_score(&rec, 2, 4),
            Err(AttackError::MissingVariant { .. })
        ));
    }

    #[test]
    fn pac_formula() {
        let e = std::f64::consts::E;
        // PD = top - bottom with k = 1: log-probs {0, -3} -> 3; {0,-1} -> 1; {0,-2} -> 2.
        let mut rec = record(&[1.0, e.powi(-3)], &[0.5, 0.5]);
        rec.attach_variant(trace("s", "ft", Variant::Augmented(0), &[1.0, 1.0 / e]));
        rec.attach_variant(trace("s", "ft", Variant::Augmented(1), &[e.powi(-2), 1.0]));
        let s = pac_score(&rec, 1, 2).unwrap().score;
        assert!((s - 1.5).abs() < 1e-12);
    }

    #[test]
    fn polarized_distance_short_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.random_range(1..12);
            let k = rng.random_range(1..15);
            let p = random_probs(&mut rng, n);
            let mut g: Vec<f64> = p.iter().map(|x| x.ln()).collect();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let kk = k.min(n);
            let bottom: f64 = g.iter().take(kk).sum::<f64>() / kk as f64;
            let top: f64 = g.iter().rev().take(kk).sum::<f64>() / kk as f64;
            let got = polarized_distance(&trace("s", "m", Variant::Original, &p), k).unwrap();
            assert!((got - (top - bottom)).abs() < 1e-12);
            if k >= n {
                assert!(got.abs() < 1e-12);
            }
        }
    }
}
