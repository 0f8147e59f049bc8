use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ht_mia_score, loss_score, lowercase_score, min_k_pp_score, pac_score, ratio_score, zlib_score,
    AttackError, AttackKind, AttackScore, ScoreRow, SelectionConfig,
};
use crate::trace::SampleRecord;

/// Knobs for every attack in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    pub selection: SelectionConfig,
    pub min_k_pp_percent: f64,
    pub pac_k_tokens: usize,
    pub pac_n_aug: usize,
}

impl Default for AttackParams {
    fn default() -> Self {
        Self {
            selection: SelectionConfig::default(),
            min_k_pp_percent: 0.2,
            pac_k_tokens: 10,
            pac_n_aug: 5,
        }
    }
}

impl AttackParams {
    pub fn validate(&self) -> Result<(), AttackError> {
        self.selection.validate()?;
        if !(self.min_k_pp_percent > 0.0 && self.min_k_pp_percent <= 1.0) {
            return Err(AttackError::InvalidParameter(format!(
                "min_k_pp_percent must lie in (0, 1], got {}",
                self.min_k_pp_percent
            )));
        }
        if self.pac_k_tokens == 0 || self.pac_n_aug == 0 {
            return Err(AttackError::InvalidParameter(
                "pac_k_tokens and pac_n_aug must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn score_one(
    rec: &SampleRecord,
    attack: AttackKind,
    params: &AttackParams,
    texts: Option<&BTreeMap<String, String>>,
) -> Result<AttackScore, AttackError> {
    match attack {
        AttackKind::HtMia => Ok(ht_mia_score(rec, &params.selection)),
        AttackKind::Loss => Ok(loss_score(&rec.target_trace)),
        AttackKind::Ratio => Ok(ratio_score(rec)),
        AttackKind::Zlib => {
            let text = texts
                .and_then(|t| t.get(&rec.sample_id))
                .ok_or_else(|| AttackError::MissingText {
                    sample_id: rec.sample_id.clone(),
                })?;
            Ok(zlib_score(&rec.target_trace, text.as_bytes()))
        }
        AttackKind::MinKPp => min_k_pp_score(&rec.target_trace, params.min_k_pp_percent),
        AttackKind::Lowercase => lowercase_score(rec),
        AttackKind::Pac => pac_score(rec, params.pac_k_tokens, params.pac_n_aug),
    }
}

/// Scores every record with every requested attack, in parallel.
///
/// Output is ordered by `(sample_id, attack)` regardless of input order or
/// thread scheduling. The first error in that order is returned.
pub fn score_records(
    records: &[SampleRecord],
    attacks: &[AttackKind],
    params: &AttackParams,
    texts: Option<&BTreeMap<String, String>>,
) -> Result<Vec<ScoreRow>, AttackError> {
    params.validate()?;
    let mut attacks = attacks.to_vec();
    attacks.sort_unstable();
    attacks.dedup();

    let mut order: Vec<&SampleRecord> = records.iter().collect();
    order.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let per_record: Vec<Result<Vec<ScoreRow>, AttackError>> = order
        .par_iter()
        .map(|rec| {
            attacks
                .iter()
                .map(|&attack| {
                    score_one(rec, attack, params, texts).map(|score| ScoreRow {
                        label: rec.label,
                        score,
                    })
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(records.len() * attacks.len());
    for chunk in per_record {
        rows.extend(chunk?);
    }
    Ok(rows)
}
