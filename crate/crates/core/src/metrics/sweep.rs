use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auc, roc, tpr_at_fpr, MetricsError, DEFAULT_FPR_TARGETS};
use crate::attacks::{ht_mia_score_with_margin, SelectionConfig, SelectionStrategy};
use crate::provenance::Provenance;
use crate::trace::SampleRecord;

/// One HT-MIA configuration: selection parameters plus an indicator margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub selection: SelectionConfig,
    /// Token counts as improved only when `target - reference > margin`.
    pub margin: f64,
}

impl From<SelectionConfig> for SweepPoint {
    fn from(selection: SelectionConfig) -> Self {
        Self {
            selection,
            margin: 0.0,
        }
    }
}

/// Axes of a cartesian parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub min_ks: Vec<usize>,
    pub max_ks: Vec<usize>,
    pub strategies: Vec<SelectionStrategy>,
    pub margins: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        let base = SelectionConfig::default();
        Self {
            alphas: vec![base.alpha],
            min_ks: vec![base.min_k],
            max_ks: vec![base.max_k],
            strategies: vec![base.strategy],
            margins: vec![0.0],
        }
    }
}

impl SweepGrid {
    /// Grid points in axis order (alpha, min_k, max_k, strategy, margin),
    /// skipping combinations where `max_k < min_k`.
    pub fn points(&self) -> Result<Vec<SweepPoint>, MetricsError> {
        let mut out = Vec::new();
        for &alpha in &self.alphas {
            for &min_k in &self.min_ks {
                for &max_k in &self.max_ks {
                    if max_k < min_k {
                        continue;
                    }
                    for &strategy in &self.strategies {
                        for &margin in &self.margins {
                            let selection = SelectionConfig::new(min_k, max_k, alpha, strategy)?;
                            out.push(SweepPoint { selection, margin });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub auc: f64,
    pub tpr_at_0_1: f64,
    pub tpr_at_0_01: f64,
}

/// Evaluates HT-MIA at each grid point. Rows come back in grid order.
///
/// Records labeled `unknown` are ignored; each class needs two samples.
pub fn sweep(records: &[SampleRecord], grid: &[SweepPoint]) -> Result<Vec<SweepRow>, MetricsError> {
    let labeled: Vec<(&SampleRecord, bool)> = records
        .iter()
        .filter_map(|r| r.label.is_member().map(|m| (r, m)))
        .collect();
    let members = labeled.iter().filter(|(_, m)| *m).count();
    let nonmembers = labeled.len() - members;
    if members < 2 || nonmembers < 2 {
        return Err(MetricsError::TooFewSamples {
            required: 2,
            members,
            nonmembers,
        });
    }
    for point in grid {
        point.selection.validate()?;
    }
    grid.par_iter()
        .map(|point| {
            let scores: Vec<(f64, bool)> = labeled
                .iter()
                .map(|(rec, m)| {
                    (
                        ht_mia_score_with_margin(rec, &point.selection, point.margin).score,
                        *m,
                    )
                })
                .collect();
            let curve = roc(&scores)?;
            Ok(SweepRow {
                point: *point,
                auc: auc(&curve),
                tpr_at_0_1: tpr_at_fpr(&curve, DEFAULT_FPR_TARGETS[0]).tpr,
                tpr_at_0_01: tpr_at_fpr(&curve, DEFAULT_FPR_TARGETS[1]).tpr,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(
    out: W,
    rows: &[SweepRow],
    provenance: Option<&Provenance>,
) -> io::Result<()> {
    let mut out = out;
    if let Some(p) = provenance {
        writeln!(out, "# {}", p.header_line())?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha", "min_k", "max_k", "strategy", "margin", "auc", "tpr@0.1", "tpr@0.01",
    ])?;
    for r in rows {
        let s = &r.point.selection;
        w.write_record([
            s.alpha.to_string(),
            s.min_k.to_string(),
            s.max_k.to_string(),
            s.strategy.to_string(),
            r.point.margin.to_string(),
            r.auc.to_string(),
            r.tpr_at_0_1.to_string(),
            r.tpr_at_0_01.to_string(),
        ])?;
    }
    w.flush()
}
