use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{auc, mann_whitney_auc, roc, tpr_at_fpr, MetricsError, RocCurve};
use crate::attacks::{AttackKind, ScoreRow};
use crate::provenance::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TprAtFpr {
    pub target_fpr: f64,
    pub tpr: f64,
    pub achieved_fpr: f64,
    /// `null` in JSON when no sample can be flagged within the budget.
    #[serde(deserialize_with = "null_as_infinity")]
    pub threshold: f64,
}

fn null_as_infinity<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Metrics for one attack column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackEval {
    pub attack: AttackKind,
    pub auc: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
    pub n_members: u64,
    pub n_nonmembers: u64,
    /// Samples with `unknown` labels left out of the metrics.
    pub excluded_unknown: u64,
    pub degenerate_count: u64,
    #[serde(skip)]
    pub roc: Option<RocCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub provenance: Option<Provenance>,
    /// Snapshot of the configuration that produced the scores.
    pub config: serde_json::Value,
    pub fpr_targets: Vec<f64>,
    pub attacks: Vec<AttackEval>,
}

impl EvalReport {
    pub fn attack(&self, kind: AttackKind) -> Option<&AttackEval> {
        self.attacks.iter().find(|a| a.attack == kind)
    }
}

/// Evaluates every attack column in `rows`, in attack order.
///
/// Unknown-labeled rows are counted and skipped. Each AUC is cross-checked
/// against the rank-sum statistic.
pub fn evaluate(rows: &[ScoreRow], fpr_targets: &[f64]) -> Result<EvalReport, MetricsError> {
    if let Some(&bad) = fpr_targets.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(MetricsError::InvalidFprTarget(bad));
    }
    let mut columns: BTreeMap<AttackKind, Vec<&ScoreRow>> = BTreeMap::new();
    for row in rows {
        columns.entry(row.score.attack).or_default().push(row);
    }

    let mut attacks = Vec::with_capacity(columns.len());
    for (attack, column) in columns {
        let labeled: Vec<(f64, bool)> = column
            .iter()
            .filter_map(|r| r.label.is_member().map(|m| (r.score.score, m)))
            .collect();
        let excluded_unknown = (column.len() - labeled.len()) as u64;
        let degenerate_count = column.iter().filter(|r| r.score.degenerate).count() as u64;
        let curve = roc(&labeled)?;
        let area = auc(&curve);
        let rank_sum = mann_whitney_auc(&labeled)?;
        if (area - rank_sum).abs() > 1e-12 {
            return Err(MetricsError::AucSelfCheck {
                trapezoid: area,
                rank_sum,
            });
        }
        let tpr = fpr_targets
            .iter()
            .map(|&target_fpr| {
                let op = tpr_at_fpr(&curve, target_fpr);
                TprAtFpr {
                    target_fpr,
                    tpr: op.tpr,
                    achieved_fpr: op.achieved_fpr,
                    threshold: op.threshold,
                }
            })
            .collect();
        attacks.push(AttackEval {
            attack,
            auc: area,
            tpr_at_fpr: tpr,
            n_members: curve.n_members,
            n_nonmembers: curve.n_nonmembers,
            excluded_unknown,
            degenerate_count,
            roc: Some(curve),
        });
    }
    Ok(EvalReport {
        provenance: None,
        config: serde_json::Value::Null,
        fpr_targets: fpr_targets.to_vec(),
        attacks,
    })
}

/// One row per attack: AUC then `tpr@<target>` / `achieved_fpr@<target>` pairs.
pub fn write_eval_csv<W: Write>(out: W, report: &EvalReport) -> io::Result<()> {
    let mut out = out;
    if let Some(p) = &report.provenance {
        writeln!(out, "# {}", p.header_line())?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["attack".to_string(), "auc".to_string()];
    for t in &report.fpr_targets {
        header.push(format!("tpr@{t}"));
        header.push(format!("achieved_fpr@{t}"));
    }
    header.extend(
        [
            "n_members",
            "n_nonmembers",
            "excluded_unknown",
            "degenerate_count",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for a in &report.attacks {
        let mut row = vec![a.attack.name().to_string(), a.auc.to_string()];
        for t in &a.tpr_at_fpr {
            row.push(t.tpr.to_string());
            row.push(t.achieved_fpr.to_string());
        }
        row.extend(
            [
                a.n_members,
                a.n_nonmembers,
                a.excluded_unknown,
                a.degenerate_count,
            ]
            .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()
}

/// `fpr,tpr,threshold` rows for external plotting.
pub fn write_roc_csv<W: Write>(out: W, curve: &RocCurve, provenance: Option<&Provenance>) -> io::Result<()> {
    let mut out = out;
    if let Some(p) = provenance {
        writeln!(out, "# {}", p.header_line())?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fpr", "tpr", "threshold"])?;
    for p in &curve.points {
        w.write_record([p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackScore;
    use crate::trace::Label;

    fn row(id: &str, label: Label, attack: AttackKind, score: f64) -> ScoreRow {
        ScoreRow {
            label,
            score: AttackScore {
                sample_id: id.into(),
                attack,
                score,
                degenerate: false,
            },
        }
    }

    #[test]
    fn report_per_attack() {
        let rows = vec![
            row("a", Label::Member, AttackKind::HtMia, 0.9),
            row("b", Label::Nonmember, AttackKind::HtMia, 0.1),
            row("c", Label::Unknown, AttackKind::HtMia, 0.5),
            row("a", Label::Member, AttackKind::Loss, -1.0),
            row("b", Label::Nonmember, AttackKind::Loss, -0.5),
        ];
        let report = evaluate(&rows, &[0.1, 0.01]).unwrap();
        assert_eq!(report.attacks.len(), 2);
        let ht = report.attack(AttackKind::HtMia).unwrap();
        assert_eq!(ht.auc, 1.0);
        assert_eq!(ht.excluded_unknown, 1);
        assert_eq!(ht.tpr_at_fpr[0].tpr, 1.0);
        assert_eq!(report.attack(AttackKind::Loss).unwrap().auc, 0.0);

        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"auc\":1.0"));

        let mut csv = Vec::new();
        write_eval_csv(&mut csv, &report).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("attack,auc,tpr@0.1,achieved_fpr@0.1,tpr@0.01,achieved_fpr@0.01"));
    }

    #[test]
    fn single_class_is_an_error() {
        let rows = vec![row("a", Label::Member, AttackKind::HtMia, 0.9)];
        assert_eq!(
            evaluate(&rows, &[0.1]).unwrap_err(),
            MetricsError::MissingClass { missing: "nonmember" }
        );
    }

    #[test]
    fn bad_fpr_target() {
        assert!(matches!(
            evaluate(&[], &[1.0]),
            Err(MetricsError::InvalidFprTarget(_))
        ));
    }
}
