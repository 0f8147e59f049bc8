use std::io::{self, BufRead, Write};

use super::{AttackKind, AttackScore};
use crate::trace::Label;

/// One line of the score CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub label: Label,
    pub score: AttackScore,
}

pub const SCORE_CSV_COLUMNS: [&str; 5] = ["sample_id", "label", "attack", "score", "degenerate_flag"];

/// Writes `sample_id,label,attack,score,degenerate_flag`, preceded by an
/// optional `#`-prefixed provenance line.
pub fn write_scores<W: Write>(out: W, rows: &[ScoreRow], provenance: Option<&str>) -> io::Result<()> {
    let mut out = out;
    if let Some(p) = provenance {
        writeln!(out, "# {p}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCORE_CSV_COLUMNS)?;
    for row in rows {
        w.write_record([
            row.score.sample_id.as_str(),
            row.label.as_str(),
            row.score.attack.name(),
            &row.score.score.to_string(),
            if row.score.degenerate { "1" } else { "0" },
        ])?;
    }
    w.flush()
}

/// Reads a score CSV written by [`write_scores`]; `#` lines are skipped.
pub fn read_scores<R: BufRead>(input: R) -> Result<Vec<ScoreRow>, String> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != SCORE_CSV_COLUMNS {
        return Err(format!("unexpected score CSV columns: {headers:?}"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let at = |field: usize| record.get(field).unwrap_or_default();
        let row_err = |what: &str| format!("score row {}: {what}", i + 1);
        let label: Label = at(1).parse().map_err(|e: String| row_err(&e))?;
        let attack: AttackKind = at(2).parse().map_err(|e: String| row_err(&e))?;
        let score: f64 = at(3)
            .parse()
            .map_err(|_| row_err(&format!("bad score '{}'", at(3))))?;
        if !score.is_finite() {
            return Err(row_err("score must be finite"));
        }
        let degenerate = match at(4) {
            "0" => false,
            "1" => true,
            other => return Err(row_err(&format!("bad degenerate_flag '{other}'"))),
        };
        rows.push(ScoreRow {
            label,
            score: AttackScore {
                sample_id: at(0).to_string(),
                attack,
                score,
                degenerate,
            },
        });
    }
    Ok(rows)
}
