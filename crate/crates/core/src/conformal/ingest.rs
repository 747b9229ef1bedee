//! Externally computed anomaly scores in `id,score,label,split` form.

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{conformal_pvalues, Denominator};
use crate::collection::{csv_error, LabeledPValues, TestEntry, TestLabel};
use crate::error::{Error, Result};

pub const SCORE_CSV_HEADER: [&str; 4] = ["id", "score", "label", "split"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Cal,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: u64,
    /// Larger means more anomalous.
    pub score: f64,
    pub label: TestLabel,
    pub split: Split,
}

/// Parses a score file. At least one calibration and one test row are
/// required and ids must be unique.
pub fn read_score_csv<R: Read>(reader: R) -> Result<Vec<ScoreRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(&e, 1))?.clone();
    if headers.iter().collect::<Vec<_>>() != SCORE_CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", SCORE_CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&e, 0))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| Error::Parse { line, msg };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let id: u64 = rec[0].parse().map_err(|_| bad(format!("invalid id `{}`", &rec[0])))?;
        let score: f64 = rec[1]
            .parse()
            .map_err(|_| bad(format!("invalid score `{}`", &rec[1])))?;
        if !score.is_finite() {
            return Err(bad(format!("score {score} is not finite")));
        }
        let label = rec[2]
            .parse::<u8>()
            .ok()
            .and_then(TestLabel::from_code)
            .ok_or_else(|| bad(format!("label must be 0 or 1, found `{}`", &rec[2])))?;
        let split = match &rec[3] {
            "cal" => Split::Cal,
            "test" => Split::Test,
            other => return Err(bad(format!("split must be cal or test, found `{other}`"))),
        };
        if !seen.insert(id) {
            return Err(bad(format!("duplicate id {id}")));
        }
        out.push(ScoreRecord {
            id,
            score,
            label,
            split,
        });
    }
    for (split, name) in [(Split::Cal, "calibration"), (Split::Test, "test")] {
        if !out.iter().any(|r| r.split == split) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("no {name} rows"),
            });
        }
    }
    Ok(out)
}

/// Conformal p-values of the test rows, labelled as in the file.
pub fn ingested_pvalues(records: &[ScoreRecord], denominator: Denominator) -> Result<LabeledPValues> {
    let cal: Vec<f64> = records
        .iter()
        .filter(|r| r.split == Split::Cal)
        .map(|r| r.score)
        .collect();
    let tests: Vec<&ScoreRecord> = records.iter().filter(|r| r.split == Split::Test).collect();
    let scores: Vec<f64> = tests.iter().map(|r| r.score).collect();
    let p = conformal_pvalues(&cal, &scores, denominator)?;
    let entries = tests
        .iter()
        .zip(p)
        .map(|(r, p)| TestEntry::new(r.id, p, r.label))
        .collect();
    LabeledPValues::new(entries)
}
