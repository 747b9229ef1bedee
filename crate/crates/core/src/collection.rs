//! Labeled p-value collections and their CSV form.
//!
//! The CSV layout is `test_id,p_value,label` with `label` 0 for a true null
//! and 1 for an alternative.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 3] = ["test_id", "p_value", "label"];

/// Ground truth for one test, as seen by an omniscient adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestLabel {
    Null,
    Alternative,
}

impl TestLabel {
    pub fn is_null(self) -> bool {
        self == TestLabel::Null
    }

    /// CSV code: 0 = null, 1 = alternative.
    pub fn code(self) -> u8 {
        match self {
            TestLabel::Null => 0,
            TestLabel::Alternative => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TestLabel::Null),
            1 => Some(TestLabel::Alternative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub id: u64,
    pub p: f64,
    pub label: TestLabel,
}

impl TestEntry {
    pub fn new(id: u64, p: f64, label: TestLabel) -> Self {
        Self { id, p, label }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("p-value {p} outside [0, 1]")))
    }
}

/// A non-empty collection of tests with unique ids and p-values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPValues {
    entries: Vec<TestEntry>,
    n_null: usize,
}

impl LabeledPValues {
    pub fn new(entries: Vec<TestEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("a collection needs at least one test"));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            check_p(e.p)?;
            if !seen.insert(e.id) {
                return Err(Error::domain(format!("duplicate test id {}", e.id)));
            }
        }
        let n_null = entries.iter().filter(|e| e.label.is_null()).count();
        Ok(Self { entries, n_null })
    }

    /// Builds a collection with ids `0..` from parallel p-value and label slices.
    pub fn from_parts(p: &[f64], labels: &[TestLabel]) -> Result<Self> {
        if p.len() != labels.len() {
            return Err(Error::domain(format!(
                "{} p-values but {} labels",
                p.len(),
                labels.len()
            )));
        }
        let entries = p
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (&p, &label))| TestEntry::new(i as u64, p, label))
            .collect();
        Self::new(entries)
    }

    /// Rebuilds a collection whose ids are known to be unique and whose
    /// p-values have been checked.
    pub(crate) fn from_checked(entries: Vec<TestEntry>) -> Self {
        let n_null = entries.iter().filter(|e| e.label.is_null()).count();
        Self { entries, n_null }
    }

    pub fn entries(&self) -> &[TestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_null(&self) -> usize {
        self.n_null
    }

    pub fn n_alt(&self) -> usize {
        self.entries.len() - self.n_null
    }

    pub fn pi0(&self) -> f64 {
        self.n_null as f64 / self.entries.len() as f64
    }

    pub fn get(&self, id: u64) -> Option<&TestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn p_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.p)
    }

    /// Returns a copy with the p-values of the given ids replaced.
    pub fn with_values(&self, updates: &[(u64, f64)]) -> Result<Self> {
        let mut entries = self.entries.clone();
        for &(id, p) in updates {
            check_p(p)?;
            let e = entries
                .iter_mut()
                .find(|e| e.id == id)
                .ok_or_else(|| Error::domain(format!("unknown test id {id}")))?;
            e.p = p;
        }
        Ok(Self {
            entries,
            n_null: self.n_null,
        })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_error(&e, 1))?.clone();
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `{}`", CSV_HEADER.join(",")),
            });
        }
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(&e, 0))?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |msg: String| Error::Parse { line, msg };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let id: u64 = rec[0]
                .parse()
                .map_err(|_| bad(format!("invalid test_id `{}`", &rec[0])))?;
            let p: f64 = rec[1]
                .parse()
                .map_err(|_| bad(format!("invalid p_value `{}`", &rec[1])))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(format!("p_value {p} outside [0, 1]")));
            }
            let label = rec[2]
                .parse::<u8>()
                .ok()
                .and_then(TestLabel::from_code)
                .ok_or_else(|| bad(format!("label must be 0 or 1, found `{}`", &rec[2])))?;
            if !seen.insert(id) {
                return Err(bad(format!("duplicate test_id {id}")));
            }
            entries.push(TestEntry::new(id, p, label));
        }
        if entries.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "no data rows".into(),
            });
        }
        Self::new(entries)
    }

    /// Writes the collection with round-trip exact p-values.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", CSV_HEADER.join(","))?;
        for e in &self.entries {
            writeln!(w, "{},{:?},{}", e.id, e.p, e.label.code())?;
        }
        Ok(())
    }
}

pub(crate) fn csv_error(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(std::io::Error::new(io.kind(), io.to_string())),
        _ => Error::Parse {
            line,
            msg: e.to_string(),
        },
    }
}
