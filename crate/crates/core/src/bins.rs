//! The balls-into-bins view of a p-value collection.
//!
//! Bin `i` (1-based, `1 <= i <= N`) covers `((i-1)q/N, iq/N]`, with bin 1
//! closed at zero. A p-value lies in the first `i` bins exactly when it is at
//! most the BH threshold `iq/N`, so prefix loads and the sorted BH rule agree
//! on ties. Above the bins sits the tail region, bin `N + 1`.

use serde::{Deserialize, Serialize};

use crate::collection::{check_p, LabeledPValues, TestEntry};
use crate::error::{Error, Result};

/// Which p-values count as the tail bin `N + 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRegion {
    /// Everything above the last bin, `(q, 1]`. Null mass `1 - q`.
    #[default]
    Complement,
    /// The upper segment `[1 - q, 1]`. Null mass `q`. Leaves `(q, 1 - q)`
    /// unbinned when `q < 1/2` and overlaps the bins when `q > 1/2`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSystem {
    n: usize,
    q: f64,
    tail: TailRegion,
}

impl BinSystem {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        Self::with_tail(n, q, TailRegion::default())
    }

    pub fn with_tail(n: usize, q: f64, tail: TailRegion) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("bin count must be at least 1"));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("control level {q} outside (0, 1)")));
        }
        Ok(Self { n, q, tail })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn tail(&self) -> TailRegion {
        self.tail
    }

    pub fn width(&self) -> f64 {
        self.q / self.n as f64
    }

    /// Right edge of bin `i`, which is also the BH threshold `iq/N`.
    ///
    /// Every comparison against a threshold in this crate goes through this
    /// expression so that rounding is identical everywhere.
    #[inline]
    pub fn edge(&self, i: usize) -> f64 {
        i as f64 * self.q / self.n as f64
    }

    /// Probability that a uniform p-value lands in the tail region.
    pub fn tail_mass(&self) -> f64 {
        match self.tail {
            TailRegion::Complement => 1.0 - self.q,
            TailRegion::Upper => self.q,
        }
    }

    #[inline]
    pub fn in_tail(&self, p: f64) -> bool {
        match self.tail {
            TailRegion::Complement => p > self.edge(self.n),
            TailRegion::Upper => p >= 1.0 - self.q,
        }
    }

    /// Bin holding `p`, or `None` when `p` lies above the last bin.
    pub fn assign_bin(&self, p: f64) -> Result<Option<usize>> {
        check_p(p)?;
        let pos = self.position(p);
        Ok((pos <= self.n).then_some(pos))
    }

    /// Bin index of `p` with `N + 1` standing for "above every bin".
    /// `p` must already be known to lie in `[0, 1]`.
    #[inline]
    pub(crate) fn position(&self, p: f64) -> usize {
        let n = self.n;
        if p > self.edge(n) {
            return n + 1;
        }
        let guess = (p * n as f64 / self.q).ceil();
        let mut i = if guess.is_finite() {
            (guess as usize).clamp(1, n)
        } else {
            n
        };
        while i > 1 && p <= self.edge(i - 1) {
            i -= 1;
        }
        while p > self.edge(i) {
            i += 1;
        }
        i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    Total,
    Null,
    Alt,
}

/// Per-bin null, alternative and total counts plus the tail counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinLoads {
    null: Vec<u32>,
    alt: Vec<u32>,
    prefix_null: Vec<u32>,
    prefix_alt: Vec<u32>,
    pub tail_null: usize,
    pub tail_alt: usize,
}

impl BinLoads {
    pub fn from_entries(entries: &[TestEntry], bins: &BinSystem) -> Self {
        Self::tally(entries.iter().map(|e| (e.p, e.label.is_null())), bins)
    }

    /// Loads of a bare p-value slice whose first `n_null` entries are nulls.
    pub fn from_split(p: &[f64], n_null: usize, bins: &BinSystem) -> Self {
        Self::tally(p.iter().enumerate().map(|(i, &x)| (x, i < n_null)), bins)
    }

    fn tally(items: impl Iterator<Item = (f64, bool)>, bins: &BinSystem) -> Self {
        let n = bins.n();
        let mut null = vec![0u32; n];
        let mut alt = vec![0u32; n];
        let (mut tail_null, mut tail_alt) = (0, 0);
        for (p, is_null) in items {
            let pos = bins.position(p);
            if pos <= n {
                if is_null {
                    null[pos - 1] += 1;
                } else {
                    alt[pos - 1] += 1;
                }
            }
            if bins.in_tail(p) {
                if is_null {
                    tail_null += 1;
                } else {
                    tail_alt += 1;
                }
            }
        }
        Self::from_counts(null, alt, tail_null, tail_alt)
    }

    /// Builds loads directly from per-bin counts.
    pub fn from_counts(null: Vec<u32>, alt: Vec<u32>, tail_null: usize, tail_alt: usize) -> Self {
        assert_eq!(null.len(), alt.len(), "null and alt loads differ in length");
        let prefix = |v: &[u32]| {
            let mut out = Vec::with_capacity(v.len() + 1);
            out.push(0u32);
            let mut acc = 0u32;
            for &x in v {
                acc += x;
                out.push(acc);
            }
            out
        };
        Self {
            prefix_null: prefix(&null),
            prefix_alt: prefix(&alt),
            null,
            alt,
            tail_null,
            tail_alt,
        }
    }

    /// Loads with every ball counted as an alternative, for totals-only
    /// reasoning.
    pub fn from_totals(total: &[u32], tail_total: usize) -> Self {
        Self::from_counts(vec![0; total.len()], total.to_vec(), 0, tail_total)
    }

    pub fn n(&self) -> usize {
        self.null.len()
    }

    pub fn total(&self, i: usize) -> u32 {
        self.null[i - 1] + self.alt[i - 1]
    }

    pub fn null(&self, i: usize) -> u32 {
        self.null[i - 1]
    }

    pub fn alt(&self, i: usize) -> u32 {
        self.alt[i - 1]
    }

    pub fn totals(&self) -> Vec<u32> {
        (1..=self.n()).map(|i| self.total(i)).collect()
    }

    pub fn tail_total(&self) -> usize {
        self.tail_null + self.tail_alt
    }

    /// Sum of the chosen loads over bins `1..=i`.
    pub fn prefix_load(&self, kind: LoadKind, i: usize) -> Result<usize> {
        if i > self.n() {
            return Err(Error::domain(format!(
                "prefix index {i} exceeds bin count {}",
                self.n()
            )));
        }
        Ok(match kind {
            LoadKind::Total => self.prefix_total(i),
            LoadKind::Null => self.prefix_null(i),
            LoadKind::Alt => self.prefix_alt[i] as usize,
        })
    }

    /// Unchecked total prefix; `i <= N`.
    #[inline]
    pub fn prefix_total(&self, i: usize) -> usize {
        (self.prefix_null[i] + self.prefix_alt[i]) as usize
    }

    #[inline]
    pub fn prefix_null(&self, i: usize) -> usize {
        self.prefix_null[i] as usize
    }
}

pub fn compute_loads(pv: &LabeledPValues, bins: &BinSystem) -> BinLoads {
    BinLoads::from_entries(pv.entries(), bins)
}
