//! BH and INCREASE-c on marginal conformal p-values for outlier detection.
//!
//! Inliers come from a three-component Gaussian mixture, outliers from the
//! same mixture with noise inflated by `sqrt(a)`. Points are scored by their
//! mean distance to the nearest training inliers and turned into p-values by
//! ranking against a calibration set of inliers.

mod data;
mod ingest;

pub use data::{component_mean, draw_mixture, one_class_score, score_all, MixtureDraw, Points};
pub use ingest::{ingested_pvalues, read_score_csv, ScoreRecord, Split, SCORE_CSV_HEADER};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attack::{increase_c_with, k_plus_c, IncreaseOptions};
use crate::bh::{bh_bins, fdp_ratio};
use crate::bins::{BinLoads, BinSystem};
use crate::collection::{LabeledPValues, TestEntry, TestLabel};
use crate::error::{Error, Result};
use crate::rng::{replicate, tagged_stream};
use crate::stats::MeanSe;

/// Denominator of the conformal p-value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `(1 + #{cal >= s}) / (n_cal + 1)`, super-uniform for inliers.
    #[default]
    CalPlusOne,
    /// `(1 + #{cal >= s}) / n_cal`, capped at 1.
    Printed,
}

/// Conformal p-values of `test` scores against `cal` scores, larger scores
/// being more anomalous.
pub fn conformal_pvalues(cal: &[f64], test: &[f64], denominator: Denominator) -> Result<Vec<f64>> {
    if cal.is_empty() {
        return Err(Error::domain("calibration set is empty"));
    }
    if cal.iter().chain(test).any(|s| s.is_nan()) {
        return Err(Error::domain("scores must not be NaN"));
    }
    let mut sorted = cal.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let denom = match denominator {
        Denominator::CalPlusOne => (n + 1) as f64,
        Denominator::Printed => n as f64,
    };
    Ok(test
        .iter()
        .map(|&s| {
            let at_least = n - sorted.partition_point(|&x| x < s);
            ((1 + at_least) as f64 / denom).min(1.0)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalConfig {
    pub dim: usize,
    pub n_train: usize,
    pub n_cal: usize,
    pub n_test: usize,
    /// Outlier noise inflation factors `a >= 1`.
    pub a_values: Vec<f64>,
    pub outlier_fraction: f64,
    pub c_values: Vec<usize>,
    pub q: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub k_neighbors: usize,
    pub denominator: Denominator,
}

impl Default for ConformalConfig {
    fn default() -> Self {
        Self {
            dim: 50,
            n_train: 1000,
            n_cal: 1000,
            n_test: 1000,
            a_values: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            outlier_fraction: 0.1,
            c_values: vec![1, 5, 10, 50],
            q: 0.1,
            reps: 1000,
            master_seed: 0,
            k_neighbors: 10,
            denominator: Denominator::default(),
        }
    }
}

impl ConformalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::domain("dimension must be at least 2"));
        }
        if self.n_train == 0 || self.n_cal == 0 || self.n_test == 0 {
            return Err(Error::domain("train, calibration and test sets must be non-empty"));
        }
        if self.a_values.is_empty() || self.a_values.iter().any(|a| !(*a >= 1.0 && a.is_finite())) {
            return Err(Error::domain("signal strengths a must be finite and at least 1"));
        }
        if !(0.0..=1.0).contains(&self.outlier_fraction) {
            return Err(Error::domain("outlier fraction outside [0, 1]"));
        }
        if self.c_values.is_empty() || self.c_values.contains(&0) {
            return Err(Error::domain("attack budgets c must be at least 1"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::domain(format!("control level {} outside (0, 1)", self.q)));
        }
        if self.reps == 0 || self.k_neighbors == 0 {
            return Err(Error::domain("reps and k must be at least 1"));
        }
        Ok(())
    }

    pub fn n_outliers(&self) -> usize {
        (self.n_test as f64 * self.outlier_fraction).round() as usize
    }
}

/// Train, calibration and test sets for one signal strength.
#[derive(Debug, Clone)]
pub struct MixtureSets {
    pub train: Points,
    pub cal: Points,
    /// Inliers first, then outliers.
    pub test: Points,
    pub test_outlier: Vec<bool>,
}

pub fn generate_mixture<R: Rng + ?Sized>(config: &ConformalConfig, a: f64, rng: &mut R) -> Result<MixtureSets> {
    config.validate()?;
    let dim = config.dim;
    let train = draw_mixture(rng, dim, config.n_train, 1.0);
    let cal = draw_mixture(rng, dim, config.n_cal, 1.0);
    let n_out = config.n_outliers();
    let mut test = draw_mixture(rng, dim, config.n_test - n_out, 1.0);
    let outliers = draw_mixture(rng, dim, n_out, a.sqrt());
    for row in outliers.rows() {
        test.push(row);
    }
    let test_outlier = (0..config.n_test).map(|i| i >= config.n_test - n_out).collect();
    Ok(MixtureSets {
        train,
        cal,
        test,
        test_outlier,
    })
}

/// Conformal p-values for the test set together with the scores behind them.
#[derive(Debug, Clone)]
pub struct ScoredTestSet {
    pub features: Points,
    pub outlier: Vec<bool>,
    pub scores: Vec<f64>,
    pub pvalues: Vec<f64>,
}

impl ScoredTestSet {
    pub fn score(sets: &MixtureSets, k: usize, denominator: Denominator) -> Result<Self> {
        let cal = score_all(&sets.cal, &sets.train, k);
        let scores = score_all(&sets.test, &sets.train, k);
        let pvalues = conformal_pvalues(&cal, &scores, denominator)?;
        Ok(Self {
            features: sets.test.clone(),
            outlier: sets.test_outlier.clone(),
            scores,
            pvalues,
        })
    }

    /// Inliers are the nulls.
    pub fn collection(&self) -> LabeledPValues {
        labelled(&self.pvalues, &self.outlier)
    }
}

fn labelled(p: &[f64], outlier: &[bool]) -> LabeledPValues {
    let entries = p
        .iter()
        .zip(outlier)
        .enumerate()
        .map(|(i, (&p, &out))| {
            let label = if out { TestLabel::Alternative } else { TestLabel::Null };
            TestEntry::new(i as u64, p, label)
        })
        .collect();
    LabeledPValues::from_checked(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalRow {
    pub a: f64,
    pub c: usize,
    pub fdp_before: MeanSe,
    pub fdp_after: MeanSe,
    pub k_increase: MeanSe,
    /// Replications where the attack missed `k_{+c}`; always zero.
    pub identity_violations: usize,
}

struct RepOutcome {
    // Indexed [a][c].
    fdp_before: Vec<f64>,
    fdp_after: Vec<Vec<f64>>,
    k_increase: Vec<Vec<f64>>,
    violations: Vec<Vec<bool>>,
}

/// The attack table: for every `(a, c)`, the mean FDP of BH before and after
/// INCREASE-c. The training set is drawn once; each replication draws fresh
/// calibration and test sets shared by all `a`.
pub fn run_conformal_attack(config: &ConformalConfig) -> Result<Vec<ConformalRow>> {
    config.validate()?;
    let dim = config.dim;
    let k = config.k_neighbors;
    let train = draw_mixture(&mut tagged_stream(config.master_seed, 0, 0), dim, config.n_train, 1.0);
    let n_out = config.n_outliers();
    let n_in = config.n_test - n_out;
    let bins = BinSystem::new(config.n_test, config.q)?;
    let outlier: Vec<bool> = (0..config.n_test).map(|i| i >= n_in).collect();

    let reps = replicate(config.master_seed, config.reps, |_, rng| -> Result<RepOutcome> {
        let cal = score_all(&draw_mixture(rng, dim, config.n_cal, 1.0), &train, k);
        let inlier_scores = score_all(&draw_mixture(rng, dim, n_in, 1.0), &train, k);
        let outliers = MixtureDraw::sample(rng, dim, n_out);
        let mut out = RepOutcome {
            fdp_before: Vec::new(),
            fdp_after: Vec::new(),
            k_increase: Vec::new(),
            violations: Vec::new(),
        };
        for &a in &config.a_values {
            let mut scores = inlier_scores.clone();
            scores.extend(score_all(&outliers.points(a.sqrt()), &train, k));
            let p = conformal_pvalues(&cal, &scores, config.denominator)?;
            let loads = BinLoads::from_split(&p, n_in, &bins);
            let k0 = bh_bins(&loads);
            out.fdp_before.push(fdp_ratio(loads.prefix_null(k0), k0));
            let pv = labelled(&p, &outlier);
            let (mut fa, mut ki, mut vi) = (Vec::new(), Vec::new(), Vec::new());
            for &c in &config.c_values {
                let plan = increase_c_with(&pv, &bins, c, &IncreaseOptions::default(), rng)?;
                fa.push(plan.fdp_after);
                ki.push(plan.induced_k as f64 - k0 as f64);
                vi.push(plan.induced_k != k_plus_c(&loads, c));
            }
            out.fdp_after.push(fa);
            out.k_increase.push(ki);
            out.violations.push(vi);
        }
        Ok(out)
    });
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (ai, &a) in config.a_values.iter().enumerate() {
        let before = MeanSe::of_iter(reps.iter().map(|r| r.fdp_before[ai]));
        for (ci, &c) in config.c_values.iter().enumerate() {
            rows.push(ConformalRow {
                a,
                c,
                fdp_before: before,
                fdp_after: MeanSe::of_iter(reps.iter().map(|r| r.fdp_after[ai][ci])),
                k_increase: MeanSe::of_iter(reps.iter().map(|r| r.k_increase[ai][ci])),
                identity_violations: reps.iter().filter(|r| r.violations[ai][ci]).count(),
            });
        }
    }
    Ok(rows)
}
