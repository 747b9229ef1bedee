//! Adversarial single-shot perturbations of a p-value collection.
//!
//! [`increase_c`] drags `c` tail p-values down into the bins, [`move_1`] finds
//! the FDP-optimal single change, and [`brute_force_1`] checks it on small
//! instances by exhaustive search.

mod brute;
mod increase;
mod move_one;

pub use brute::{brute_force_1, brute_force_1_capped, BRUTE_FORCE_CAP};
pub use increase::{increase_c, increase_c_with, k_plus_c, k_plus_c_totals, IncreaseOptions};
pub use move_one::{candidate_sets, move_1, move_1_with, CandidateSets};

use serde::{Deserialize, Serialize};

use crate::bh::{bh_bins, outcome_for_count, RejectionOutcome};
use crate::bins::{compute_loads, BinSystem};
use crate::collection::{check_p, LabeledPValues};
use crate::error::Result;
use crate::gauss::p_to_z;

/// Whether the adversary sees the null/alternative labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    #[default]
    Omniscient,
    Oblivious,
}

/// Which tail nulls INCREASE-c moves when it has more than `c` to choose from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRule {
    /// The `c` largest p-values.
    #[default]
    LargestP,
    /// The `c` smallest tail p-values, i.e. the ones nearest the bins.
    SmallestP,
}

/// Distance used to report a perturbation and to break ties between
/// equally damaging single moves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `|p - p'|`.
    #[default]
    P,
    /// `|z - z'|` with `z = Phi^-1(1 - p)`.
    Z,
}

impl Metric {
    pub fn distance(self, from: f64, to: f64) -> f64 {
        match self {
            Metric::P => (from - to).abs(),
            Metric::Z => (p_to_z(from) - p_to_z(to)).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub id: u64,
    pub old_p: f64,
    pub new_p: f64,
}

/// An attack's output together with BH's response to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub moves: Vec<Move>,
    pub k_before: usize,
    pub fdp_before: f64,
    pub induced_k: usize,
    pub fdp_after: f64,
    pub l0_distance: usize,
    pub p_l1_distance: f64,
    /// Filled in when the plan was built under [`Metric::Z`].
    pub z_l1_distance: Option<f64>,
}

impl PerturbationPlan {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// The collection with the moves applied.
    pub fn apply(&self, pv: &LabeledPValues) -> Result<LabeledPValues> {
        let updates: Vec<(u64, f64)> = self.moves.iter().map(|m| (m.id, m.new_p)).collect();
        pv.with_values(&updates)
    }
}

/// Applies moves given by entry position, reruns BH and assembles the plan.
pub(crate) fn finish_plan(
    pv: &LabeledPValues,
    bins: &BinSystem,
    before: &RejectionOutcome,
    moves: &[(usize, f64)],
    metric: Metric,
) -> Result<PerturbationPlan> {
    let mut entries = pv.entries().to_vec();
    let mut out = Vec::with_capacity(moves.len());
    let (mut p_l1, mut z_l1) = (0.0, 0.0);
    for &(idx, new_p) in moves {
        check_p(new_p)?;
        let e = &mut entries[idx];
        out.push(Move {
            id: e.id,
            old_p: e.p,
            new_p,
        });
        p_l1 += (e.p - new_p).abs();
        if metric == Metric::Z {
            z_l1 += Metric::Z.distance(e.p, new_p);
        }
        e.p = new_p;
    }
    let after_pv = LabeledPValues::from_checked(entries);
    let loads = compute_loads(&after_pv, bins);
    let after = outcome_for_count(&after_pv, bins, bh_bins(&loads));
    Ok(PerturbationPlan {
        l0_distance: out.len(),
        moves: out,
        k_before: before.k,
        fdp_before: before.fdp,
        induced_k: after.k,
        fdp_after: after.fdp,
        p_l1_distance: p_l1,
        z_l1_distance: (metric == Metric::Z).then_some(z_l1),
    })
}
