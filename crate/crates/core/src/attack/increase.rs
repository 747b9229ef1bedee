use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{finish_plan, Adversary, Metric, PerturbationPlan, SourceRule};
use crate::bh::{bh_bins, outcome_for_count};
use crate::bins::{compute_loads, BinLoads, BinSystem};
use crate::collection::LabeledPValues;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncreaseOptions {
    pub adversary: Adversary,
    pub source_rule: SourceRule,
    pub metric: Metric,
}

/// Largest `i` in `[c, N]` whose first `i` bins hold `i - c` balls.
fn stop_index(loads: &BinLoads, c: usize) -> Option<usize> {
    (c..=loads.n()).rev().find(|&i| loads.prefix_total(i) + c == i)
}

/// Rejection count after INCREASE-c: the stopping index when the tail holds
/// at least `c` nulls, and the unperturbed count otherwise.
pub fn k_plus_c(loads: &BinLoads, c: usize) -> usize {
    if loads.tail_null < c {
        return bh_bins(loads);
    }
    stop_index(loads, c).unwrap_or_else(|| bh_bins(loads))
}

/// As [`k_plus_c`] with the tail condition on all tail balls, which is what
/// an adversary without labels can check.
pub fn k_plus_c_totals(loads: &BinLoads, c: usize) -> usize {
    if loads.tail_total() < c {
        return bh_bins(loads);
    }
    stop_index(loads, c).unwrap_or_else(|| bh_bins(loads))
}

/// INCREASE-c with `N` bins at level `q`.
pub fn increase_c<R: Rng + ?Sized>(
    pv: &LabeledPValues,
    q: f64,
    c: usize,
    adversary: Adversary,
    rng: &mut R,
) -> Result<PerturbationPlan> {
    let bins = BinSystem::new(pv.len(), q)?;
    let opts = IncreaseOptions {
        adversary,
        ..IncreaseOptions::default()
    };
    increase_c_with(pv, &bins, c, &opts, rng)
}

/// INCREASE-c: move `c` tail p-values onto the right edge of bin
/// `k_{+c}`. The random source is used only by the oblivious adversary.
pub fn increase_c_with<R: Rng + ?Sized>(
    pv: &LabeledPValues,
    bins: &BinSystem,
    c: usize,
    opts: &IncreaseOptions,
    rng: &mut R,
) -> Result<PerturbationPlan> {
    if c == 0 {
        return Err(Error::domain("attack budget c must be at least 1"));
    }
    let loads = compute_loads(pv, bins);
    let before = outcome_for_count(pv, bins, bh_bins(&loads));
    let eligible = match opts.adversary {
        Adversary::Omniscient => loads.tail_null,
        Adversary::Oblivious => loads.tail_total(),
    };
    let stop = if eligible >= c { stop_index(&loads, c) } else { None };
    let Some(stop) = stop else {
        return finish_plan(pv, bins, &before, &[], opts.metric);
    };
    let dest = bins.edge(stop);
    let entries = pv.entries();
    let mut pool: Vec<usize> = (0..entries.len())
        .filter(|&i| {
            let e = &entries[i];
            bins.in_tail(e.p) && e.p > dest && (opts.adversary == Adversary::Oblivious || e.label.is_null())
        })
        .collect();
    if pool.len() < c {
        return finish_plan(pv, bins, &before, &[], opts.metric);
    }
    let chosen: Vec<usize> = match opts.adversary {
        Adversary::Omniscient => {
            pool.sort_by(|&a, &b| {
                let (ea, eb) = (&entries[a], &entries[b]);
                let by_p = match opts.source_rule {
                    SourceRule::LargestP => eb.p.total_cmp(&ea.p),
                    SourceRule::SmallestP => ea.p.total_cmp(&eb.p),
                };
                by_p.then(eb.id.cmp(&ea.id))
            });
            pool.truncate(c);
            pool
        }
        Adversary::Oblivious => {
            let mut picked: Vec<usize> = sample(rng, pool.len(), c).into_iter().map(|k| pool[k]).collect();
            picked.sort_unstable();
            picked
        }
    };
    let moves: Vec<(usize, f64)> = chosen.into_iter().map(|i| (i, dest)).collect();
    finish_plan(pv, bins, &before, &moves, opts.metric)
}
