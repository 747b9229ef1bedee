use serde::{Deserialize, Serialize};

use super::{finish_plan, Metric, PerturbationPlan};
use crate::bh::{bh_bins, fdp_ratio, outcome_for_count};
use crate::bins::{compute_loads, BinLoads, BinSystem};
use crate::collection::LabeledPValues;
use crate::error::Result;

/// The rejection counts one move can induce besides the current one.
///
/// `l` holds the counts above `k̃` (reached by pulling a value down), `r` the
/// counts below it (reached by pushing a value past bin `k̃`), and `i_star`
/// is the lowest member of `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSets {
    pub k: usize,
    pub l: Vec<usize>,
    pub r: Vec<usize>,
    pub i_star: usize,
}

pub fn candidate_sets(loads: &BinLoads) -> CandidateSets {
    let n = loads.n();
    let k = bh_bins(loads);
    let i_star = (1..k).rev().find(|&i| loads.prefix_total(i) == i + 1).unwrap_or(0);
    let l = (k + 1..=n).filter(|&i| loads.prefix_total(i) + 1 == i).collect();
    let mut r = vec![i_star];
    r.extend((i_star + 1..k).filter(|&i| loads.prefix_total(i) == i));
    CandidateSets { k, l, r, i_star }
}

/// MOVE-1 with `N` bins at level `q`, breaking ties by p-value distance.
pub fn move_1(pv: &LabeledPValues, q: f64) -> Result<PerturbationPlan> {
    let bins = BinSystem::new(pv.len(), q)?;
    move_1_with(pv, &bins, Metric::P)
}

#[derive(Clone, Copy)]
struct Source {
    idx: usize,
    p: f64,
}

fn keep_min(slot: &mut Option<Source>, cand: Source) {
    if slot.is_none_or(|s| cand.p < s.p) {
        *slot = Some(cand);
    }
}

fn keep_max(slot: &mut Option<Source>, cand: Source) {
    if slot.is_none_or(|s| cand.p > s.p) {
        *slot = Some(cand);
    }
}

/// Maps each bin position (1..=N+1) to the candidate whose source window
/// contains it. Window of `c[a]` is `(c[a], c[a+1]]`; the last one ends at
/// `last_end`.
fn window_owners(cands: &[usize], last_end: usize, n: usize) -> Vec<Option<usize>> {
    let mut owner = vec![None; n + 2];
    for (a, &lo) in cands.iter().enumerate() {
        let hi = cands.get(a + 1).copied().unwrap_or(last_end);
        for slot in owner.iter_mut().take(hi + 1).skip(lo + 1) {
            *slot = Some(a);
        }
    }
    owner
}

/// The single change maximizing BH's FDP, found in one pass over the
/// collection. Among optimal moves the one of least `metric` distance is
/// returned; leaving the collection alone has distance zero.
pub fn move_1_with(pv: &LabeledPValues, bins: &BinSystem, metric: Metric) -> Result<PerturbationPlan> {
    let n = bins.n();
    let loads = compute_loads(pv, bins);
    let sets = candidate_sets(&loads);
    let k = sets.k;
    let before = outcome_for_count(pv, bins, k);

    let l_owner = window_owners(&sets.l, n + 1, n);
    let regular: &[usize] = if sets.i_star >= 1 { &sets.r[1..] } else { &sets.r };
    let r_owner = window_owners(regular, k, n);

    let mut l_null = vec![None; sets.l.len()];
    let mut l_alt = vec![None; sets.l.len()];
    let mut r_best = vec![None; regular.len()];
    let (mut star_alt, mut star_null) = (None, None);

    for (idx, e) in pv.entries().iter().enumerate() {
        let pos = bins.position(e.p);
        let src = Source { idx, p: e.p };
        if let Some(a) = l_owner[pos] {
            if e.label.is_null() {
                keep_min(&mut l_null[a], src);
            } else {
                keep_min(&mut l_alt[a], src);
            }
        }
        if let Some(a) = r_owner[pos] {
            keep_max(&mut r_best[a], src);
        }
        if sets.i_star >= 1 && pos <= sets.i_star {
            if e.label.is_null() {
                keep_max(&mut star_null, src);
            } else {
                keep_max(&mut star_alt, src);
            }
        }
    }

    // (fdp, distance, move)
    let mut best: (f64, f64, Option<(usize, f64)>) = (before.fdp, 0.0, None);
    let mut offer = |fdp: f64, src: Source, dest: f64| {
        let dist = metric.distance(src.p, dest);
        if fdp > best.0 || (fdp == best.0 && dist < best.1) {
            best = (fdp, dist, Some((src.idx, dest)));
        }
    };

    for (a, &i) in sets.l.iter().enumerate() {
        let dest = bins.edge(i);
        if let Some(src) = l_null[a] {
            offer(fdp_ratio(loads.prefix_null(i) + 1, i), src, dest);
        } else if let Some(src) = l_alt[a] {
            offer(fdp_ratio(loads.prefix_null(i), i), src, dest);
        }
    }
    let past_k = bins.edge(k).next_up();
    for (a, &i) in regular.iter().enumerate() {
        if let Some(src) = r_best[a] {
            offer(fdp_ratio(loads.prefix_null(i), i), src, past_k);
        }
    }
    if sets.i_star >= 1 {
        let i = sets.i_star;
        if let Some(src) = star_alt {
            offer(fdp_ratio(loads.prefix_null(i), i), src, past_k);
        } else if let Some(src) = star_null {
            offer(fdp_ratio(loads.prefix_null(i) - 1, i), src, past_k);
        }
    }

    let moves: Vec<(usize, f64)> = best.2.into_iter().collect();
    let plan = finish_plan(pv, bins, &before, &moves, metric)?;
    debug_assert_eq!(plan.fdp_after, best.0);
    Ok(plan)
}
