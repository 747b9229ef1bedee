use super::{finish_plan, Metric, PerturbationPlan};
use crate::bh::{fdp_ratio, outcome_for_count};
use crate::bins::BinSystem;
use crate::collection::LabeledPValues;
use crate::error::{Error, Result};

/// Largest collection [`brute_force_1`] accepts.
pub const BRUTE_FORCE_CAP: usize = 14;

/// Exact FDP-optimal single change by exhaustive search, for `N` up to
/// [`BRUTE_FORCE_CAP`].
pub fn brute_force_1(pv: &LabeledPValues, q: f64) -> Result<PerturbationPlan> {
    brute_force_1_capped(pv, q, BRUTE_FORCE_CAP)
}

/// Every test is tried at every bin edge and at 1. BH's output depends on a
/// value only through its bin, so these destinations cover all outcomes.
pub fn brute_force_1_capped(pv: &LabeledPValues, q: f64, cap: usize) -> Result<PerturbationPlan> {
    let n = pv.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let bins = BinSystem::new(n, q)?;
    let before = outcome_for_count(pv, &bins, crate::bh::bh_binned(pv, q)?.k);
    let mut p: Vec<f64> = pv.p_values().collect();
    let nulls: Vec<bool> = pv.entries().iter().map(|e| e.label.is_null()).collect();
    let mut best = (before.fdp, None);
    let dests: Vec<f64> = (0..=n).map(|i| bins.edge(i)).chain([1.0]).collect();
    for idx in 0..n {
        let old = p[idx];
        for &dest in &dests {
            p[idx] = dest;
            let fdp = bh_fdp(&p, &nulls, &bins);
            if fdp > best.0 {
                best = (fdp, Some((idx, dest)));
            }
        }
        p[idx] = old;
    }
    let moves: Vec<(usize, f64)> = best.1.into_iter().collect();
    finish_plan(pv, &bins, &before, &moves, Metric::P)
}

fn bh_fdp(p: &[f64], nulls: &[bool], bins: &BinSystem) -> f64 {
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = (1..=p.len())
        .rev()
        .find(|&i| sorted[i - 1] <= bins.edge(i))
        .unwrap_or(0);
    if k == 0 {
        return 0.0;
    }
    let cut = bins.edge(k);
    let false_count = p.iter().zip(nulls).filter(|&(&x, &null)| null && x <= cut).count();
    fdp_ratio(false_count, k)
}
