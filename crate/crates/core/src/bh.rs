//! The BH step-up procedure, in sorted form and in balls-into-bins form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bins::{BinLoads, BinSystem};
use crate::collection::LabeledPValues;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionOutcome {
    /// Rejection count.
    pub k: usize,
    /// Ids of the rejected tests, ascending.
    pub rejected_ids: Vec<u64>,
    /// Number of rejected true nulls.
    pub false_count: usize,
    pub fdp: f64,
}

/// `false_count / max(rejections, 1)`.
#[inline]
pub fn fdp_ratio(false_count: usize, rejections: usize) -> f64 {
    false_count as f64 / rejections.max(1) as f64
}

/// Classical BH: sort, find the largest `i` with `p_(i) <= iq/N`, reject the
/// `i` smallest p-values.
pub fn bh_sorted(pv: &LabeledPValues, q: f64) -> Result<RejectionOutcome> {
    let bins = BinSystem::new(pv.len(), q)?;
    let mut sorted: Vec<f64> = pv.p_values().collect();
    sorted.sort_by(f64::total_cmp);
    let i_max = sorted
        .iter()
        .enumerate()
        .rev()
        .find(|&(i, &p)| p <= bins.edge(i + 1))
        .map_or(0, |(i, _)| i + 1);
    let cutoff = if i_max == 0 { None } else { Some(sorted[i_max - 1]) };
    let mut rejected_ids = Vec::with_capacity(i_max);
    let mut false_count = 0;
    if let Some(cut) = cutoff {
        for e in pv.entries().iter().filter(|e| e.p <= cut) {
            rejected_ids.push(e.id);
            false_count += usize::from(e.label.is_null());
        }
    }
    rejected_ids.sort_unstable();
    debug_assert_eq!(rejected_ids.len(), i_max);
    Ok(RejectionOutcome {
        k: i_max,
        rejected_ids,
        false_count,
        fdp: fdp_ratio(false_count, i_max),
    })
}

/// Rejection count in bin form: the largest `i` whose first `i` bins hold
/// exactly `i` balls, or 0.
pub fn bh_bins(loads: &BinLoads) -> usize {
    (1..=loads.n()).rev().find(|&i| loads.prefix_total(i) == i).unwrap_or(0)
}

/// Outcome of rejecting every test in the first `k` bins.
pub fn outcome_for_count(pv: &LabeledPValues, bins: &BinSystem, k: usize) -> RejectionOutcome {
    let mut rejected_ids = Vec::with_capacity(k);
    let mut false_count = 0;
    if k > 0 {
        let cut = bins.edge(k);
        for e in pv.entries().iter().filter(|e| e.p <= cut) {
            rejected_ids.push(e.id);
            false_count += usize::from(e.label.is_null());
        }
    }
    rejected_ids.sort_unstable();
    RejectionOutcome {
        k,
        false_count,
        fdp: fdp_ratio(false_count, rejected_ids.len()),
        rejected_ids,
    }
}

/// Binned BH on a collection, with `N` bins.
pub fn bh_binned(pv: &LabeledPValues, q: f64) -> Result<RejectionOutcome> {
    let bins = BinSystem::new(pv.len(), q)?;
    let loads = crate::bins::compute_loads(pv, &bins);
    Ok(outcome_for_count(pv, &bins, bh_bins(&loads)))
}

/// False detection proportion of an arbitrary rejected set.
pub fn fdp(rejected_ids: &[u64], pv: &LabeledPValues) -> Result<f64> {
    let labels: HashMap<u64, bool> = pv.entries().iter().map(|e| (e.id, e.label.is_null())).collect();
    let mut false_count = 0;
    for id in rejected_ids {
        match labels.get(id) {
            Some(&is_null) => false_count += usize::from(is_null),
            None => return Err(Error::domain(format!("unknown test id {id}"))),
        }
    }
    Ok(fdp_ratio(false_count, rejected_ids.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bins::compute_loads;
    use crate::collection::TestLabel::{self, Alternative as A, Null as H0};
    use crate::fixtures::five_tests;
    use proptest::prelude::*;

    fn lemma2_holds(loads: &BinLoads, k: usize) -> bool {
        (k + 1..=loads.n()).all(|i| loads.prefix_total(i) < i)
    }

    #[test]
    fn sorted_example() {
        let pv = LabeledPValues::from_parts(&[0.05, 0.2, 0.3, 0.8, 0.9], &[A, A, H0, H0, H0]).unwrap();
        let out = bh_sorted(&pv, 0.5).unwrap();
        assert_eq!(out.k, 3);
        assert_eq!(out.rejected_ids, vec![0, 1, 2]);
        assert_eq!(out.false_count, 1);
        assert!((out.fdp - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_collections() {
        let ones = LabeledPValues::from_parts(&[1.0; 4], &[H0; 4]).unwrap();
        let out = bh_sorted(&ones, 0.1).unwrap();
        assert_eq!((out.k, out.fdp), (0, 0.0));
        let zeros = LabeledPValues::from_parts(&[0.0; 4], &[H0, A, H0, A]).unwrap();
        assert_eq!(bh_sorted(&zeros, 0.1).unwrap().k, 4);
        assert!(bh_sorted(&zeros, 1.5).is_err());
    }

    #[test]
    fn binned_examples() {
        assert_eq!(bh_bins(&BinLoads::from_totals(&[1, 1, 0, 1, 0], 0)), 2);
        assert_eq!(bh_bins(&BinLoads::from_totals(&[0; 6], 0)), 0);
        assert_eq!(bh_bins(&BinLoads::from_totals(&[2, 0, 1, 0, 0], 0)), 3);
        let pv = five_tests();
        let loads = compute_loads(&pv, &BinSystem::new(5, 0.5).unwrap());
        assert_eq!(bh_bins(&loads), 2);
    }

    #[test]
    fn fdp_examples() {
        let pv = LabeledPValues::from_parts(&[0.1; 5], &[H0, H0, A, A, H0]).unwrap();
        assert_eq!(fdp(&[0, 1, 2, 3], &pv).unwrap(), 0.5);
        assert_eq!(fdp(&[], &pv).unwrap(), 0.0);
        assert_eq!(fdp(&[0, 4], &pv).unwrap(), 1.0);
        assert!(fdp(&[9], &pv).is_err());
    }

    #[test]
    fn ties_at_threshold_are_all_rejected() {
        // 0.2 sits exactly on the second threshold at q = 0.5, N = 5.
        let pv = LabeledPValues::from_parts(&[0.2, 0.2, 0.2, 0.9, 0.95], &[A, H0, A, H0, H0]).unwrap();
        let s = bh_sorted(&pv, 0.5).unwrap();
        let b = bh_binned(&pv, 0.5).unwrap();
        assert_eq!(s, b);
        assert_eq!(s.k, 3);
    }

    fn arb_collection() -> impl Strategy<Value = (Vec<f64>, Vec<TestLabel>, f64)> {
        (1usize..40, 0.05f64..0.95).prop_flat_map(|(n, q)| {
            let grid = prop_oneof![
                (0usize..=n).prop_map(move |i| i as f64 * q / n as f64),
                0.0f64..=1.0,
                0.0f64..=q,
            ];
            (
                prop::collection::vec(grid, n),
                prop::collection::vec(prop_oneof![Just(H0), Just(A)], n),
                Just(q),
            )
        })
    }

    proptest! {
        #[test]
        fn sorted_and_binned_agree((p, labels, q) in arb_collection()) {
            let pv = LabeledPValues::from_parts(&p, &labels).unwrap();
            let s = bh_sorted(&pv, q).unwrap();
            let b = bh_binned(&pv, q).unwrap();
            prop_assert_eq!(&s, &b);
            let loads = compute_loads(&pv, &BinSystem::new(pv.len(), q).unwrap());
            prop_assert!(lemma2_holds(&loads, s.k));
            prop_assert_eq!(s.rejected_ids.len(), s.k);
            prop_assert!(s.false_count <= s.k);
            prop_assert_eq!(fdp(&s.rejected_ids, &pv).unwrap(), s.fdp);
        }

        #[test]
        fn lowering_a_value_never_lowers_k(
            (p, labels, q) in arb_collection(),
            which in any::<prop::sample::Index>(),
            frac in 0.0f64..=1.0,
        ) {
            let pv = LabeledPValues::from_parts(&p, &labels).unwrap();
            let i = which.index(p.len());
            let lowered = pv.with_values(&[(i as u64, p[i] * frac)]).unwrap();
            prop_assert!(bh_sorted(&lowered, q).unwrap().k >= bh_sorted(&pv, q).unwrap().k);
        }

        #[test]
        fn permutation_invariant((p, labels, q) in arb_collection(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let pv = LabeledPValues::from_parts(&p, &labels).unwrap();
            let mut entries = pv.entries().to_vec();
            entries.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = LabeledPValues::new(entries).unwrap();
            prop_assert_eq!(bh_sorted(&pv, q).unwrap(), bh_sorted(&shuffled, q).unwrap());
        }
    }
}
