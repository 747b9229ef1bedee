use bhadv_core::bounds::{ballot_prob, k_plus_c_eq_c_mc, k_plus_c_eq_c_prob, reject_zero_law, rejection_count_law_mc};

#[test]
fn reject_zero_law_is_a_distribution() {
    for n in [5, 50, 200] {
        for q in [0.05, 0.1, 0.5, 0.9] {
            let law = reject_zero_law(n, q).unwrap();
            let total: f64 = law.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "n={n} q={q} total={total}");
            assert!(law.iter().all(|&p| p >= 0.0));
            assert!((law[0] - (1.0 - q)).abs() < 1e-12);
        }
    }
}

#[test]
fn reject_zero_law_matches_simulation() {
    let exact = reject_zero_law(50, 0.1).unwrap();
    let mc = rejection_count_law_mc(50, 0.1, 20_000, 11).unwrap();
    let tv: f64 = exact.iter().zip(&mc).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.03, "total variation {tv}");
}

#[test]
fn conditional_event_matches_simulation() {
    for b in [75, 81, 87] {
        let exact = k_plus_c_eq_c_prob(100, 90, 0.1, 1, b).unwrap();
        assert!(!exact.clamped);
        let mc = k_plus_c_eq_c_mc(100, 90, 0.1, 1, b, 20_000, 5 + b as u64).unwrap();
        let se = mc.std_error.max(1e-4);
        assert!(
            (mc.mean - exact.value).abs() <= 3.0 * se,
            "b={b} exact={} mc={} se={se}",
            exact.value,
            mc.mean
        );
    }
}

#[test]
fn conditional_formula_stays_in_range_on_its_domain() {
    for (n, n0) in [(10, 10), (10, 9), (100, 90), (100, 100)] {
        for c in 1..n.min(n0) {
            for b in c..=n0 {
                for q in [0.01, 0.5, 0.99] {
                    let p = k_plus_c_eq_c_prob(n, n0, q, c, b).unwrap();
                    assert!(!p.clamped, "n={n} n0={n0} c={c} b={b} q={q} raw={}", p.raw);
                }
            }
        }
    }
    assert!(k_plus_c_eq_c_prob(100, 90, 0.1, 2, 1).is_err());
}

#[test]
fn ballot_edges() {
    assert_eq!(ballot_prob(5, 2).unwrap(), 0.6);
    assert_eq!(ballot_prob(4, 4).unwrap(), 0.0);
    assert!(ballot_prob(0, 0).is_err());
    assert!(ballot_prob(3, 4).is_err());
}
