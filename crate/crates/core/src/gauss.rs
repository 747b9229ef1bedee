//! Gaussian z-score model: p-values `p = P(Z > z)` with null `z ~ N(0, 1)` and
//! alternative `z ~ N(mu1, 1)`.

use libm::erfc;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::bins::{BinSystem, TailRegion};
use crate::collection::{LabeledPValues, TestEntry, TestLabel};
use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
// 1 / sqrt(2 pi)
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF. NaN in, NaN out.
#[inline]
pub fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn density(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal quantile for `u` in `[0, 1]`, infinite at the ends.
pub fn phi_inv(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    if u > 0.5 {
        // 1 - u is exact here.
        return -lower_quantile(1.0 - u);
    }
    lower_quantile(u)
}

// u in (0, 1/2]: seed from erfc_inv and polish with one Newton step, where the
// lower-tail CDF keeps full relative precision.
fn lower_quantile(u: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * u);
    let d = density(x);
    if d > 0.0 && x.is_finite() {
        x - (phi(x) - u) / d
    } else {
        x
    }
}

pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("normal CDF argument {x} is not finite")));
    }
    Ok(phi(x))
}

pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("quantile level {u} outside (0, 1)")));
    }
    Ok(phi_inv(u))
}

/// One-sided p-value of a z-score, `P(Z > z)`.
#[inline]
pub fn z_to_p(z: f64) -> f64 {
    phi(-z)
}

/// z-score with upper-tail probability `p`, i.e. `Phi^-1(1 - p)`.
#[inline]
pub fn p_to_z(p: f64) -> f64 {
    -phi_inv(p)
}

/// The alternative's law of a p-value, seen through its CDF on `[0, 1]`.
pub trait AlternativeLaw {
    /// `P1(p <= x)`.
    fn p_cdf(&self, x: f64) -> f64;

    /// True when the law is `U(0, 1)`, so every excess is exactly zero.
    fn is_uniform(&self) -> bool {
        false
    }

    /// Excess alternative mass in the bins: `(1 - q) - P1(p > q)`.
    fn delta(&self, q: f64) -> f64 {
        self.p_cdf(q) - q
    }

    /// Excess alternative mass in bin `j`: `P1(p in B_j) - q/N`.
    fn delta_j(&self, bins: &BinSystem, j: usize) -> f64 {
        self.bin_mass(bins, j, j) - bins.width()
    }

    /// `P1(p in B_a ∪ ... ∪ B_b)`, telescoped to a single CDF difference.
    fn bin_mass(&self, bins: &BinSystem, a: usize, b: usize) -> f64 {
        if b < a {
            return 0.0;
        }
        self.p_cdf(bins.edge(b)) - self.p_cdf(bins.edge(a - 1))
    }

    /// Summed excess `delta_a + ... + delta_b`.
    fn delta_range(&self, bins: &BinSystem, a: usize, b: usize) -> f64 {
        if b < a {
            return 0.0;
        }
        self.bin_mass(bins, a, b) - (b - a + 1) as f64 * bins.width()
    }
}

/// Test population with `n0` null and `n - n0` alternative z-scores, the
/// latter `N(mu1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianAltModel {
    pub mu1: f64,
    pub q: f64,
    pub n: usize,
    pub n0: usize,
    /// Tail convention for the bins built from this model.
    #[serde(default)]
    pub tail: TailRegion,
}

impl GaussianAltModel {
    pub fn new(mu1: f64, q: f64, n: usize, n0: usize) -> Result<Self> {
        if !(mu1 >= 0.0 && mu1.is_finite()) {
            return Err(Error::domain(format!("mu1 = {mu1} must be finite and >= 0")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("control level {q} outside (0, 1)")));
        }
        if n == 0 || n0 > n {
            return Err(Error::domain(format!("need 1 <= n and n0 <= n, got n={n} n0={n0}")));
        }
        Ok(Self {
            mu1,
            q,
            n,
            n0,
            tail: TailRegion::default(),
        })
    }

    pub fn with_tail(mut self, tail: TailRegion) -> Self {
        self.tail = tail;
        self
    }

    pub fn n1(&self) -> usize {
        self.n - self.n0
    }

    pub fn sigma1(&self) -> f64 {
        1.0
    }

    pub fn bins(&self) -> BinSystem {
        BinSystem::with_tail(self.n, self.q, self.tail).expect("model parameters were validated")
    }

    /// `(1 - q) - Phi(Phi^-1(1 - q) - mu1)`.
    pub fn delta(&self) -> f64 {
        AlternativeLaw::delta(self, self.q)
    }

    /// `delta_j` for `1 <= j <= N`.
    pub fn delta_j(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.n {
            return Err(Error::domain(format!("bin {j} outside 1..={}", self.n)));
        }
        Ok(AlternativeLaw::delta_j(self, &self.bins(), j))
    }

    /// Fills `z` and `p` with one draw: nulls first, then alternatives.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut Vec<f64>, p: &mut Vec<f64>) {
        z.clear();
        p.clear();
        for i in 0..self.n {
            let shift = if i < self.n0 { 0.0 } else { self.mu1 };
            let zi = rng.sample::<f64, _>(StandardNormal) + shift;
            z.push(zi);
            p.push(z_to_p(zi));
        }
    }

    pub fn labels(&self) -> Vec<TestLabel> {
        (0..self.n)
            .map(|i| {
                if i < self.n0 {
                    TestLabel::Null
                } else {
                    TestLabel::Alternative
                }
            })
            .collect()
    }

    pub fn generate_instance<R: Rng + ?Sized>(&self, rng: &mut R) -> InstanceDraw {
        let (mut z, mut p) = (Vec::with_capacity(self.n), Vec::with_capacity(self.n));
        self.draw_into(rng, &mut z, &mut p);
        let entries = p
            .iter()
            .enumerate()
            .map(|(i, &pi)| {
                let label = if i < self.n0 {
                    TestLabel::Null
                } else {
                    TestLabel::Alternative
                };
                TestEntry::new(i as u64, pi, label)
            })
            .collect();
        InstanceDraw {
            pv: LabeledPValues::new(entries).expect("normal draws give valid p-values"),
            z,
        }
    }
}

impl AlternativeLaw for GaussianAltModel {
    fn p_cdf(&self, x: f64) -> f64 {
        // P(Z + mu1 > Phi^-1(1 - x)) = Phi(mu1 + Phi^-1(x))
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        if self.mu1 == 0.0 {
            return x;
        }
        phi(self.mu1 + phi_inv(x))
    }

    fn is_uniform(&self) -> bool {
        self.mu1 == 0.0
    }
}

/// A drawn instance with the z-scores behind its p-values.
#[derive(Debug, Clone)]
pub struct InstanceDraw {
    pub pv: LabeledPValues,
    pub z: Vec<f64>,
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    // erf by its Maclaurin series; accurate to ~1e-13 for |y| <= 2.2.
    fn erf_series(y: f64) -> f64 {
        let mut term = y;
        let mut sum = y;
        for n in 1..200 {
            term *= -y * y / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    fn phi_oracle(x: f64) -> f64 {
        0.5 * (1.0 + erf_series(x / SQRT_2))
    }

    fn bisect_quantile(u: f64) -> f64 {
        // The series oracle is only trusted on [-3, 3].
        let (mut lo, mut hi) = (-3.0f64, 3.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi_oracle(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_against_series_oracle() {
        for i in -300..=300 {
            let x = i as f64 / 100.0;
            assert!((phi(x) - phi_oracle(x)).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((phi(1.959964) - 0.975).abs() < 1e-6);
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        assert!(std_normal_cdf(f64::NAN).is_err());
    }

    #[test]
    fn cdf_against_high_precision_values() {
        // 40-digit reference values.
        let cases = [
            (-8.0, 6.2209605742717841235e-16),
            (-5.0, 2.8665157187919391167e-7),
            (-1.5, 0.066807201268858066004),
            (0.3, 0.61791142218895263731),
            (2.5, 0.99379033467422386483),
            (7.0, 0.99999999999872018746),
        ];
        for (x, want) in cases {
            let got = phi(x);
            assert!((got - want).abs() <= 1e-15 * want.max(1e-300).max(1.0e-1_f64.min(want)) + 1e-16);
            assert!(((got - want) / want).abs() < 1e-13, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn cdf_symmetry() {
        for i in 1..=50 {
            let x = i as f64 / 10.0;
            assert!((phi(-x) + phi(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_values() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.9).unwrap() - 1.281552).abs() < 1e-5);
        let (got, want) = (std_normal_quantile(0.9).unwrap(), bisect_quantile(0.9));
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        let cases = [
            (1e-20, -9.2623400897984075737),
            (1e-5, -4.2648907939228246285),
            (0.025, -1.9599639845400542355),
            (0.3, -0.52440051270804078404),
            (0.7, 0.52440051270804078404),
            (0.999999, 4.7534243088228989482),
        ];
        for (u, want) in cases {
            let got = phi_inv(u);
            // 1 - 0.999999 is itself off by a few parts in 1e11.
            assert!(
                (got - want).abs() < 1e-11 * want.abs().max(1.0),
                "u = {u}: {got} vs {want}"
            );
        }
        for u in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(std_normal_quantile(u).is_err());
        }
    }

    #[test]
    fn quantile_round_trips() {
        for i in -80..=80 {
            let x = i as f64 / 10.0;
            let u = phi(x);
            if u > 0.0 && u < 1.0 {
                let back = phi_inv(u);
                // Above x = 5, 1 - Phi(x) keeps too few digits for 1e-8 in x.
                if x <= 5.0 {
                    assert!((back - x).abs() < 1e-8, "x = {x}: back {back}");
                }
            }
        }
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            assert!((phi(phi_inv(u)) - u).abs() <= 1e-10);
        }
        for e in 1..300 {
            let u = 10f64.powi(-e);
            assert!(((phi(phi_inv(u)) - u) / u).abs() < 1e-10, "u = 1e-{e}");
        }
    }

    #[test]
    fn z_and_p_are_a_decreasing_bijection() {
        let zs = [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0];
        for w in zs.windows(2) {
            assert!(z_to_p(w[0]) > z_to_p(w[1]));
        }
        for &z in &zs {
            assert!((p_to_z(z_to_p(z)) - z).abs() < 1e-9);
        }
    }

    #[test]
    fn delta_values() {
        let m = GaussianAltModel::new(0.0, 0.1, 1000, 900).unwrap();
        assert!(m.delta().abs() < 1e-15);
        for j in [1, 2, 17, 500, 1000] {
            assert!(m.delta_j(j).unwrap().abs() < 1e-15);
        }
        let m = GaussianAltModel::new(1.0, 0.1, 1000, 900).unwrap();
        // 40-digit reference values.
        assert!((m.delta() - 0.28914369164536096904).abs() < 1e-12);
        assert!((m.delta() - 0.289130).abs() < 2e-5);
        let dj = [
            (1, 0.0031738172350275353537),
            (2, 0.0021674783348388855369),
            (500, 0.00021435059530974421604),
            (1000, 0.000118548233278702764),
        ];
        for (j, want) in dj {
            let got = m.delta_j(j).unwrap();
            assert!(((got - want) / want).abs() < 1e-9, "j = {j}: {got} vs {want}");
        }
        assert!(m.delta_j(1).unwrap() > m.delta_j(1000).unwrap());
        assert!(m.delta_j(0).is_err() && m.delta_j(1001).is_err());
    }

    #[test]
    fn delta_is_increasing_in_mu() {
        let mut last = -1.0;
        for k in 0..=40 {
            let d = GaussianAltModel::new(k as f64 * 0.1, 0.1, 100, 90).unwrap().delta();
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn alternative_masses_sum_to_one() {
        for &mu in &[0.0, 0.25, 1.0, 3.0] {
            let m = GaussianAltModel::new(mu, 0.1, 200, 180).unwrap();
            let bins = m.bins();
            let binned: f64 = (1..=200)
                .map(|j| bins.width() + AlternativeLaw::delta_j(&m, &bins, j))
                .sum();
            let tail = phi(phi_inv(0.9) - mu);
            assert!((binned + tail - 1.0).abs() < 1e-9, "mu = {mu}");
            let tele = AlternativeLaw::delta_range(&m, &bins, 1, 200);
            assert!((tele - m.delta()).abs() < 1e-12);
        }
    }

    #[test]
    fn model_validation() {
        assert!(GaussianAltModel::new(-1.0, 0.1, 10, 5).is_err());
        assert!(GaussianAltModel::new(1.0, 0.0, 10, 5).is_err());
        assert!(GaussianAltModel::new(1.0, 0.1, 10, 11).is_err());
        assert!(GaussianAltModel::new(1.0, 0.1, 0, 0).is_err());
    }

    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
            .fold(0.0, f64::max)
    }

    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn generated_nulls_are_uniform() {
        let m = GaussianAltModel::new(2.0, 0.1, 1000, 500).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut nulls = Vec::new();
        for _ in 0..200 {
            let d = m.generate_instance(&mut rng);
            for (e, &z) in d.pv.entries().iter().zip(&d.z) {
                assert_eq!(e.p, z_to_p(z));
                if e.label.is_null() {
                    nulls.push(e.p);
                }
            }
        }
        assert_eq!(nulls.len(), 100_000);
        // 1% critical value of the one-sample KS statistic.
        let crit = 1.628 / (nulls.len() as f64).sqrt();
        assert!(ks_uniform(nulls) < crit);
    }

    #[test]
    fn zero_shift_makes_both_arms_identical() {
        let m = GaussianAltModel::new(0.0, 0.1, 1000, 500).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..200 {
            let d = m.generate_instance(&mut rng);
            for e in d.pv.entries() {
                if e.label.is_null() {
                    a.push(e.p)
                } else {
                    b.push(e.p)
                }
            }
        }
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let crit = 1.628 * ((na + nb) / (na * nb)).sqrt();
        assert!(ks_two_sample(a, b) < crit);
    }

    #[test]
    fn alternative_bin_frequencies_match_delta_j() {
        let m = GaussianAltModel::new(1.0, 0.1, 50, 0).unwrap();
        let bins = m.bins();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let reps = 4000;
        let mut counts = vec![0usize; 51];
        for _ in 0..reps {
            let d = m.generate_instance(&mut rng);
            for e in d.pv.entries() {
                counts[bins.position(e.p) - 1] += 1;
            }
        }
        let total = (reps * 50) as f64;
        for j in [1, 2, 10, 25, 50] {
            let prob = bins.width() + m.delta_j(j).unwrap();
            let se = (prob * (1.0 - prob) / total).sqrt();
            let freq = counts[j - 1] as f64 / total;
            assert!((freq - prob).abs() < 3.5 * se, "bin {j}: {freq} vs {prob}");
        }
    }

    #[test]
    fn tail_nulls_follow_their_binomial_mean() {
        let m = GaussianAltModel::new(1.0, 0.1, 1000, 900).unwrap();
        let bins = m.bins();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let reps = 2000;
        let counts: Vec<f64> = (0..reps)
            .map(|_| {
                let d = m.generate_instance(&mut rng);
                crate::bins::compute_loads(&d.pv, &bins).tail_null as f64
            })
            .collect();
        let s = crate::stats::MeanSe::of(&counts);
        assert!(s.within(900.0 * bins.tail_mass(), 3.0), "{s:?}");
    }
}
