//! Closed forms for uniform p-values: the ballot probability and the law of
//! the rejection count.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Probability that `x` balls thrown uniformly into `n` bins leave every
/// prefix `1..=r` holding fewer than `r` balls: `1 - x/n`.
pub fn ballot_prob(n: usize, x: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("ballot needs at least one bin"));
    }
    if x > n {
        return Err(Error::domain(format!("{x} balls exceed {n} bins")));
    }
    Ok(1.0 - x as f64 / n as f64)
}

/// `P(k̃ = ell)` when all `N` p-values are uniform.
pub fn reject_zero_pmf(n: usize, q: f64, ell: usize) -> Result<f64> {
    check_q(q)?;
    if n == 0 || ell > n {
        return Err(Error::domain(format!("rejection count {ell} outside 0..={n}")));
    }
    let nf = n as f64;
    let front = (1.0 - q) / (1.0 - q + (n - ell) as f64 * q / nf);
    let r = q * ell as f64 / nf;
    let ln_full = ln_binomial(n as u64, ell as u64)
        + if ell == 0 { 0.0 } else { ell as f64 * r.ln() }
        + (n - ell) as f64 * (-r).ln_1p();
    Ok(front * ln_full.exp())
}

/// The whole law of `k̃` under uniform p-values.
pub fn reject_zero_law(n: usize, q: f64) -> Result<Vec<f64>> {
    (0..=n).map(|ell| reject_zero_pmf(n, q, ell)).collect()
}

/// A probability from a formula that can leave `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampedProb {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

impl ClampedProb {
    fn new(raw: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self {
            value,
            raw,
            clamped: value != raw,
        }
    }
}

/// `P(k̃_{+c} = c | B0_tail = b)` under uniform p-values:
/// `(1 - cq/N)^N1 (1 - c/N)^(N0 - b) (1 - (N0 - b)/(N - c) - N1 q/(N - cq))`.
pub fn k_plus_c_eq_c_prob(n: usize, n0: usize, q: f64, c: usize, b0_tail: usize) -> Result<ClampedProb> {
    check_q(q)?;
    if n0 > n || c == 0 || c >= n {
        return Err(Error::domain(format!(
            "need n0 <= n and 1 <= c < n, got n={n} n0={n0} c={c}"
        )));
    }
    if b0_tail < c || b0_tail > n0 {
        return Err(Error::domain(format!("tail count {b0_tail} outside {c}..={n0}")));
    }
    let (nf, cf) = (n as f64, c as f64);
    let n1 = (n - n0) as f64;
    let binned = (n0 - b0_tail) as f64;
    let last = 1.0 - binned / (nf - cf) - n1 * q / (nf - cf * q);
    let raw = (1.0 - cf * q / nf).powf(n1) * (1.0 - cf / nf).powf(binned) * last;
    Ok(ClampedProb::new(raw))
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("control level {q} outside (0, 1)")))
    }
}
