//! Exact finite sums over a binomial law.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// `Binom(n, p)` with its probability mass tabulated.
#[derive(Debug, Clone)]
pub struct Binomial {
    n: usize,
    p: f64,
    pmf: Vec<f64>,
}

impl Binomial {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("binomial probability {p} outside [0, 1]")));
        }
        let pmf = if p == 0.0 || p == 1.0 {
            let at = if p == 0.0 { 0 } else { n };
            (0..=n).map(|k| if k == at { 1.0 } else { 0.0 }).collect()
        } else {
            let (lp, lq) = (p.ln(), (-p).ln_1p());
            (0..=n)
                .map(|k| (ln_binomial(n as u64, k as u64) + k as f64 * lp + (n - k) as f64 * lq).exp())
                .collect()
        };
        Ok(Self { n, p, pmf })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn pmfs(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }

    /// `P(B >= c)`.
    pub fn tail_ge(&self, c: usize) -> f64 {
        if c == 0 {
            return 1.0;
        }
        self.pmf.iter().skip(c).rev().sum()
    }

    /// `E[B | B >= c]`, or `None` when the event has probability zero.
    pub fn mean_given_ge(&self, c: usize) -> Option<f64> {
        if c == 0 {
            return Some(self.mean());
        }
        self.conditional_mean(c, self.n)
    }

    /// `E[B | B <= m]`, or `None` when the event has probability zero.
    pub fn mean_given_le(&self, m: usize) -> Option<f64> {
        if m >= self.n {
            return Some(self.mean());
        }
        self.conditional_mean(0, m)
    }

    fn conditional_mean(&self, lo: usize, hi: usize) -> Option<f64> {
        if lo > hi {
            return None;
        }
        let (mut mass, mut first) = (0.0, 0.0);
        for k in lo..=hi {
            mass += self.pmf[k];
            first += k as f64 * self.pmf[k];
        }
        (mass > 0.0).then(|| first / mass)
    }

    /// `E[t^-B]` in closed form.
    pub fn inverse_power_moment(&self, t: f64) -> f64 {
        (1.0 - self.p + self.p / t).powi(self.n as i32)
    }

    /// Partial moment `E[t^-B; B <= c - 1]`.
    pub fn partial_inverse_power(&self, t: f64, c: usize) -> f64 {
        let inv = 1.0 / t;
        let mut w = 1.0;
        let mut acc = 0.0;
        for k in 0..c.min(self.n + 1) {
            acc += w * self.pmf[k];
            w *= inv;
        }
        acc
    }
}
