//! Monte Carlo estimates of the INCREASE-c quantities the bounds speak about.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attack::k_plus_c;
use crate::bh::bh_bins;
use crate::bins::{BinLoads, BinSystem};
use crate::bounds::exact::check_q;
use crate::error::{Error, Result};
use crate::gauss::GaussianAltModel;
use crate::rng::replicate;
use crate::stats::MeanSe;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Replications drawn.
    pub reps: usize,
    /// Replications that fell in the conditioning event and entered the mean.
    pub hits: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64], reps: usize) -> Self {
        let s = MeanSe::of(samples);
        Self {
            mean: s.mean,
            std_error: s.se,
            reps,
            hits: s.n,
        }
    }
}

/// What one replication of INCREASE-c reveals about the bin loads.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Draw {
    tail_null: usize,
    k: usize,
    k_plus: usize,
    /// `B0_{k+2:N} / (N - (k + 1))`, when `k + 1 < N`.
    inner: Option<f64>,
}

fn draws(model: &GaussianAltModel, c: usize, reps: usize, seed: u64) -> Result<Vec<Draw>> {
    if reps == 0 {
        return Err(Error::domain("need at least one replication"));
    }
    if c == 0 {
        return Err(Error::domain("attack budget c must be at least 1"));
    }
    let bins = model.bins();
    let n = model.n;
    Ok(replicate(seed, reps, |_, rng| {
        let (mut z, mut p) = (Vec::new(), Vec::new());
        model.draw_into(rng, &mut z, &mut p);
        let loads = BinLoads::from_split(&p, model.n0, &bins);
        let k = bh_bins(&loads);
        let inner = (k + 1 < n).then(|| {
            let above = loads.prefix_null(n) - loads.prefix_null(k + 1);
            above as f64 / (n - k - 1) as f64
        });
        Draw {
            tail_null: loads.tail_null,
            k,
            k_plus: k_plus_c(&loads, c),
            inner,
        }
    }))
}

/// Estimates of the INCREASE-c effect from one set of replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncreaseMc {
    pub c: usize,
    /// `E[c / k_{+c}; B0_tail >= c]`.
    pub delta_c: McEstimate,
    /// `E[k_{+c} | B0_tail >= c]`.
    pub k_plus_c_given_tail: McEstimate,
    /// `E[k_{+c} - k | B0_tail >= c]`.
    pub increase_given_tail: McEstimate,
    /// `E[B0_{k+2:N} / (N - (k + 1)) | B0_tail >= c]`.
    pub inner_given_tail: McEstimate,
}

pub fn increase_mc(model: &GaussianAltModel, c: usize, reps: usize, seed: u64) -> Result<IncreaseMc> {
    let d = draws(model, c, reps, seed)?;
    let delta: Vec<f64> = d
        .iter()
        .map(|x| {
            if x.tail_null >= c {
                c as f64 / x.k_plus as f64
            } else {
                0.0
            }
        })
        .collect();
    let hit: Vec<&Draw> = d.iter().filter(|x| x.tail_null >= c).collect();
    let kp: Vec<f64> = hit.iter().map(|x| x.k_plus as f64).collect();
    let inc: Vec<f64> = hit.iter().map(|x| (x.k_plus - x.k) as f64).collect();
    let inner: Vec<f64> = hit.iter().filter_map(|x| x.inner).collect();
    let mut delta_c = McEstimate::from_samples(&delta, reps);
    delta_c.hits = hit.len();
    Ok(IncreaseMc {
        c,
        delta_c,
        k_plus_c_given_tail: McEstimate::from_samples(&kp, reps),
        increase_given_tail: McEstimate::from_samples(&inc, reps),
        inner_given_tail: McEstimate::from_samples(&inner, reps),
    })
}

/// Monte Carlo estimate of the FDR increase `Delta_c`.
pub fn delta_c_mc(model: &GaussianAltModel, c: usize, reps: usize, seed: u64) -> Result<McEstimate> {
    Ok(increase_mc(model, c, reps, seed)?.delta_c)
}

/// Both sides of the rejection-count inequality
/// `E[k_{+c} - k | tail >= c] >= (c - 1)/(1 - E[inner | tail >= c]) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Report {
    pub c: usize,
    pub lhs: McEstimate,
    pub inner: McEstimate,
    pub rhs: f64,
    /// Delta-method standard error of `rhs`.
    pub rhs_se: f64,
}

impl Thm1Report {
    /// Whether the inequality holds up to `k` combined standard errors.
    pub fn holds_within(&self, k: f64) -> bool {
        let se = (self.lhs.std_error.powi(2) + self.rhs_se.powi(2)).sqrt();
        self.lhs.mean >= self.rhs - k * se
    }
}

/// The right-hand side in terms of the inner conditional expectation.
pub fn thm1_rhs(c: usize, inner: f64) -> f64 {
    (c as f64 - 1.0) / (1.0 - inner) + 1.0
}

pub fn thm1_rhs_mc(model: &GaussianAltModel, c: usize, reps: usize, seed: u64) -> Result<Thm1Report> {
    if c < 2 {
        return Err(Error::domain("the rejection-count bound needs c >= 2"));
    }
    let est = increase_mc(model, c, reps, seed)?;
    let e = est.inner_given_tail.mean;
    Ok(Thm1Report {
        c,
        lhs: est.increase_given_tail,
        inner: est.inner_given_tail,
        rhs: thm1_rhs(c, e),
        rhs_se: (c as f64 - 1.0) / (1.0 - e).powi(2) * est.inner_given_tail.std_error,
    })
}

/// Monte Carlo law of `k̃` when all `n` p-values are uniform.
pub fn rejection_count_law_mc(n: usize, q: f64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    check_q(q)?;
    if n == 0 || reps == 0 {
        return Err(Error::domain("need at least one test and one replication"));
    }
    let bins = BinSystem::new(n, q)?;
    let ks = replicate(seed, reps, |_, rng| {
        let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        bh_bins(&BinLoads::from_split(&p, n, &bins))
    });
    let mut law = vec![0.0; n + 1];
    for k in ks {
        law[k] += 1.0;
    }
    law.iter_mut().for_each(|x| *x /= reps as f64);
    Ok(law)
}

/// Frequency of `k̃_{+c} = c` given `b0_tail` nulls in the tail, under
/// uniform p-values: the tail nulls are uniform on the tail, the other
/// nulls uniform on `[0, q]` and the alternatives uniform on `[0, 1]`.
pub fn k_plus_c_eq_c_mc(
    n: usize,
    n0: usize,
    q: f64,
    c: usize,
    b0_tail: usize,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_q(q)?;
    if n0 > n || c == 0 || c >= n || b0_tail < c || b0_tail > n0 || reps == 0 {
        return Err(Error::domain(format!(
            "need n0 <= n, 1 <= c < n, c <= b0_tail <= n0 and reps >= 1, got n={n} n0={n0} c={c} b0_tail={b0_tail}"
        )));
    }
    let bins = BinSystem::new(n, q)?;
    let hits = replicate(seed, reps, |_, rng| {
        let p: Vec<f64> = (0..n)
            .map(|i| {
                let u = rng.random::<f64>();
                if i < b0_tail {
                    q + (1.0 - q) * u
                } else if i < n0 {
                    q * u
                } else {
                    u
                }
            })
            .collect();
        let loads = BinLoads::from_split(&p, n0, &bins);
        if k_plus_c(&loads, c) == c {
            1.0
        } else {
            0.0
        }
    });
    Ok(McEstimate::from_samples(&hits, reps))
}
