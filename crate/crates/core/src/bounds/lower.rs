//! The closed-form bounds on the INCREASE-c effect: the high-separation
//! sandwich and the low-separation lower bound `L_c`.

use serde::{Deserialize, Serialize};

use super::binom::Binomial;
use crate::bins::TailRegion;
use crate::error::{Error, Result};
use crate::gauss::{AlternativeLaw, GaussianAltModel};

/// How the moment `E[(1 - c/N)^-B0_tail]` inside `M_c` is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McVariant {
    /// The single-ball value `(N - cq)/(N - c)`.
    #[default]
    AsPrinted,
    /// The binomial moment `(1 - m + m/t)^N0` with `m` the tail mass.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub q: f64,
    pub n: usize,
    pub n0: usize,
    pub n1: usize,
    pub c: usize,
    pub mu1: f64,
    pub tail: TailRegion,
}

impl BoundInputs {
    fn of(model: &GaussianAltModel, c: usize) -> Self {
        Self {
            q: model.q,
            n: model.n,
            n0: model.n0,
            n1: model.n1(),
            c,
            mu1: model.mu1,
            tail: model.tail,
        }
    }
}

/// `L_c` with every component that goes into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub variant: McVariant,
    pub delta: f64,
    pub delta_1_c: f64,
    pub delta_rest: f64,
    /// `(1 - cq/N - delta_{1:c})^N1`.
    pub alt_clear_prob: f64,
    /// `E[B1_{c+1:N} | B1_{1:c} = 0]`.
    pub alt_rest_mean: f64,
    pub pi_c: f64,
    pub d_kl: f64,
    pub v_c: f64,
    pub m_c: f64,
    pub z_c: f64,
    pub l_c: f64,
    /// True when `l_c <= 0`, so the bound says nothing.
    pub vacuous: bool,
}

impl BoundReport {
    /// `L_c` rebuilt from the stored components.
    pub fn assemble(&self) -> f64 {
        let BoundInputs { n, n0, c, .. } = self.inputs;
        let t = 1.0 - c as f64 / n as f64;
        self.alt_clear_prob * (t.powi(n0 as i32) * (1.0 - self.pi_c - self.v_c) * self.m_c + self.z_c)
    }
}

fn check_budget(model: &GaussianAltModel, c: usize) -> Result<()> {
    if c == 0 || c >= model.n {
        return Err(Error::domain(format!("need 1 <= c < N, got c={c} N={}", model.n)));
    }
    Ok(())
}

/// Lower bound `L_c` on the FDR increase of INCREASE-c.
pub fn l_c_bound(model: &GaussianAltModel, c: usize, variant: McVariant) -> Result<BoundReport> {
    check_budget(model, c)?;
    let bins = model.bins();
    let (n, n0, n1) = (model.n, model.n0, model.n1());
    let (nf, cf) = (n as f64, c as f64);

    let mut masses = Vec::with_capacity(n);
    let mut prev = 0.0;
    for j in 1..=n {
        let cur = model.p_cdf(bins.edge(j));
        let mass = cur - prev;
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::EmptyAltBin { bin: j, mass });
        }
        masses.push(mass);
        prev = cur;
    }
    let first_c = model.p_cdf(bins.edge(c));
    let rest = model.p_cdf(bins.edge(n)) - first_c;
    if rest.is_nan() || rest <= 0.0 {
        return Err(Error::EmptyAltBin { bin: c + 1, mass: rest });
    }

    let delta = model.delta();
    let delta_1_c = first_c - bins.edge(c);
    let delta_rest = rest - (bins.edge(n) - bins.edge(c));
    let alt_clear_prob = (1.0 - first_c).powi(n1 as i32);
    let alt_rest_mean = n1 as f64 * rest / (1.0 - first_c);
    let pi_c = (n0 as f64 + alt_rest_mean) / (nf - cf);

    let d_kl = if model.is_uniform() {
        0.0
    } else {
        let s: f64 = masses[c..].iter().map(|&m| (rest / ((nf - cf) * m)).ln()).sum();
        (s / (nf - cf)).max(0.0)
    };
    let v_c = (std::f64::consts::LN_2 / 2.0 * alt_rest_mean * d_kl).sqrt();

    let t = 1.0 - cf / nf;
    let tail = Binomial::new(n0, bins.tail_mass())?;
    let moment = match variant {
        McVariant::AsPrinted => (nf - cf * model.q) / (nf - cf),
        McVariant::Exact => tail.inverse_power_moment(t),
    };
    let m_c = moment - tail.partial_inverse_power(t, c);

    let p_tail = tail.tail_ge(c);
    let z_c = match tail.mean_given_ge(c) {
        Some(mean) if p_tail > 0.0 => p_tail * t.powf(n0 as f64 - mean) * mean / (nf - cf),
        _ => 0.0,
    };

    let mut report = BoundReport {
        inputs: BoundInputs::of(model, c),
        variant,
        delta,
        delta_1_c,
        delta_rest,
        alt_clear_prob,
        alt_rest_mean,
        pi_c,
        d_kl,
        v_c,
        m_c,
        z_c,
        l_c: 0.0,
        vacuous: false,
    };
    report.l_c = report.assemble();
    report.vacuous = report.l_c <= 0.0;
    Ok(report)
}

/// Upper bound on the FDR increase and lower bound on the post-attack
/// rejection count, for strongly separated alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm3Report {
    pub inputs: BoundInputs,
    /// `P(B1_{1:c} = N1)`: every alternative lands in the first `c` bins.
    pub alt_packed_prob: f64,
    /// `E[c / (c + N1 + B0_{1:N1+c}) | B0_tail >= c]`.
    pub cond_share: f64,
    pub upper_on_delta_c: f64,
    /// `E[B0_{1:N} / N | B0_{1:N} <= N0 - c]`.
    pub cond_null_fraction: f64,
    pub lower_on_k_plus_c: f64,
}

pub fn thm3_bounds(model: &GaussianAltModel, c: usize) -> Result<Thm3Report> {
    check_budget(model, c)?;
    if c > model.n0 {
        return Err(Error::domain(format!("budget {c} exceeds the {} nulls", model.n0)));
    }
    let bins = model.bins();
    let (n, n0, n1) = (model.n, model.n0, model.n1());
    let alt_packed_prob = model.p_cdf(bins.edge(c)).powi(n1 as i32);

    // Nulls: b in the tail, then a of the remaining N0 - b in bins 1..N1+c.
    let tail = Binomial::new(n0, bins.tail_mass())?;
    let head_mass = bins.edge((n1 + c).min(n));
    let share_given_untailed = (head_mass / (1.0 - bins.tail_mass())).clamp(0.0, 1.0);
    let (mut num, mut den) = (0.0, 0.0);
    for b in c..=n0 {
        let wb = tail.pmf(b);
        if wb == 0.0 {
            continue;
        }
        let head = Binomial::new(n0 - b, share_given_untailed)?;
        let inner: f64 = head
            .pmfs()
            .iter()
            .enumerate()
            .map(|(a, w)| w * c as f64 / (c + n1 + a) as f64)
            .sum();
        num += wb * inner;
        den += wb;
    }
    let cond_share = if den > 0.0 { num / den } else { 0.0 };
    let upper_on_delta_c = alt_packed_prob * cond_share + 1.0 - alt_packed_prob;

    let binned = Binomial::new(n0, model.q)?;
    let cond_null_fraction = binned
        .mean_given_le(n0 - c)
        .ok_or_else(|| Error::domain("conditioning event has probability zero"))?
        / n as f64;
    let lower_on_k_plus_c = (n1 + c) as f64 * alt_packed_prob / (1.0 - cond_null_fraction);

    Ok(Thm3Report {
        inputs: BoundInputs::of(model, c),
        alt_packed_prob,
        cond_share,
        upper_on_delta_c,
        cond_null_fraction,
        lower_on_k_plus_c,
    })
}
