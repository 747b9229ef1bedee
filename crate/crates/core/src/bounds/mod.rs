//! Exact and Monte Carlo evaluation of the bounds on BH under INCREASE-c.

mod binom;
mod exact;
mod lower;
mod mc;

pub use binom::Binomial;
pub use exact::{ballot_prob, k_plus_c_eq_c_prob, reject_zero_law, reject_zero_pmf, ClampedProb};
pub use lower::{l_c_bound, thm3_bounds, BoundInputs, BoundReport, McVariant, Thm3Report};
pub use mc::{
    delta_c_mc, increase_mc, k_plus_c_eq_c_mc, rejection_count_law_mc, thm1_rhs, thm1_rhs_mc, IncreaseMc, McEstimate,
    Thm1Report,
};
