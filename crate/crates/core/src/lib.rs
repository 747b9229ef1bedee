//! Benjamini-Hochberg under adversarial test-time perturbation.
//!
//! The crate reframes BH as a balls-into-bins process ([`bins`]), runs the
//! procedure in sorted and binned form ([`bh`]), implements the INCREASE-c and
//! MOVE-1 perturbation attacks ([`attack`]), evaluates the exact and Monte
//! Carlo bound calculators ([`bounds`]) under the Gaussian z-score model
//! ([`gauss`]), and drives the paired simulation studies ([`sim`]) and the
//! conformal outlier-detection experiment ([`conformal`]).

pub mod attack;
pub mod bh;
pub mod bins;
pub mod bounds;
pub mod collection;
pub mod conformal;
pub mod error;
pub mod gauss;
pub mod rng;
pub mod sim;
pub mod stats;

pub use bins::{compute_loads, BinLoads, BinSystem, LoadKind, TailRegion};
pub use collection::{LabeledPValues, TestEntry, TestLabel};
pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::collection::TestLabel::{Alternative as A, Null as H0};
    use crate::collection::{LabeledPValues, TestEntry};

    /// Five tests at q = 0.5: two alternatives in bins 1 and 2, a null in
    /// bin 4 and two nulls in the tail.
    pub fn five_tests() -> LabeledPValues {
        LabeledPValues::new(vec![
            TestEntry::new(1, 0.05, A),
            TestEntry::new(2, 0.2, A),
            TestEntry::new(3, 0.35, H0),
            TestEntry::new(4, 0.77, H0),
            TestEntry::new(5, 0.9, H0),
        ])
        .unwrap()
    }
}
