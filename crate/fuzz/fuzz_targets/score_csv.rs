#![no_main]

use bhadv_core::conformal::{ingested_pvalues, read_score_csv, Denominator};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = read_score_csv(data) else {
        return;
    };
    for denominator in [Denominator::CalPlusOne, Denominator::Printed] {
        if let Ok(pv) = ingested_pvalues(&records, denominator) {
            assert!(pv.p_values().all(|p| p > 0.0 && p <= 1.0));
        }
    }
});
