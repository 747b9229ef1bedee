#![no_main]

use bhadv_core::bh::{bh_binned, bh_sorted};
use bhadv_core::LabeledPValues;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(pv) = LabeledPValues::read_csv(data) else {
        return;
    };
    let mut buf = Vec::new();
    pv.write_csv(&mut buf).expect("writing to memory");
    let back = LabeledPValues::read_csv(buf.as_slice()).expect("own output parses");
    assert_eq!(back, pv);
    if !pv.is_empty() {
        let sorted = bh_sorted(&pv, 0.1).unwrap();
        assert_eq!(sorted, bh_binned(&pv, 0.1).unwrap());
    }
});
