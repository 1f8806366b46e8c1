#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::Budgets;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(b) = Budgets::parse(s) {
        assert!(b.suffix_pairs > 0 && b.alphabet > 0 && b.paths > 0);
    }
});
