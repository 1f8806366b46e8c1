#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::io::parse_matrix_json;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(k) = parse_matrix_json(s) {
        assert!(k.matrix().is_some());
    }
});
