#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::io::parse_map_json;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(k) = parse_map_json(s) {
        let _ = k.is_linear();
    }
});
