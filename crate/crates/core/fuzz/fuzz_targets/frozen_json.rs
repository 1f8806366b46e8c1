#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::io::parse_frozen_json;

// First byte: block length, second byte: alphabet size, rest: file text.
fuzz_target!(|data: &[u8]| {
    let [len, q, rest @ ..] = data else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    let (len, q) = (*len as usize, *q as usize);
    if let Ok(frozen) = parse_frozen_json(s, len, q) {
        assert_eq!(frozen.len(), len);
        assert!(frozen.iter().flatten().all(|&v| v < q));
    }
});
