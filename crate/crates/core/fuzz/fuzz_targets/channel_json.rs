#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::io::{channel_to_json, parse_channel_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = parse_channel_json(s) {
        let again = parse_channel_json(&channel_to_json(&w)).expect("serialized channel parses");
        assert_eq!(again.labels(), w.labels());
    }
});
