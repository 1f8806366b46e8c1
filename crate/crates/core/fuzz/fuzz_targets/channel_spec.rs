#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::io::ChannelSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = s.parse::<ChannelSpec>() {
        if !matches!(spec, ChannelSpec::File(_)) {
            let _ = spec.build();
        }
    }
});
