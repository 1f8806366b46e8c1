#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::io::KernelSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = s.parse::<KernelSpec>() {
        if matches!(spec, KernelSpec::ReedSolomon { .. } | KernelSpec::Arikan) {
            let _ = spec.build();
        }
    }
});
