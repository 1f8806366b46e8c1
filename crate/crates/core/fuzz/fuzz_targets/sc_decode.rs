#![no_main]

use libfuzzer_sys::fuzz_target;
use polarq::codec::{sc_decode, CodeSpec};
use polarq::{Channel, Kernel};

// First byte: frozen mask seed and genie flag; remaining bytes: received output indices.
fuzz_target!(|data: &[u8]| {
    let [ctl, y @ ..] = data else { return };
    let kernel = Kernel::arikan();
    let n = 3;
    let frozen: Vec<Option<usize>> = (0..8).map(|i| (ctl >> i & 1 == 1).then_some(0)).collect();
    let spec = CodeSpec::new(kernel, n, frozen).expect("valid spec");
    let w = Channel::erasure(2, 0.3).expect("valid channel");
    let y: Vec<usize> = y.iter().map(|&b| b as usize % 4).collect();
    let genie = vec![0; 8];
    let genie = (ctl & 1 == 1).then_some(genie.as_slice());
    if let Ok(d) = sc_decode(&spec, &w, &y, genie) {
        assert_eq!(d.u_hat.len(), 8);
        assert!(d.u_hat.iter().all(|&u| u < 2));
    }
});
