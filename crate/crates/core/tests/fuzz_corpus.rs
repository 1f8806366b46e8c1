//! Replays the checked-in fuzz corpus through the same harnesses as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use polarq::codec::{sc_decode, CodeSpec};
use polarq::io::{channel_to_json, parse_channel_json, parse_frozen_json, parse_map_json, parse_matrix_json, ChannelSpec, KernelSpec};
use polarq::{Budgets, Channel, Kernel};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut entries: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    assert!(!entries.is_empty(), "no seeds for {target}");
    entries.iter().map(|p| fs::read(p).unwrap()).collect()
}

fn text_seeds(target: &str) -> Vec<String> {
    seeds(target).into_iter().filter_map(|b| String::from_utf8(b).ok()).collect()
}

#[test]
fn channel_spec() {
    for s in text_seeds("channel_spec") {
        if let Ok(spec) = s.parse::<ChannelSpec>() {
            if !matches!(spec, ChannelSpec::File(_)) {
                let _ = spec.build();
            }
        }
    }
}

#[test]
fn kernel_spec() {
    for s in text_seeds("kernel_spec") {
        if let Ok(spec) = s.parse::<KernelSpec>() {
            if matches!(spec, KernelSpec::ReedSolomon { .. } | KernelSpec::Arikan) {
                let _ = spec.build();
            }
        }
    }
}

#[test]
fn channel_json() {
    let mut parsed = 0;
    for s in text_seeds("channel_json") {
        if let Ok(w) = parse_channel_json(&s) {
            let again = parse_channel_json(&channel_to_json(&w)).unwrap();
            assert_eq!(again.labels(), w.labels());
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn kernel_matrix_json() {
    for s in text_seeds("kernel_matrix_json") {
        if let Ok(k) = parse_matrix_json(&s) {
            assert!(k.matrix().is_some());
        }
    }
}

#[test]
fn kernel_map_json() {
    for s in text_seeds("kernel_map_json") {
        if let Ok(k) = parse_map_json(&s) {
            let _ = k.is_linear();
        }
    }
}

#[test]
fn frozen_json() {
    for data in seeds("frozen_json") {
        let [len, q, rest @ ..] = data.as_slice() else { continue };
        let Ok(s) = std::str::from_utf8(rest) else { continue };
        let (len, q) = (*len as usize, *q as usize);
        if let Ok(frozen) = parse_frozen_json(s, len, q) {
            assert_eq!(frozen.len(), len);
            assert!(frozen.iter().flatten().all(|&v| v < q));
        }
    }
}

#[test]
fn budget() {
    for s in text_seeds("budget") {
        if let Ok(b) = Budgets::parse(&s) {
            assert!(b.suffix_pairs > 0 && b.alphabet > 0 && b.paths > 0);
        }
    }
}

#[test]
fn sc_decode_seeds() {
    let w = Channel::erasure(2, 0.3).unwrap();
    for data in seeds("sc_decode") {
        let [ctl, y @ ..] = data.as_slice() else { continue };
        let frozen: Vec<Option<usize>> = (0..8).map(|i| (ctl >> i & 1 == 1).then_some(0)).collect();
        let spec = CodeSpec::new(Kernel::arikan(), 3, frozen).unwrap();
        let y: Vec<usize> = y.iter().map(|&b| b as usize % 4).collect();
        let genie = vec![0; 8];
        let genie = (ctl & 1 == 1).then_some(genie.as_slice());
        if let Ok(d) = sc_decode(&spec, &w, &y, genie) {
            assert_eq!(d.u_hat.len(), 8);
            assert!(d.u_hat.iter().all(|&u| u < 2));
        }
    }
}
