//! Polar encoder and successive-cancellation decoder.
//!
//! Index `i` of a length `N = ℓ^n` block, written in base ℓ as
//! `b_1 b_2 ... b_n` (most significant first), carries the symbol seen
//! through `W^{(b_1)...(b_n)}`.
//!
//! The encoder applies `g` to consecutive ℓ-blocks of `u`, splits the results
//! into ℓ interleaved streams, and recurses on each stream. The decoder walks
//! the same map from the other end: block `m` of the codeword is
//! `g(v^0_m, ..., v^{ℓ-1}_m)` where `v^d` encodes the `d`-th segment of `u`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{unique_max, Channel};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::numeric::{checked_pow, digits_into, nearly_equal};

/// Largest supported block length.
pub const MAX_BLOCK: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub kernel: Kernel,
    pub n: usize,
    /// `frozen[i] = Some(v)` fixes index `i` to `v`; `None` marks an information index.
    pub frozen: Vec<Option<usize>>,
}

impl CodeSpec {
    pub fn new(kernel: Kernel, n: usize, frozen: Vec<Option<usize>>) -> Result<Self> {
        let len = block_length(&kernel, n)?;
        if frozen.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: frozen.len() });
        }
        let q = kernel.alphabet_size();
        if let Some(v) = frozen.iter().flatten().find(|&&v| v >= q) {
            return Err(Error::InvalidElement { value: *v, q });
        }
        Ok(Self { kernel, n, frozen })
    }

    /// Information indices `info`, everything else frozen to 0.
    pub fn from_information_set(kernel: Kernel, n: usize, info: &[usize]) -> Result<Self> {
        let len = block_length(&kernel, n)?;
        let mut frozen = vec![Some(0); len];
        for &i in info {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, limit: len });
            }
            frozen[i] = None;
        }
        Self::new(kernel, n, frozen)
    }

    pub fn block_length(&self) -> usize {
        self.frozen.len()
    }

    pub fn information_set(&self) -> Vec<usize> {
        (0..self.frozen.len()).filter(|&i| self.frozen[i].is_none()).collect()
    }
}

fn block_length(kernel: &Kernel, n: usize) -> Result<usize> {
    checked_pow(kernel.size(), n)
        .filter(|&len| len <= MAX_BLOCK)
        .map(|len| len as usize)
        .ok_or_else(|| Error::InvalidKernel(format!("block length {}^{n} too large", kernel.size())))
}

/// `x = encode(u)`.
pub fn encode(spec: &CodeSpec, u: &[usize]) -> Result<Vec<usize>> {
    let len = spec.block_length();
    if u.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: u.len() });
    }
    let q = spec.kernel.alphabet_size();
    if let Some(&v) = u.iter().find(|&&v| v >= q) {
        return Err(Error::InvalidElement { value: v, q });
    }
    Ok(encode_rec(&spec.kernel, u))
}

fn encode_rec(kernel: &Kernel, u: &[usize]) -> Vec<usize> {
    let ell = kernel.size();
    if u.len() == 1 {
        return u.to_vec();
    }
    let m = u.len() / ell;
    let mut streams = vec![vec![0; m]; ell];
    let mut out = vec![0; ell];
    for (j, block) in u.chunks_exact(ell).enumerate() {
        kernel.apply(block, &mut out);
        for (k, &v) in out.iter().enumerate() {
            streams[k][j] = v;
        }
    }
    streams.iter().flat_map(|s| encode_rec(kernel, s)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decoded {
    pub u_hat: Vec<usize>,
    /// Per index, the symbol with strictly largest likelihood if unique.
    pub unique_max: Vec<Option<usize>>,
}

/// Successive-cancellation decoding of the output indices `y`.
///
/// Decisions maximize the likelihood, the smallest symbol winning ties. With
/// `genie`, every index is decided by likelihood and the true symbol is fed
/// back to later indices.
pub fn sc_decode(spec: &CodeSpec, w: &Channel, y: &[usize], genie: Option<&[usize]>) -> Result<Decoded> {
    let len = spec.block_length();
    let q = spec.kernel.alphabet_size();
    if w.input_size() != q {
        return Err(Error::AlphabetMismatch { channel: w.input_size(), kernel: q });
    }
    if y.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&v| v >= w.output_size()) {
        return Err(Error::LabelUnknown(bad.to_string()));
    }
    if let Some(g) = genie {
        if g.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: g.len() });
        }
    }
    let likelihoods: Vec<f64> = y.iter().flat_map(|&yi| w.column(yi).iter().copied()).collect();
    let mut dec = Decoder {
        kernel: &spec.kernel,
        q,
        frozen: &spec.frozen,
        genie,
        u_hat: vec![0; len],
        unique: vec![None; len],
    };
    dec.run(&likelihoods, 0);
    Ok(Decoded {
        u_hat: dec.u_hat,
        unique_max: dec.unique,
    })
}

/// [`sc_decode`] on output labels.
pub fn sc_decode_labels(spec: &CodeSpec, w: &Channel, y: &[&str], genie: Option<&[usize]>) -> Result<Decoded> {
    let idx = y.iter().map(|l| w.output_index(l)).collect::<Result<Vec<_>>>()?;
    sc_decode(spec, w, &idx, genie)
}

struct Decoder<'a> {
    kernel: &'a Kernel,
    q: usize,
    frozen: &'a [Option<usize>],
    genie: Option<&'a [usize]>,
    u_hat: Vec<usize>,
    unique: Vec<Option<usize>>,
}

impl Decoder<'_> {
    /// Decodes `u[offset .. offset + len]` from likelihoods `lik` (`len·q`, position-major)
    /// and returns the re-encoded symbols fed back to the parent.
    fn run(&mut self, lik: &[f64], offset: usize) -> Vec<usize> {
        let q = self.q;
        let len = lik.len() / q;
        if len == 1 {
            return vec![self.decide(lik, offset)];
        }
        let ell = self.kernel.size();
        let m = len / ell;
        // v[d][j]: re-encoded symbols of segment d at block j.
        let mut v: Vec<Vec<usize>> = Vec::with_capacity(ell);
        let mut child = vec![0.0; m * q];
        let futures = |d: usize| q.pow((ell - 1 - d) as u32);
        let mut u = vec![0; ell];
        let mut x = vec![0; ell];
        for d in 0..ell {
            for j in 0..m {
                let block = &lik[j * ell * q..(j + 1) * ell * q];
                for (k, vk) in v.iter().enumerate() {
                    u[k] = vk[j];
                }
                let out = &mut child[j * q..(j + 1) * q];
                for (sym, o) in out.iter_mut().enumerate() {
                    u[d] = sym;
                    let mut acc = 0.0;
                    for f in 0..futures(d) {
                        digits_into(f, q, &mut u[d + 1..]);
                        self.kernel.apply(&u, &mut x);
                        acc += x.iter().enumerate().map(|(k, &xk)| block[k * q + xk]).product::<f64>();
                    }
                    *o = acc;
                }
                let total: f64 = out.iter().sum();
                if total > 0.0 {
                    out.iter_mut().for_each(|o| *o /= total);
                } else {
                    out.iter_mut().for_each(|o| *o = 1.0 / q as f64);
                }
            }
            v.push(self.run(&child, offset + d * m));
        }
        let mut xhat = vec![0; len];
        for j in 0..m {
            for (k, vk) in v.iter().enumerate() {
                u[k] = vk[j];
            }
            self.kernel.apply(&u, &mut x);
            xhat[j * ell..(j + 1) * ell].copy_from_slice(&x);
        }
        xhat
    }

    fn decide(&mut self, lik: &[f64], i: usize) -> usize {
        self.unique[i] = unique_max(lik);
        let ml = smallest_argmax(lik);
        self.u_hat[i] = match (self.genie, self.frozen[i]) {
            (Some(_), _) | (None, None) => ml,
            (None, Some(v)) => v,
        };
        match self.genie {
            Some(g) => g[i],
            None => self.u_hat[i],
        }
    }
}

fn smallest_argmax(lik: &[f64]) -> usize {
    let max = lik.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lik.iter().position(|&v| v == max || nearly_equal(v, max)).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub trials: usize,
    pub block_error_rate: f64,
    /// Symbol errors over information indices (every index in genie mode).
    pub symbol_error_rate: f64,
    /// `P(û_i ≠ u_i)` per index.
    pub per_index_error: Vec<f64>,
    /// `P(u_i is not the unique likelihood maximizer)` per index.
    pub per_index_ml_failure: Vec<f64>,
}

/// Monte-Carlo simulation over `trials` blocks.
///
/// Trial `t` uses ChaCha8 stream `t` under `seed`. Information symbols are
/// uniform; in genie mode every index, frozen or not, carries a uniform symbol.
pub fn simulate(spec: &CodeSpec, w: &Channel, trials: usize, seed: u64, genie: bool) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::InvalidChannel("trial count must be positive".into()));
    }
    let q = spec.kernel.alphabet_size();
    if w.input_size() != q {
        return Err(Error::AlphabetMismatch { channel: w.input_size(), kernel: q });
    }
    let len = spec.block_length();
    let cdfs = w.row_cdfs();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let u: Vec<usize> = spec
                .frozen
                .iter()
                .map(|f| match (genie, f) {
                    (false, Some(v)) => *v,
                    _ => rng.random_range(0..q),
                })
                .collect();
            let x = encode_rec(&spec.kernel, &u);
            let y: Vec<usize> = x.iter().map(|&xi| w.sample_with(&cdfs[xi], rng.random::<f64>())).collect();
            let d = sc_decode(spec, w, &y, genie.then_some(u.as_slice()))?;
            let wrong: Vec<bool> = d.u_hat.iter().zip(&u).map(|(a, b)| a != b).collect();
            let ml_fail: Vec<bool> = d.unique_max.iter().zip(&u).map(|(m, &b)| *m != Some(b)).collect();
            Ok((wrong, ml_fail))
        })
        .collect::<Result<Vec<_>>>()?;

    let counted: Vec<usize> = if genie { (0..len).collect() } else { spec.information_set() };
    let mut per_index = vec![0usize; len];
    let mut per_ml = vec![0usize; len];
    let mut blocks = 0usize;
    let mut symbols = 0usize;
    for (wrong, ml_fail) in &outcomes {
        let errs = counted.iter().filter(|&&i| wrong[i]).count();
        symbols += errs;
        blocks += usize::from(errs > 0);
        for i in 0..len {
            per_index[i] += usize::from(wrong[i]);
            per_ml[i] += usize::from(ml_fail[i]);
        }
    }
    let t = trials as f64;
    Ok(SimulationResult {
        trials,
        block_error_rate: blocks as f64 / t,
        symbol_error_rate: if counted.is_empty() { 0.0 } else { symbols as f64 / (t * counted.len() as f64) },
        per_index_error: per_index.iter().map(|&c| c as f64 / t).collect(),
        per_index_ml_failure: per_ml.iter().map(|&c| c as f64 / t).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfq::Field;

    fn all_info(kernel: Kernel, n: usize) -> CodeSpec {
        let len = kernel.size().pow(n as u32);
        CodeSpec::new(kernel, n, vec![None; len]).unwrap()
    }

    /// Block-major form of the same map, used as an independent reference.
    fn encode_outer(kernel: &Kernel, u: &[usize]) -> Vec<usize> {
        let ell = kernel.size();
        if u.len() == 1 {
            return u.to_vec();
        }
        let seg = u.len() / ell;
        let v: Vec<Vec<usize>> = u.chunks_exact(seg).map(|s| encode_outer(kernel, s)).collect();
        (0..seg)
            .flat_map(|j| kernel.image(&v.iter().map(|vd| vd[j]).collect::<Vec<_>>()))
            .collect()
    }

    #[test]
    fn encode_examples() {
        let spec = all_info(Kernel::arikan(), 0);
        assert_eq!(encode(&spec, &[1]).unwrap(), vec![1]);
        let spec = all_info(Kernel::arikan(), 1);
        for (u0, u1) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(encode(&spec, &[u0, u1]).unwrap(), vec![u0 ^ u1, u1]);
        }
        assert_eq!(encode(&spec, &[0]), Err(Error::LengthMismatch { expected: 2, actual: 1 }));
    }

    #[test]
    fn encode_is_bijective_and_matches_outer_form() {
        let f3 = Field::new(3).unwrap();
        let cases = [
            (Kernel::arikan(), 3),
            (Kernel::reed_solomon(&f3, 2).unwrap(), 2),
            (Kernel::from_map(3, 2, &[[0, 1], [2, 2], [1, 0], [0, 0], [1, 2], [2, 1], [0, 2], [1, 1], [2, 0]].map(|t| t.to_vec())).unwrap(), 2),
        ];
        for (k, n) in cases {
            let q = k.alphabet_size();
            let spec = all_info(k.clone(), n);
            let len = spec.block_length();
            let total = q.pow(len as u32);
            let mut seen = vec![false; total];
            let mut u = vec![0; len];
            for idx in 0..total {
                digits_into(idx, q, &mut u);
                let x = encode(&spec, &u).unwrap();
                assert_eq!(x, encode_outer(&k, &u));
                let xi = crate::numeric::index_of(&x, q);
                assert!(!std::mem::replace(&mut seen[xi], true));
            }
        }
    }

    #[test]
    fn noiseless_decoding_inverts() {
        let f4 = Field::new(4).unwrap();
        let k = Kernel::reed_solomon(&f4, 2).unwrap();
        let w = Channel::noiseless(4).unwrap();
        let spec = CodeSpec::from_information_set(k, 2, &[3, 7, 11, 12, 13, 14, 15]).unwrap();
        let r = simulate(&spec, &w, 50, 3, false).unwrap();
        assert_eq!((r.block_error_rate, r.symbol_error_rate), (0.0, 0.0));

        let bsc0 = Channel::symmetric(2, 0.0).unwrap();
        let spec = all_info(Kernel::arikan(), 1);
        for u in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let x = encode(&spec, &u).unwrap();
            let labels: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            assert_eq!(sc_decode_labels(&spec, &bsc0, &refs, None).unwrap().u_hat, u.to_vec());
        }
        assert!(matches!(
            sc_decode_labels(&spec, &bsc0, &["0", "7"], None),
            Err(Error::LabelUnknown(_))
        ));
    }

    #[test]
    fn all_frozen_never_errs() {
        let w = Channel::symmetric(2, 0.3).unwrap();
        let spec = CodeSpec::from_information_set(Kernel::arikan(), 3, &[]).unwrap();
        let r = simulate(&spec, &w, 100, 1, false).unwrap();
        assert_eq!(r.block_error_rate, 0.0);
    }

    #[test]
    fn simulation_is_deterministic() {
        let w = Channel::erasure(2, 0.4).unwrap();
        let spec = CodeSpec::from_information_set(Kernel::arikan(), 3, &[3, 5, 6, 7]).unwrap();
        let a = simulate(&spec, &w, 200, 9, false).unwrap();
        let b = simulate(&spec, &w, 200, 9, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate(&spec, &w, 200, 10, false).unwrap());
    }

    #[test]
    fn erasure_decisions_follow_tree() {
        // On an erasure channel, an index fails exactly when its synthetic channel erases.
        let w = Channel::erasure(2, 0.5).unwrap();
        let spec = all_info(Kernel::arikan(), 1);
        let r = simulate(&spec, &w, 4000, 5, true).unwrap();
        assert!((r.per_index_ml_failure[0] - 0.75).abs() < 0.05);
        assert!((r.per_index_ml_failure[1] - 0.25).abs() < 0.05);
    }
}
