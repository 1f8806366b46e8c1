//! Exact one-step channel transform.
//!
//! For a channel `W` and kernel `g`, the synthetic channel `W^(i)` has input
//! `u_i` and output `(y_0, ..., y_{ℓ-1}, u_0, ..., u_{i-1})`, with
//! `W^(i)(y, u_0^{i-1} | u_i) = q^{-(ℓ-1)} Σ_{u_{i+1}^{ℓ-1}} Π_k W(y_k | g(u)_k)`.
//!
//! Raw output tuples are enumerated in mixed-radix order, `y` before the
//! prefix, and proportional columns are merged on the fly. A merged output
//! keeps the label `y_0,...,y_{ℓ-1}|u_0,...,u_{i-1}` of its first member.

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budgets;
use crate::channel::{Channel, ColumnMerger, Permutation};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::numeric::{checked_pow, digits_into};

/// Tolerance of the chain-rule check `Σ_i I(W^(i)) = ℓ·I(W)`.
pub const CHAIN_RULE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SubchannelSet {
    pub parent: Channel,
    pub kernel: Kernel,
    pub channels: Vec<Channel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffGap {
    /// `I(W') − I(W)`.
    pub gap: f64,
    /// Cut-off-rate lower bound on `gap`.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub z: f64,
    pub upper: f64,
    pub distance: usize,
}

impl Sandwich {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.z + tol && self.z <= self.upper + tol
    }
}

fn check_compatible(w: &Channel, kernel: &Kernel) -> Result<()> {
    if w.input_size() != kernel.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            channel: w.input_size(),
            kernel: kernel.alphabet_size(),
        });
    }
    Ok(())
}

fn check_alphabet(size: Option<u128>, budget: u64) -> Result<usize> {
    match size {
        Some(s) if s <= budget as u128 => Ok(s as usize),
        Some(s) => Err(Error::AlphabetBudgetExceeded { size: s, budget }),
        None => Err(Error::AlphabetBudgetExceeded { size: u128::MAX, budget }),
    }
}

/// Raw output count `|Y|^ℓ · q^i`, checked against the budget, plus the `q^ℓ` image table.
fn check_sizes(w: &Channel, kernel: &Kernel, i: usize, budgets: &Budgets) -> Result<()> {
    let ell = kernel.size();
    let q = w.input_size();
    check_alphabet(kernel.domain_size(), budgets.alphabet)?;
    let raw = checked_pow(w.output_size(), ell).and_then(|y| y.checked_mul(checked_pow(q, i)?));
    check_alphabet(raw, budgets.alphabet)?;
    Ok(())
}

/// `g(prefix, t)` for every completion `t` of the prefix, in index order.
fn images(kernel: &Kernel, prefix: &[usize]) -> Vec<Vec<usize>> {
    let ell = kernel.size();
    let q = kernel.alphabet_size();
    let i = prefix.len();
    let count = checked_pow(q, ell - i).expect("checked by caller") as usize;
    let mut u = vec![0; ell];
    u[..i].copy_from_slice(prefix);
    (0..count)
        .map(|t| {
            digits_into(t, q, &mut u[i..]);
            kernel.image(&u)
        })
        .collect()
}

/// Nonzero products `(t, Π_k W(y_k | xs[t]_k))`, ordered by `t`.
type Sparse = Vec<(u32, f64)>;

/// Enumerates output tuples `y` with `y_0 = first`, skipping subtrees where
/// every product vanishes, and calls `leaf(y, p)` with the nonzero products.
fn product_dfs(w: &Channel, xs: &[Vec<usize>], first: usize, leaf: &mut dyn FnMut(&[usize], &Sparse)) {
    let ell = xs[0].len();
    let mut levels: Vec<Sparse> = vec![Vec::with_capacity(xs.len()); ell];
    let mut y = vec![0; ell];
    y[0] = first;
    levels[0].extend(
        xs.iter()
            .enumerate()
            .map(|(t, x)| (t as u32, w.prob(first, x[0])))
            .filter(|&(_, p)| p != 0.0),
    );
    if !levels[0].is_empty() {
        descend(w, xs, &mut levels, &mut y, 1, leaf);
    }
}

fn descend(
    w: &Channel,
    xs: &[Vec<usize>],
    levels: &mut [Sparse],
    y: &mut [usize],
    depth: usize,
    leaf: &mut dyn FnMut(&[usize], &Sparse),
) {
    let ell = y.len();
    if depth == ell {
        leaf(y, &levels[ell - 1]);
        return;
    }
    for yk in 0..w.output_size() {
        let (done, rest) = levels.split_at_mut(depth);
        let next = &mut rest[0];
        next.clear();
        next.extend(
            done[depth - 1]
                .iter()
                .map(|&(t, p)| (t, p * w.prob(yk, xs[t as usize][depth])))
                .filter(|&(_, p)| p != 0.0),
        );
        if !next.is_empty() {
            y[depth] = yk;
            descend(w, xs, levels, y, depth + 1, leaf);
        }
    }
}

/// Splits nonzero products into prefix blocks of length `block` and sums out
/// the suffix: calls `emit(p, col)` with `col[u_i] = scale · Σ_s prod[p·block + u_i·S + s]`.
fn fold_blocks(prod: &Sparse, q: usize, block: usize, scale: f64, col: &mut [f64], emit: &mut dyn FnMut(usize, &[f64])) {
    let s = block / q;
    let mut k = 0;
    while k < prod.len() {
        let p = prod[k].0 as usize / block;
        col.iter_mut().for_each(|c| *c = 0.0);
        while k < prod.len() && prod[k].0 as usize / block == p {
            let (t, v) = prod[k];
            col[(t as usize % block) / s] += v;
            k += 1;
        }
        col.iter_mut().for_each(|c| *c *= scale);
        emit(p, col);
    }
}

fn tuple_label(w: &Channel, y: &[usize], prefix: &[usize]) -> String {
    let mut s = y.iter().map(|&v| w.labels()[v].as_str()).collect::<Vec<_>>().join(",");
    if !prefix.is_empty() {
        s.push('|');
        s.push_str(&prefix.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    }
    s
}

/// Merged `W^(i)` for each `i` in `which`.
fn merged_subchannels(w: &Channel, kernel: &Kernel, which: &[usize]) -> Vec<Channel> {
    let q = w.input_size();
    let ell = kernel.size();
    let xs = images(kernel, &[]);
    let scale = 1.0 / (q as f64).powi(ell as i32 - 1);

    let chunks: Vec<Vec<(Vec<String>, Vec<f64>)>> = (0..w.output_size())
        .into_par_iter()
        .map(|first| {
            let mut mergers: Vec<ColumnMerger> = which.iter().map(|_| ColumnMerger::new(q)).collect();
            let mut col = vec![0.0; q];
            let mut prefix_digits = vec![0; ell];
            product_dfs(w, &xs, first, &mut |y, prod| {
                for (m, &i) in mergers.iter_mut().zip(which) {
                    let block = q.pow((ell - i) as u32);
                    let prefix = &mut prefix_digits[..i];
                    fold_blocks(prod, q, block, scale, &mut col, &mut |p, c| {
                        m.push(c, || {
                            digits_into(p, q, prefix);
                            tuple_label(w, y, prefix)
                        });
                    });
                }
            });
            mergers.into_iter().map(ColumnMerger::into_parts).collect()
        })
        .collect();

    (0..which.len())
        .map(|k| {
            let mut merger = ColumnMerger::new(q);
            for chunk in &chunks {
                let (labels, cols) = &chunk[k];
                for (label, col) in labels.iter().zip(cols.chunks_exact(q)) {
                    merger.push(col, || label.clone());
                }
            }
            merger.finish()
        })
        .collect()
}

/// `W^(i)`, merged.
pub fn subchannel(w: &Channel, kernel: &Kernel, i: usize, budgets: &Budgets) -> Result<Channel> {
    check_compatible(w, kernel)?;
    if i >= kernel.size() {
        return Err(Error::IndexOutOfRange { index: i, limit: kernel.size() });
    }
    check_sizes(w, kernel, i, budgets)?;
    Ok(merged_subchannels(w, kernel, &[i]).pop().expect("one channel"))
}

/// `W^(i)` over the full raw alphabet `Y^ℓ × X^i`, zero columns included.
pub fn subchannel_unmerged(w: &Channel, kernel: &Kernel, i: usize, budgets: &Budgets) -> Result<Channel> {
    check_compatible(w, kernel)?;
    let ell = kernel.size();
    if i >= ell {
        return Err(Error::IndexOutOfRange { index: i, limit: ell });
    }
    check_sizes(w, kernel, i, budgets)?;
    let q = w.input_size();
    let ny = w.output_size();
    let np = q.pow(i as u32);
    let n_out = ny.pow(ell as u32) * np;
    let xs = images(kernel, &[]);
    let scale = 1.0 / (q as f64).powi(ell as i32 - 1);
    let block = q.pow((ell - i) as u32);

    let mut cols = vec![0.0; n_out * q];
    let mut col = vec![0.0; q];
    for first in 0..ny {
        product_dfs(w, &xs, first, &mut |y, prod| {
            let y_idx = crate::numeric::index_of(y, ny);
            fold_blocks(prod, q, block, scale, &mut col, &mut |p, c| {
                let out = y_idx * np + p;
                cols[out * q..(out + 1) * q].copy_from_slice(c);
            });
        });
    }
    let mut y = vec![0; ell];
    let mut prefix = vec![0; i];
    let labels = (0..n_out)
        .map(|out| {
            digits_into(out / np, ny, &mut y);
            digits_into(out % np, q, &mut prefix);
            tuple_label(w, &y, &prefix)
        })
        .collect();
    Ok(Channel::from_columns_labelled(q, labels, cols))
}

/// All `ℓ` subchannels, validated against the chain rule.
pub fn subchannels(w: &Channel, kernel: &Kernel, budgets: &Budgets) -> Result<SubchannelSet> {
    check_compatible(w, kernel)?;
    let ell = kernel.size();
    check_sizes(w, kernel, ell - 1, budgets)?;
    let which: Vec<usize> = (0..ell).collect();
    let channels = merged_subchannels(w, kernel, &which);
    let sum: f64 = channels.iter().map(Channel::symmetric_capacity).sum();
    let expected = ell as f64 * w.symmetric_capacity();
    if (sum - expected).abs() > CHAIN_RULE_TOL {
        return Err(Error::ChainRule { sum, expected });
    }
    Ok(SubchannelSet {
        parent: w.clone(),
        kernel: kernel.clone(),
        channels,
    })
}

/// `W^(i)_{prefix}`: output `y ∈ Y^ℓ`, input `u_i`, with `u_0^{i-1}` fixed to `prefix`.
pub fn conditional_subchannel(w: &Channel, kernel: &Kernel, prefix: &[usize], budgets: &Budgets) -> Result<Channel> {
    check_compatible(w, kernel)?;
    let q = w.input_size();
    let ell = kernel.size();
    let i = prefix.len();
    if i >= ell {
        return Err(Error::IndexOutOfRange { index: i, limit: ell });
    }
    if let Some(&s) = prefix.iter().find(|&&s| s >= q) {
        return Err(Error::IndexOutOfRange { index: s, limit: q });
    }
    check_sizes(w, kernel, 0, budgets)?;
    let xs = images(kernel, prefix);
    let scale = 1.0 / (q as f64).powi((ell - 1 - i) as i32);
    let mut merger = ColumnMerger::new(q);
    let mut col = vec![0.0; q];
    for first in 0..w.output_size() {
        product_dfs(w, &xs, first, &mut |y, prod| {
            fold_blocks(prod, q, xs.len(), scale, &mut col, &mut |_, c| {
                merger.push(c, || tuple_label(w, y, &[]));
            });
        });
    }
    Ok(merger.finish())
}

/// `W'(y_1, y_2 | x) = W(y_1 | σ(x)) · W(y_2 | τ(x))`, unmerged over `Y²`.
pub fn pair_channel(w: &Channel, sigma: &Permutation, tau: &Permutation) -> Result<Channel> {
    let q = w.input_size();
    for p in [sigma, tau] {
        if p.len() != q {
            return Err(Error::InvalidPermutation(format!("length {} for alphabet {q}", p.len())));
        }
    }
    let ny = w.output_size();
    let mut cols = Vec::with_capacity(ny * ny * q);
    let mut labels = Vec::with_capacity(ny * ny);
    for y1 in 0..ny {
        for y2 in 0..ny {
            cols.extend((0..q).map(|x| w.prob(y1, sigma.apply(x)) * w.prob(y2, tau.apply(x))));
            labels.push(format!("{},{}", w.labels()[y1], w.labels()[y2]));
        }
    }
    Ok(Channel::from_columns_labelled(q, labels, cols))
}

/// Capacity gain of the paired channel and its cut-off-rate lower bound.
pub fn cutoff_gap(w: &Channel, sigma: &Permutation, tau: &Permutation) -> Result<CutoffGap> {
    let pair = pair_channel(w, sigma, tau)?;
    let q = w.input_size();
    let z = w.bhattacharyya_matrix();
    let rho = tau.compose(&sigma.inverse());
    let mut acc = 0.0;
    for zz in 0..q {
        for x in 0..q {
            acc += z[zz][x] * z[zz][x] * (1.0 - z[rho.apply(zz)][rho.apply(x)]);
        }
    }
    let inner = 1.0 - acc / (q * q) as f64;
    let bound = (-inner.ln() / (q as f64).ln()).max(0.0);
    Ok(CutoffGap {
        gap: pair.symmetric_capacity() - w.symmetric_capacity(),
        bound,
    })
}

/// `Z_{x,x'}(W^(i)_{prefix})` together with its partial-distance bounds.
pub fn sandwich_check(
    w: &Channel,
    kernel: &Kernel,
    x: usize,
    x2: usize,
    prefix: &[usize],
    budgets: &Budgets,
) -> Result<Sandwich> {
    let q = w.input_size();
    let ell = kernel.size();
    let i = prefix.len();
    let d = kernel.partial_distance(i, x, x2, prefix, budgets)?;
    let ch = conditional_subchannel(w, kernel, prefix, budgets)?;
    let free = (ell - 1 - i) as i32;
    let qf = q as f64;
    Ok(Sandwich {
        lower: qf.powi(-2 * free) * w.z_min().powi(d as i32),
        z: ch.bhattacharyya_pair(x, x2),
        upper: qf.powi(free) * w.z_max().powi(d as i32),
        distance: d,
    })
}
