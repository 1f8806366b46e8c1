//! Finite q-ary discrete memoryless channels and their functionals.
//!
//! A [`Channel`] is a `q × |Y|` table of transition probabilities `W(y|x)`.
//! Logarithms are taken to base q, so the symmetric capacity lies in `[0, 1]`.

mod degrade;
mod permutation;

pub use permutation::Permutation;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, nearly_equal, CompensatedSum};

/// Row sums of user-supplied tables must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Relative tolerance on posterior vectors for treating two outputs as proportional.
pub const MERGE_RTOL: f64 = 1e-10;

/// A finite q-ary DMC.
///
/// Probabilities are stored column by column: `cols[y * q + x] = W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    q: usize,
    labels: Vec<String>,
    cols: Vec<f64>,
}

/// Quantities related by the Bhattacharyya/capacity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub error_prob: f64,
    /// `(q-1) Z(W)`, an upper bound on `error_prob`.
    pub error_prob_bound: f64,
    pub capacity: f64,
    /// `log(q / (1 + (q-1) Z))`.
    pub capacity_lower: f64,
    /// `log(q/2) + log(2) sqrt(1 - Z^2)`.
    pub capacity_upper: f64,
    /// `2 (q-1) log(e) sqrt(1 - Z^2)`.
    pub capacity_upper_alt: f64,
}

impl BoundReport {
    /// Whether all four inequalities hold up to `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.error_prob <= self.error_prob_bound + tol
            && self.capacity_lower <= self.capacity + tol
            && self.capacity <= self.capacity_upper + tol
            && self.capacity <= self.capacity_upper_alt + tol
    }
}

impl Channel {
    /// Builds a channel from a row-major table `probs[x][y]`, labelling outputs `0..|Y|`.
    pub fn from_table(q: usize, probs: &[Vec<f64>]) -> Result<Self> {
        let ny = probs.first().map_or(0, Vec::len);
        let labels = (0..ny).map(|y| y.to_string()).collect();
        Self::with_labels(q, labels, probs)
    }

    /// Builds a channel with explicit output labels.
    pub fn with_labels(q: usize, labels: Vec<String>, probs: &[Vec<f64>]) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidChannel(format!(
                "input alphabet must have at least 2 symbols, got {q}"
            )));
        }
        if probs.len() != q {
            return Err(Error::InvalidChannel(format!(
                "expected {q} rows, got {}",
                probs.len()
            )));
        }
        let ny = labels.len();
        if ny == 0 {
            return Err(Error::InvalidChannel("output alphabet is empty".into()));
        }
        let mut cols = vec![0.0; q * ny];
        for (x, row) in probs.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::InvalidDistribution {
                    row: x,
                    reason: format!("has {} entries, expected {ny}", row.len()),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidDistribution {
                    row: x,
                    reason: format!("entry {v} is not a nonnegative number"),
                });
            }
            let sum = compensated_sum(row.iter().copied());
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidDistribution {
                    row: x,
                    reason: format!("sums to {sum}"),
                });
            }
            for (y, &v) in row.iter().enumerate() {
                cols[y * q + x] = v;
            }
        }
        Ok(Self { q, labels, cols })
    }

    /// Internal constructor from a column-major table; numbering outputs from 0.
    pub(crate) fn from_columns(q: usize, cols: Vec<f64>) -> Self {
        debug_assert!(q >= 2 && cols.len().is_multiple_of(q) && !cols.is_empty());
        let ny = cols.len() / q;
        Self {
            q,
            labels: (0..ny).map(|y| y.to_string()).collect(),
            cols,
        }
    }

    pub(crate) fn from_columns_labelled(q: usize, labels: Vec<String>, cols: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len() * q, cols.len());
        Self { q, labels, cols }
    }

    /// q-ary erasure channel: `q + 1` outputs, the last one being the erasure.
    pub fn erasure(q: usize, eps: f64) -> Result<Self> {
        check_probability(eps)?;
        let probs: Vec<Vec<f64>> = (0..q)
            .map(|x| {
                let mut row = vec![0.0; q + 1];
                row[x] = 1.0 - eps;
                row[q] = eps;
                row
            })
            .collect();
        let mut labels: Vec<String> = (0..q).map(|y| y.to_string()).collect();
        labels.push("?".into());
        Self::with_labels(q, labels, &probs)
    }

    /// q-ary symmetric channel: correct with probability `1 - p`, otherwise uniform over the other symbols.
    pub fn symmetric(q: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        if q < 2 {
            return Err(Error::InvalidChannel(format!(
                "input alphabet must have at least 2 symbols, got {q}"
            )));
        }
        let off = p / (q - 1) as f64;
        let probs: Vec<Vec<f64>> = (0..q)
            .map(|x| (0..q).map(|y| if x == y { 1.0 - p } else { off }).collect())
            .collect();
        Self::from_table(q, &probs)
    }

    /// Noiseless channel `y = x`.
    pub fn noiseless(q: usize) -> Result<Self> {
        Self::symmetric(q, 0.0)
    }

    /// Single-output channel: the output carries no information.
    pub fn useless(q: usize) -> Result<Self> {
        Self::from_table(q, &vec![vec![1.0]; q])
    }

    pub fn input_size(&self) -> usize {
        self.q
    }

    pub fn output_size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the output with the given label.
    pub fn output_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelUnknown(label.to_string()))
    }

    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.cols[y * self.q + x]
    }

    /// Likelihood column `(W(y|0), ..., W(y|q-1))`.
    #[inline]
    pub fn column(&self, y: usize) -> &[f64] {
        &self.cols[y * self.q..(y + 1) * self.q]
    }

    /// Row-major copy of the table.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.q)
            .map(|x| (0..self.output_size()).map(|y| self.prob(y, x)).collect())
            .collect()
    }

    /// Symmetric capacity `I(W)` in base-q units.
    pub fn symmetric_capacity(&self) -> f64 {
        let q = self.q as f64;
        let ln_q = q.ln();
        let mut acc = CompensatedSum::new();
        for col in self.cols.chunks_exact(self.q) {
            let mean = compensated_sum(col.iter().copied()) / q;
            if mean <= 0.0 {
                continue;
            }
            for &w in col {
                if w > 0.0 {
                    acc.add(w / q * (w / mean).ln());
                }
            }
        }
        (acc.value() / ln_q).clamp(0.0, 1.0)
    }

    /// `Z_{x,x'}(W) = Σ_y sqrt(W(y|x) W(y|x'))`.
    pub fn bhattacharyya_pair(&self, x: usize, x2: usize) -> f64 {
        if x == x2 {
            return 1.0;
        }
        compensated_sum(
            self.cols
                .chunks_exact(self.q)
                .map(|col| col[x].sqrt() * col[x2].sqrt()),
        )
    }

    /// All pairwise parameters, `z[x][x']`.
    pub fn bhattacharyya_matrix(&self) -> Vec<Vec<f64>> {
        let mut z = vec![vec![1.0; self.q]; self.q];
        for x in 0..self.q {
            for x2 in x + 1..self.q {
                let v = self.bhattacharyya_pair(x, x2);
                z[x][x2] = v;
                z[x2][x] = v;
            }
        }
        z
    }

    /// Average of `Z_{x,x'}` over ordered distinct pairs.
    pub fn bhattacharyya(&self) -> f64 {
        let pairs = self.distinct_pairs();
        compensated_sum(pairs.iter().copied()) / pairs.len() as f64
    }

    pub fn z_max(&self) -> f64 {
        self.distinct_pairs().into_iter().fold(0.0, f64::max)
    }

    /// Minimum over distinct pairs (`Z_{x,x} = 1` never lies below these).
    pub fn z_min(&self) -> f64 {
        self.distinct_pairs().into_iter().fold(1.0, f64::min)
    }

    fn distinct_pairs(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q * (self.q - 1) / 2);
        for x in 0..self.q {
            for x2 in x + 1..self.q {
                out.push(self.bhattacharyya_pair(x, x2));
            }
        }
        out
    }

    /// Average of `Z_{σ^i(x), σ^i(x')}` over `i = 0..q!-1`.
    ///
    /// The sequence of pairs is periodic with a period dividing `q!`, so one
    /// period gives the same average.
    pub fn z_avg_sigma(&self, sigma: &Permutation, x: usize, x2: usize) -> f64 {
        let (mut a, mut b) = (x, x2);
        let mut acc = CompensatedSum::new();
        let mut period = 0usize;
        loop {
            acc.add(self.bhattacharyya_pair(a, b));
            period += 1;
            a = sigma.apply(a);
            b = sigma.apply(b);
            if (a, b) == (x, x2) {
                break;
            }
        }
        acc.value() / period as f64
    }

    /// Error probability of ML estimation with strict decision regions.
    ///
    /// An output belongs to `D_x` only when `W(y|x)` is strictly larger than
    /// every other `W(y|x')`; tied outputs count as errors for every input.
    pub fn error_prob(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for col in self.cols.chunks_exact(self.q) {
            let total = compensated_sum(col.iter().copied());
            let correct = unique_max(col).map_or(0.0, |x| col[x]);
            acc.add(total - correct);
        }
        (acc.value() / self.q as f64).clamp(0.0, 1.0)
    }

    /// Error probability of an ML decoder with any deterministic tie-break.
    pub fn ml_error_prob(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for col in self.cols.chunks_exact(self.q) {
            let total = compensated_sum(col.iter().copied());
            let max = col.iter().copied().fold(0.0, f64::max);
            acc.add(total - max);
        }
        (acc.value() / self.q as f64).clamp(0.0, 1.0)
    }

    pub fn bound_report(&self) -> BoundReport {
        let q = self.q as f64;
        let ln_q = q.ln();
        let z = self.bhattacharyya();
        let root = (1.0 - z * z).max(0.0).sqrt();
        BoundReport {
            error_prob: self.error_prob(),
            error_prob_bound: (q - 1.0) * z,
            capacity: self.symmetric_capacity(),
            capacity_lower: (q / (1.0 + (q - 1.0) * z)).ln() / ln_q,
            capacity_upper: (q / 2.0).ln() / ln_q + 2f64.ln() / ln_q * root,
            capacity_upper_alt: 2.0 * (q - 1.0) / ln_q * root,
        }
    }

    /// The same channel with outputs relabelled `0..|Y|`.
    pub fn with_index_labels(mut self) -> Channel {
        self.labels = (0..self.output_size()).map(|y| y.to_string()).collect();
        self
    }

    /// Merges outputs with proportional likelihood columns and drops all-zero outputs.
    ///
    /// The merged output keeps the label of the first member of its class.
    pub fn merge_equivalent(&self) -> Channel {
        merge_columns(self.q, &self.cols, |y| self.labels[y].clone())
    }

    /// Degrading quantization to at most `budget` outputs.
    ///
    /// After [`merge_equivalent`](Self::merge_equivalent), output pairs are merged greedily,
    /// each time choosing the pair whose merge loses the least symmetric capacity.
    pub fn degrade(&self, budget: usize) -> Result<Channel> {
        if budget < self.q {
            return Err(Error::InvalidBudget { budget, q: self.q });
        }
        let merged = self.merge_equivalent();
        if merged.output_size() <= budget {
            return Ok(merged);
        }
        Ok(degrade::greedy_merge(merged, budget))
    }

    /// Draws an output for input `x` given a uniform variate `u ∈ [0, 1)`.
    pub(crate) fn sample_with(&self, cdf: &[f64], u: f64) -> usize {
        let y = cdf.partition_point(|&c| c <= u);
        y.min(cdf.len() - 1)
    }

    /// Cumulative distribution of each row, for sampling.
    pub(crate) fn row_cdfs(&self) -> Vec<Vec<f64>> {
        (0..self.q)
            .map(|x| {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = (0..self.output_size())
                    .map(|y| {
                        acc += self.prob(y, x);
                        acc
                    })
                    .collect();
                // Outputs after the last positive entry must never be drawn.
                if let Some(last) = (0..self.output_size()).rev().find(|&y| self.prob(y, x) > 0.0) {
                    for c in cdf[last..].iter_mut() {
                        *c = f64::INFINITY;
                    }
                }
                cdf
            })
            .collect()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidChannel(format!("{p} is not a probability")))
    }
}

/// The input with strictly largest likelihood in `col`, if there is a unique one.
pub(crate) fn unique_max(col: &[f64]) -> Option<usize> {
    let (arg, max) = col
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (x, v)| if v > best.1 { (x, v) } else { best });
    if max <= 0.0 {
        return None;
    }
    let ties = col.iter().filter(|&&v| nearly_equal(v, max)).count();
    (ties == 1).then_some(arg)
}

/// Merges proportional columns of a column-major table.
pub(crate) fn merge_columns(q: usize, cols: &[f64], label: impl Fn(usize) -> String) -> Channel {
    let mut merger = ColumnMerger::new(q);
    for (y, col) in cols.chunks_exact(q).enumerate() {
        merger.push(col, || label(y));
    }
    merger.finish()
}

/// Streaming form of [`merge_columns`]: columns are bucketed by their posterior
/// vector on a grid of step [`MERGE_RTOL`], in arrival order.
pub(crate) struct ColumnMerger {
    q: usize,
    index: std::collections::HashMap<Vec<i64>, usize>,
    sums: Vec<CompensatedSum>,
    labels: Vec<String>,
    key: Vec<i64>,
}

impl ColumnMerger {
    pub(crate) fn new(q: usize) -> Self {
        Self {
            q,
            index: Default::default(),
            sums: Vec::new(),
            labels: Vec::new(),
            key: Vec::with_capacity(q),
        }
    }

    /// Adds one column; `label` is evaluated only if the column opens a new class.
    pub(crate) fn push(&mut self, col: &[f64], label: impl FnOnce() -> String) {
        let q = self.q;
        let total: f64 = col.iter().sum();
        if total <= 0.0 {
            return;
        }
        let scale = 1.0 / MERGE_RTOL;
        self.key.clear();
        self.key.extend(col.iter().map(|&w| (w / total * scale).round() as i64));
        let slot = match self.index.get(&self.key) {
            Some(&slot) => slot,
            None => {
                let slot = self.labels.len();
                self.index.insert(self.key.clone(), slot);
                self.labels.push(label());
                self.sums.extend(std::iter::repeat_n(CompensatedSum::new(), q));
                slot
            }
        };
        for (acc, &w) in self.sums[slot * q..(slot + 1) * q].iter_mut().zip(col) {
            acc.add(w);
        }
    }

    pub(crate) fn finish(self) -> Channel {
        let merged: Vec<f64> = self.sums.iter().map(CompensatedSum::value).collect();
        if merged.is_empty() {
            // Only reachable for an all-zero table; keep a single output.
            return Channel::from_columns(self.q, vec![0.0; self.q]);
        }
        Channel::from_columns_labelled(self.q, self.labels, merged)
    }

    /// Drains the merged classes as `(label, column)` pairs in class order.
    pub(crate) fn into_parts(self) -> (Vec<String>, Vec<f64>) {
        (self.labels, self.sums.iter().map(CompensatedSum::value).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn bhattacharyya_survives_tiny_masses() {
        let w = Channel::erasure(2, 1e-200).unwrap();
        assert!((w.bhattacharyya() / 1e-200 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erasure_and_symmetric_tables() {
        let e = Channel::erasure(4, 0.0).unwrap();
        assert_eq!(e.output_size(), 5);
        assert_eq!(e.prob(4, 2), 0.0);
        let b = Channel::symmetric(2, 0.1).unwrap();
        assert_eq!(b.rows(), vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
    }

    #[test]
    fn rejects_bad_rows() {
        let err = Channel::from_table(2, &[vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::InvalidDistribution { row: 0, .. }));
        assert!(Channel::from_table(2, &[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(Channel::from_table(2, &[vec![1.0]]).is_err());
        assert!(Channel::erasure(2, 1.5).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert!((Channel::noiseless(3).unwrap().symmetric_capacity() - 1.0).abs() < EPS);
        assert!((Channel::erasure(4, 0.25).unwrap().symmetric_capacity() - 0.75).abs() < EPS);
        assert_eq!(Channel::useless(3).unwrap().symmetric_capacity(), 0.0);
    }

    #[test]
    fn bhattacharyya_examples() {
        let e = Channel::erasure(5, 0.3).unwrap();
        for x in 0..5 {
            for x2 in 0..5 {
                let expect = if x == x2 { 1.0 } else { 0.3 };
                assert!((e.bhattacharyya_pair(x, x2) - expect).abs() < EPS);
            }
        }
        assert_eq!(Channel::noiseless(4).unwrap().bhattacharyya(), 0.0);
        let u = Channel::useless(3).unwrap();
        assert!((u.z_max() - 1.0).abs() < EPS && (u.z_min() - 1.0).abs() < EPS);
    }

    #[test]
    fn z_avg_sigma_examples() {
        let w = Channel::from_table(3, &[vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3], vec![0.2, 0.2, 0.6]])
            .unwrap();
        let id = Permutation::identity(3);
        for x in 0..3 {
            for x2 in 0..3 {
                assert!((w.z_avg_sigma(&id, x, x2) - w.bhattacharyya_pair(x, x2)).abs() < EPS);
            }
            assert_eq!(w.z_avg_sigma(&id, x, x), 1.0);
        }
        let e = Channel::erasure(4, 0.35).unwrap();
        let cyc = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        assert!((e.z_avg_sigma(&cyc, 0, 2) - 0.35).abs() < EPS);

        // Literal q!-term average for a 3-cycle on q = 3.
        let sigma = Permutation::new(vec![1, 2, 0]).unwrap();
        let mut literal = 0.0;
        let (mut a, mut b) = (0, 1);
        for _ in 0..6 {
            literal += w.bhattacharyya_pair(a, b);
            a = sigma.apply(a);
            b = sigma.apply(b);
        }
        assert!((w.z_avg_sigma(&sigma, 0, 1) - literal / 6.0).abs() < EPS);
    }

    #[test]
    fn error_prob_examples() {
        assert_eq!(Channel::noiseless(3).unwrap().error_prob(), 0.0);
        assert_eq!(Channel::useless(3).unwrap().error_prob(), 1.0);
        assert!((Channel::erasure(2, 0.3).unwrap().error_prob() - 0.3).abs() < EPS);
        // The conventional ML error halves the tie mass for q = 2.
        assert!((Channel::erasure(2, 0.3).unwrap().ml_error_prob() - 0.15).abs() < EPS);
    }

    #[test]
    fn bound_report_examples() {
        let r = Channel::noiseless(3).unwrap().bound_report();
        assert_eq!(r.error_prob, 0.0);
        assert!((r.capacity_lower - 1.0).abs() < EPS && (r.capacity - 1.0).abs() < EPS);
        assert!(Channel::erasure(3, 0.5).unwrap().bound_report().holds(EPS));
        let b = Channel::symmetric(2, 0.11).unwrap().bound_report();
        let z = 2.0 * (0.11f64 * 0.89).sqrt();
        assert!((b.error_prob_bound - z).abs() < EPS);
        assert!(b.holds(EPS));
    }

    #[test]
    fn merge_examples() {
        let w = Channel::from_table(2, &[vec![0.5, 0.3, 0.2], vec![0.1, 0.3, 0.6]]).unwrap();
        // Duplicate column 1.
        let dup = Channel::from_table(2, &[vec![0.5, 0.15, 0.15, 0.2], vec![0.1, 0.15, 0.15, 0.6]])
            .unwrap();
        let m = dup.merge_equivalent();
        assert_eq!(m.output_size(), 3);
        assert!((m.symmetric_capacity() - w.symmetric_capacity()).abs() < 1e-12);

        let split = Channel::from_table(2, &[vec![0.5, 0.0, 0.25, 0.25], vec![0.0, 0.5, 0.25, 0.25]])
            .unwrap();
        let m = split.merge_equivalent();
        assert_eq!(m.output_size(), 3);
        assert!((m.symmetric_capacity() - 0.5).abs() < 1e-12);

        let id = Channel::noiseless(3).unwrap();
        assert_eq!(id.merge_equivalent(), id);
    }

    #[test]
    fn merge_drops_zero_columns() {
        let w = Channel::from_table(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(w.merge_equivalent().output_size(), 1);
    }

    #[test]
    fn degrade_examples() {
        let e = Channel::erasure(2, 0.5).unwrap();
        assert_eq!(e.degrade(3).unwrap(), e.merge_equivalent());
        let d = e.degrade(2).unwrap();
        assert_eq!(d.output_size(), 2);
        assert!(d.symmetric_capacity() <= e.symmetric_capacity() + 1e-12);
        assert!(d.bhattacharyya() >= e.bhattacharyya() - 1e-12);
        let id = Channel::noiseless(2).unwrap().degrade(2).unwrap();
        assert!((id.symmetric_capacity() - 1.0).abs() < 1e-12);
        assert_eq!(e.degrade(1).unwrap_err(), Error::InvalidBudget { budget: 1, q: 2 });
    }

    #[test]
    fn unique_max_treats_near_ties_as_ties() {
        assert_eq!(unique_max(&[0.3, 0.3 * (1.0 + 1e-15)]), None);
        assert_eq!(unique_max(&[0.3, 0.4]), Some(1));
        assert_eq!(unique_max(&[0.0, 0.0]), None);
    }
}
