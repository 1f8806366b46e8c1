//! Greedy capacity-preserving output merging.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::Channel;

/// Above this many outputs the greedy search is preceded by coarse
/// posterior-grid merging, which bounds each neighbour scan.
const EXACT_LIMIT: usize = 1024;

/// Merge candidates proposed by each output.
const NEIGHBOURS: usize = 16;

/// Contribution of one likelihood column to `q · ln(q) · I(W)`.
fn column_cost(col: &[f64]) -> f64 {
    let q = col.len() as f64;
    let mean = col.iter().sum::<f64>() / q;
    if mean <= 0.0 {
        return 0.0;
    }
    col.iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * (w / mean).ln())
        .sum()
}

fn merged_cost(a: &[f64], b: &[f64]) -> f64 {
    let q = a.len() as f64;
    let mean = (a.iter().sum::<f64>() + b.iter().sum::<f64>()) / q;
    if mean <= 0.0 {
        return 0.0;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| x + y)
        .filter(|&w| w > 0.0)
        .map(|w| w * (w / mean).ln())
        .sum()
}

struct Candidate {
    loss: f64,
    i: usize,
    j: usize,
    vi: u32,
    vj: u32,
}

impl Candidate {
    fn new(loss: f64, i: usize, j: usize, version: &[u32]) -> Self {
        Self { loss, i, j, vi: version[i], vj: version[j] }
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.loss
            .total_cmp(&other.loss)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
            .then(self.vi.cmp(&other.vi))
            .then(self.vj.cmp(&other.vj))
    }
}

struct Pool {
    q: usize,
    cols: Vec<f64>,
    labels: Vec<String>,
    alive: Vec<bool>,
}

impl Pool {
    fn col(&self, i: usize) -> &[f64] {
        &self.cols[i * self.q..(i + 1) * self.q]
    }

    fn absorb(&mut self, into: usize, from: usize) {
        let q = self.q;
        for x in 0..q {
            self.cols[into * q + x] += self.cols[from * q + x];
            self.cols[from * q + x] = 0.0;
        }
        self.alive[from] = false;
    }

    fn posterior_into(&self, i: usize, out: &mut [f64]) {
        let col = self.col(i);
        let total: f64 = col.iter().sum();
        for (o, &w) in out.iter_mut().zip(col) {
            *o = if total > 0.0 { w / total } else { 0.0 };
        }
    }

    fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    fn into_channel(self) -> Channel {
        let q = self.q;
        let mut cols = Vec::new();
        let mut labels = Vec::new();
        for (i, label) in self.labels.into_iter().enumerate() {
            if self.alive[i] {
                cols.extend_from_slice(&self.cols[i * q..(i + 1) * q]);
                labels.push(label);
            }
        }
        Channel::from_columns_labelled(q, labels, cols)
    }

    /// Merges all columns whose posteriors fall in the same cell of a `2^bits` grid.
    fn coarsen(&mut self, bits: u32) {
        use std::collections::HashMap;
        let scale = (1u64 << bits) as f64;
        let mut cells: HashMap<Vec<u64>, usize> = HashMap::new();
        for i in 0..self.alive.len() {
            if !self.alive[i] {
                continue;
            }
            let col = self.col(i);
            let total: f64 = col.iter().sum();
            let key: Vec<u64> = col.iter().map(|&w| (w / total * scale).floor() as u64).collect();
            match cells.get(&key) {
                Some(&rep) => self.absorb(rep, i),
                None => {
                    cells.insert(key, i);
                }
            }
        }
    }
}

/// The `NEIGHBOURS` live outputs closest to `i` in L1 posterior distance, nearest first.
fn nearest(pool: &Pool, post: &[f64], i: usize) -> Vec<usize> {
    let q = pool.q;
    let pi = &post[i * q..(i + 1) * q];
    let mut dist: Vec<(f64, usize)> = (0..pool.alive.len())
        .filter(|&j| j != i && pool.alive[j])
        .map(|j| {
            let d = pi.iter().zip(&post[j * q..(j + 1) * q]).map(|(a, b)| (a - b).abs()).sum();
            (d, j)
        })
        .collect();
    let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if dist.len() > NEIGHBOURS {
        dist.select_nth_unstable_by(NEIGHBOURS, by);
        dist.truncate(NEIGHBOURS);
    }
    dist.sort_unstable_by(by);
    dist.into_iter().map(|(_, j)| j).collect()
}

pub(super) fn greedy_merge(channel: Channel, budget: usize) -> Channel {
    let q = channel.input_size();
    let n = channel.output_size();
    let mut pool = Pool {
        q,
        cols: channel.cols,
        labels: channel.labels,
        alive: vec![true; n],
    };

    let mut bits = 40;
    while pool.alive_count() > EXACT_LIMIT.max(budget) && bits > 0 {
        bits -= 1;
        pool.coarsen(bits);
    }

    let mut cost = vec![0.0; n];
    let mut post = vec![0.0; n * q];
    for i in (0..n).filter(|&i| pool.alive[i]) {
        cost[i] = column_cost(pool.col(i));
        pool.posterior_into(i, &mut post[i * q..(i + 1) * q]);
    }

    // Candidate pairs keyed by (loss, i, j) with i < j; an entry is stale once
    // either endpoint's version has moved on. Each output proposes its nearest
    // neighbours in posterior space, which include the posterior-adjacent pairs.
    let mut version = vec![0u32; n];
    let mut heap = BinaryHeap::new();
    let push_candidates = |heap: &mut BinaryHeap<Reverse<Candidate>>, pool: &Pool, cost: &[f64], post: &[f64], version: &[u32], i: usize| {
        for j in nearest(pool, post, i) {
            let (a, b) = (i.min(j), i.max(j));
            let loss = cost[a] + cost[b] - merged_cost(pool.col(a), pool.col(b));
            heap.push(Reverse(Candidate::new(loss, a, b, version)));
        }
    };
    for i in (0..n).filter(|&i| pool.alive[i]) {
        push_candidates(&mut heap, &pool, &cost, &post, &version, i);
    }

    let mut remaining = pool.alive_count();
    while remaining > budget {
        let Some(Reverse(c)) = heap.pop() else {
            for i in (0..n).filter(|&i| pool.alive[i]) {
                push_candidates(&mut heap, &pool, &cost, &post, &version, i);
            }
            continue;
        };
        if c.vi != version[c.i] || c.vj != version[c.j] {
            continue;
        }
        let (a, b) = (c.i, c.j);
        pool.absorb(a, b);
        cost[a] = column_cost(pool.col(a));
        cost[b] = 0.0;
        pool.posterior_into(a, &mut post[a * q..(a + 1) * q]);
        version[a] += 1;
        version[b] += 1;
        remaining -= 1;
        push_candidates(&mut heap, &pool, &cost, &post, &version, a);
    }

    pool.into_channel()
}
