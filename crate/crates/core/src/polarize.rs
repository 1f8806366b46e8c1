//! Multi-level polarization: channels at the nodes of the transform tree.
//!
//! A path `(b_1, ..., b_n)` names `W^{(b_1)...(b_n)}`, obtained by applying the
//! one-step transform `n` times with `b_1` first. Between levels the channel is
//! degraded to at most `K` outputs; within a level everything is exact.
//! Tree channels carry index labels `0..|Y|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budgets;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::numeric::{checked_pow, format_significant};
use crate::transform::{subchannel, subchannels};

/// Default quantization budget between levels.
pub const DEFAULT_QUANTIZE: usize = 256;

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub path: Vec<usize>,
    #[serde(rename = "I")]
    pub capacity: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub z_max: f64,
    pub z_min: f64,
    pub p_e: f64,
    /// Error probability of an ML decoder with arbitrary tie-breaking.
    pub p_ml: f64,
}

impl PathRecord {
    pub fn from_channel(path: Vec<usize>, w: &Channel) -> Self {
        Self {
            path,
            capacity: w.symmetric_capacity(),
            z: w.bhattacharyya(),
            z_max: w.z_max(),
            z_min: w.z_min(),
            p_e: w.error_prob(),
            p_ml: w.ml_error_prob(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationReport {
    pub n: usize,
    pub ell: usize,
    pub paths: Vec<PathRecord>,
    pub quantize: usize,
    pub mode: Mode,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedFraction {
    pub beta: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    #[serde(rename = "mean_I")]
    pub mean_capacity: f64,
    pub delta: f64,
    pub fraction_delta: f64,
    pub speed_fractions: Vec<SpeedFraction>,
    pub n: usize,
    pub paths: usize,
    pub mode: Mode,
}

fn check_quantize(w: &Channel, k: usize) -> Result<()> {
    if k < w.input_size() {
        return Err(Error::InvalidBudget { budget: k, q: w.input_size() });
    }
    Ok(())
}

fn check_path(kernel: &Kernel, path: &[usize]) -> Result<()> {
    match path.iter().find(|&&b| b >= kernel.size()) {
        Some(&b) => Err(Error::IndexOutOfRange { index: b, limit: kernel.size() }),
        None => Ok(()),
    }
}

/// `W^{(b_1)...(b_n)}`, degraded to `k` outputs after each level.
pub fn tree_channel(w: &Channel, kernel: &Kernel, path: &[usize], k: usize, budgets: &Budgets) -> Result<Channel> {
    check_quantize(w, k)?;
    check_path(kernel, path)?;
    let mut c = w.merge_equivalent().with_index_labels();
    for &b in path {
        c = subchannel(&c, kernel, b, budgets)?.degrade(k)?.with_index_labels();
    }
    Ok(c)
}

/// Records for every prefix of `path`, from the root down.
pub fn trajectory(w: &Channel, kernel: &Kernel, path: &[usize], k: usize, budgets: &Budgets) -> Result<Vec<PathRecord>> {
    check_quantize(w, k)?;
    check_path(kernel, path)?;
    let mut c = w.merge_equivalent().with_index_labels();
    let mut out = vec![PathRecord::from_channel(Vec::new(), &c)];
    for (depth, &b) in path.iter().enumerate() {
        c = subchannel(&c, kernel, b, budgets)?.degrade(k)?.with_index_labels();
        out.push(PathRecord::from_channel(path[..=depth].to_vec(), &c));
    }
    Ok(out)
}

/// Every node at depth `n`, in lexicographic path order.
pub fn enumerate_tree(w: &Channel, kernel: &Kernel, n: usize, k: usize, budgets: &Budgets) -> Result<PolarizationReport> {
    check_quantize(w, k)?;
    let ell = kernel.size();
    match checked_pow(ell, n) {
        Some(p) if p <= budgets.paths as u128 => {}
        size => {
            return Err(Error::PathBudgetExceeded {
                size: size.unwrap_or(u128::MAX),
                budget: budgets.paths,
            })
        }
    }
    let root = w.merge_equivalent().with_index_labels();
    let paths = expand(&root, kernel, n, k, budgets, &[])?;
    Ok(PolarizationReport {
        n,
        ell,
        paths,
        quantize: k,
        mode: Mode::Exhaustive,
        seed: None,
    })
}

fn expand(
    c: &Channel,
    kernel: &Kernel,
    remaining: usize,
    k: usize,
    budgets: &Budgets,
    path: &[usize],
) -> Result<Vec<PathRecord>> {
    if remaining == 0 {
        return Ok(vec![PathRecord::from_channel(path.to_vec(), c)]);
    }
    let children = subchannels(c, kernel, budgets)?.channels;
    let prefix = path;
    let parts = children
        .into_par_iter()
        .enumerate()
        .map(|(b, child)| {
            let child = child.degrade(k)?.with_index_labels();
            let mut p = prefix.to_vec();
            p.push(b);
            expand(&child, kernel, remaining - 1, k, budgets, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// `count` independent uniformly random paths of length `n`.
///
/// Trajectory `t` draws its digits from a ChaCha8 stream `t` keyed by `seed`,
/// so the report does not depend on scheduling.
pub fn sample_trajectories(
    w: &Channel,
    kernel: &Kernel,
    n: usize,
    count: usize,
    k: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<PolarizationReport> {
    check_quantize(w, k)?;
    if count == 0 {
        return Err(Error::InvalidChannel("sample count must be positive".into()));
    }
    let ell = kernel.size();
    let paths = (0..count)
        .into_par_iter()
        .map(|t| {
            let path = random_path(seed, t as u64, ell, n);
            let c = tree_channel(w, kernel, &path, k, budgets)?;
            Ok(PathRecord::from_channel(path, &c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolarizationReport {
        n,
        ell,
        paths,
        quantize: k,
        mode: Mode::Sampled,
        seed: Some(seed),
    })
}

/// The digits of trajectory `stream` under `seed`.
pub fn random_path(seed: u64, stream: u64, ell: usize, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| rng.random_range(0..ell)).collect()
}

impl PolarizationReport {
    pub fn mean_capacity(&self) -> f64 {
        crate::numeric::compensated_sum(self.paths.iter().map(|r| r.capacity)) / self.paths.len() as f64
    }

    /// Fraction of paths with `Z ∉ (δ, 1−δ)`.
    pub fn polarization_fraction(&self, delta: f64) -> f64 {
        let hits = self.paths.iter().filter(|r| r.z <= delta || r.z >= 1.0 - delta).count();
        hits as f64 / self.paths.len() as f64
    }

    /// Fraction of paths with `Z < 2^{-ℓ^{βn}}`, compared as `log₂ Z < −ℓ^{βn}`.
    pub fn speed_fraction(&self, beta: f64) -> f64 {
        let threshold = -(self.ell as f64).powf(beta * self.n as f64);
        let hits = self.paths.iter().filter(|r| r.z == 0.0 || r.z.log2() < threshold).count();
        hits as f64 / self.paths.len() as f64
    }

    /// Indices of the `⌊rate·ℓ^n⌋` paths with smallest `Z`, ties broken by index, in ascending order.
    pub fn information_set(&self, rate: f64) -> Result<Vec<usize>> {
        if self.mode != Mode::Exhaustive {
            return Err(Error::RequiresExhaustive);
        }
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidChannel(format!("rate {rate} outside [0, 1]")));
        }
        let total = self.paths.len();
        let take = ((rate * total as f64).floor() as usize).min(total);
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| self.paths[a].z.total_cmp(&self.paths[b].z).then(a.cmp(&b)));
        let mut set = order[..take].to_vec();
        set.sort_unstable();
        Ok(set)
    }

    pub fn summary(&self, delta: f64, betas: &[f64]) -> Summary {
        Summary {
            mean_capacity: self.mean_capacity(),
            delta,
            fraction_delta: self.polarization_fraction(delta),
            speed_fractions: betas
                .iter()
                .map(|&beta| SpeedFraction {
                    beta,
                    fraction: self.speed_fraction(beta),
                })
                .collect(),
            n: self.n,
            paths: self.paths.len(),
            mode: self.mode,
        }
    }

    /// CSV with header `path,I,Z,z_max,z_min,p_e`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("path,I,Z,z_max,z_min,p_e\n");
        for r in &self.paths {
            let f = |v: f64| format_significant(v, CSV_DIGITS);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                path_label(&r.path, self.ell),
                f(r.capacity),
                f(r.z),
                f(r.z_max),
                f(r.z_min),
                f(r.p_e)
            ));
        }
        out
    }
}

/// Digits concatenated for `ℓ ≤ 10`, dot-separated otherwise.
pub fn path_label(path: &[usize], ell: usize) -> String {
    let digits: Vec<String> = path.iter().map(usize::to_string).collect();
    if ell <= 10 {
        digits.concat()
    } else {
        digits.join(".")
    }
}
