//! Partial distances and exponents.

use rayon::prelude::*;
use serde::Serialize;

use super::Kernel;
use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::numeric::{checked_pow, digits_into};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub d_min: Vec<usize>,
    pub d_max: Vec<usize>,
    /// `pairwise[i][x][x']`, minimized over prefixes. Empty for linear kernels.
    pub pairwise: Vec<Vec<Vec<usize>>>,
    pub exponent_min: f64,
    pub exponent_max: f64,
}

/// `ln(q!) / (q ln q)`.
pub fn rs_exponent_formula(q: usize) -> f64 {
    let ln_fact: f64 = (2..=q).map(|k| (k as f64).ln()).sum();
    ln_fact / (q as f64 * (q as f64).ln())
}

/// `1 − (ℓ−1)/(ℓ ln ℓ)`.
pub fn exponent_lower_bound(ell: usize) -> f64 {
    let l = ell as f64;
    1.0 - (l - 1.0) / (l * l.ln())
}

fn exponent(ell: usize, d: &[usize]) -> f64 {
    if ell < 2 {
        return 0.0;
    }
    let ln_ell = (ell as f64).ln();
    d.iter().map(|&di| (di as f64).ln() / ln_ell).sum::<f64>() / ell as f64
}

fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

impl Kernel {
    fn check_suffix(&self, pairs: Option<u128>, budget: u64) -> Result<()> {
        match pairs {
            Some(p) if p <= budget as u128 => Ok(()),
            Some(p) => Err(Error::SuffixSpaceTooLarge { size: p, budget }),
            None => Err(Error::SuffixSpaceTooLarge { size: u128::MAX, budget }),
        }
    }

    /// Images `g(prefix, x, v)` for every suffix `v`, in suffix order.
    fn suffix_images(&self, prefix: &[usize], x: usize, count: usize) -> Vec<Vec<usize>> {
        let i = prefix.len();
        let mut u = vec![0; self.ell];
        u[..i].copy_from_slice(prefix);
        u[i] = x;
        (0..count)
            .map(|s| {
                digits_into(s, self.q, &mut u[i + 1..]);
                self.image(&u)
            })
            .collect()
    }

    /// `D^{(i)}_{x,x'}(prefix)`: minimum Hamming distance between `g(prefix, x, ·)` and `g(prefix, x', ·)`.
    pub fn partial_distance(&self, i: usize, x: usize, x2: usize, prefix: &[usize], budgets: &Budgets) -> Result<usize> {
        self.validate_position(i, prefix)?;
        for &s in prefix.iter().chain([&x, &x2]) {
            if s >= self.q {
                return Err(Error::IndexOutOfRange { index: s, limit: self.q });
            }
        }
        self.check_suffix(checked_pow(self.q, 2 * (self.ell - 1 - i)), budgets.suffix_pairs)?;
        let count = checked_pow(self.q, self.ell - 1 - i).expect("checked") as usize;
        let a = self.suffix_images(prefix, x, count);
        let b = self.suffix_images(prefix, x2, count);
        Ok(min_cross_distance(&a, &b))
    }

    fn validate_position(&self, i: usize, prefix: &[usize]) -> Result<()> {
        if i >= self.ell {
            return Err(Error::IndexOutOfRange { index: i, limit: self.ell });
        }
        if prefix.len() != i {
            return Err(Error::LengthMismatch { expected: i, actual: prefix.len() });
        }
        Ok(())
    }

    /// `D^{(i)}` of a linear kernel: minimum weight of `c·G[i..]` over `c` with `c_i = 1`.
    pub fn partial_distance_linear(&self, i: usize, budgets: &Budgets) -> Result<usize> {
        let (Some(g), Some(f)) = (self.matrix.as_ref(), self.field.as_ref()) else {
            return Err(Error::NotLinear);
        };
        if i >= self.ell {
            return Err(Error::IndexOutOfRange { index: i, limit: self.ell });
        }
        self.check_suffix(checked_pow(self.q, self.ell - 1 - i), budgets.suffix_pairs)?;
        let rows = &g[i + 1..];
        let q = self.q;
        // Split on the first free coefficient so the search parallelizes.
        let best = match rows.split_first() {
            None => weight(&g[i]),
            Some((head, tail)) => (0..q)
                .into_par_iter()
                .map(|a| {
                    let start: Vec<usize> = g[i].iter().zip(head).map(|(&r, &h)| f.add(r, f.mul(a, h))).collect();
                    let mut best = usize::MAX;
                    min_weight_dfs(f, tail, start, &mut best);
                    best
                })
                .min()
                .expect("q ≥ 2"),
        };
        Ok(best)
    }

    /// Distance profile by brute force over every prefix and symbol pair.
    pub fn distance_profile_brute(&self, budgets: &Budgets) -> Result<DistanceProfile> {
        let q = self.q;
        let ell = self.ell;
        let mut d_min = Vec::with_capacity(ell);
        let mut d_max = Vec::with_capacity(ell);
        let mut pairwise = Vec::with_capacity(ell);
        for i in 0..ell {
            self.check_suffix(checked_pow(q, 2 * (ell - 1 - i)), budgets.suffix_pairs)?;
            let prefixes = checked_pow(q, i)
                .filter(|&p| p <= super::MAX_TABLE)
                .ok_or_else(|| Error::InvalidKernel("prefix space too large".into()))? as usize;
            let count = checked_pow(q, ell - 1 - i).expect("checked") as usize;
            let table = (0..prefixes)
                .into_par_iter()
                .map(|p| {
                    let mut prefix = vec![0; i];
                    digits_into(p, q, &mut prefix);
                    let images: Vec<_> = (0..q).map(|x| self.suffix_images(&prefix, x, count)).collect();
                    let mut d = vec![vec![0; q]; q];
                    for x in 0..q {
                        for x2 in x + 1..q {
                            let v = min_cross_distance(&images[x], &images[x2]);
                            d[x][x2] = v;
                            d[x2][x] = v;
                        }
                    }
                    d
                })
                .reduce_with(|a, b| {
                    a.iter()
                        .zip(&b)
                        .map(|(ra, rb)| ra.iter().zip(rb).map(|(&u, &v)| u.min(v)).collect())
                        .collect()
                })
                .expect("at least one prefix");
            let distinct = || (0..q).flat_map(|x| (0..q).filter(move |&y| y != x).map(move |y| (x, y)));
            d_min.push(distinct().map(|(x, y)| table[x][y]).min().expect("q ≥ 2"));
            d_max.push(distinct().map(|(x, y)| table[x][y]).max().expect("q ≥ 2"));
            pairwise.push(table);
        }
        Ok(DistanceProfile {
            exponent_min: exponent(ell, &d_min),
            exponent_max: exponent(ell, &d_max),
            d_min,
            d_max,
            pairwise,
        })
    }

    /// Distance profile, using the linear fast path when a matrix is attached.
    pub fn distance_profile(&self, budgets: &Budgets) -> Result<DistanceProfile> {
        if self.matrix.is_none() {
            return self.distance_profile_brute(budgets);
        }
        let d = (0..self.ell)
            .map(|i| self.partial_distance_linear(i, budgets))
            .collect::<Result<Vec<_>>>()?;
        let e = exponent(self.ell, &d);
        Ok(DistanceProfile {
            d_min: d.clone(),
            d_max: d,
            pairwise: Vec::new(),
            exponent_min: e,
            exponent_max: e,
        })
    }

    /// `(exponent_min, exponent_max)`.
    pub fn exponent(&self, budgets: &Budgets) -> Result<(f64, f64)> {
        let p = self.distance_profile(budgets)?;
        Ok((p.exponent_min, p.exponent_max))
    }
}

fn weight(v: &[usize]) -> usize {
    v.iter().filter(|&&e| e != 0).count()
}

fn min_weight_dfs(f: &crate::gfq::Field, rows: &[Vec<usize>], acc: Vec<usize>, best: &mut usize) {
    match rows.split_first() {
        None => *best = (*best).min(weight(&acc)),
        Some((head, tail)) => {
            let mut next = acc.clone();
            for a in 0..f.order() {
                for ((n, &c), &h) in next.iter_mut().zip(&acc).zip(head) {
                    *n = f.add(c, f.mul(a, h));
                }
                min_weight_dfs(f, tail, next.clone(), best);
            }
        }
    }
}

fn min_cross_distance(a: &[Vec<usize>], b: &[Vec<usize>]) -> usize {
    let mut best = usize::MAX;
    for va in a {
        for vb in b {
            best = best.min(hamming(va, vb));
            if best == 0 {
                return 0;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfq::Field;

    fn budgets() -> Budgets {
        Budgets::default()
    }

    #[test]
    fn arikan_distances() {
        let k = Kernel::arikan();
        assert_eq!(k.partial_distance(0, 0, 1, &[], &budgets()).unwrap(), 1);
        assert_eq!(k.partial_distance(1, 0, 1, &[0], &budgets()).unwrap(), 2);
        assert_eq!(k.partial_distance(1, 1, 1, &[1], &budgets()).unwrap(), 0);
        assert_eq!(k.partial_distance_linear(0, &budgets()).unwrap(), 1);
        assert_eq!(k.partial_distance_linear(1, &budgets()).unwrap(), 2);
        let p = k.distance_profile(&budgets()).unwrap();
        assert_eq!(p.d_min, vec![1, 2]);
        assert!((p.exponent_min - 0.5).abs() < 1e-15);
        let b = k.distance_profile_brute(&budgets()).unwrap();
        assert_eq!((b.d_min, b.d_max), (vec![1, 2], vec![1, 2]));
    }

    #[test]
    fn identity_distances() {
        let f = Field::new(2).unwrap();
        let id2 = Kernel::identity(&f, 2).unwrap();
        assert_eq!(id2.partial_distance(0, 0, 1, &[], &budgets()).unwrap(), 1);
        assert_eq!(id2.partial_distance(1, 0, 1, &[1], &budgets()).unwrap(), 1);
        let id3 = Kernel::identity(&f, 3).unwrap();
        let p = id3.distance_profile(&budgets()).unwrap();
        assert_eq!(p.d_min, vec![1, 1, 1]);
        assert_eq!(p.exponent_min, 0.0);
    }

    #[test]
    fn reed_solomon_is_mds() {
        for q in [2, 3, 4, 5, 7, 8] {
            let f = Field::new(q).unwrap();
            let k = Kernel::reed_solomon(&f, f.primitive_element()).unwrap();
            let p = k.distance_profile(&budgets()).unwrap();
            assert_eq!(p.d_min, (1..=q).collect::<Vec<_>>(), "q = {q}");
            assert!((p.exponent_min - rs_exponent_formula(q)).abs() < 1e-12);
        }
    }

    #[test]
    fn rs4_exponent_value() {
        assert_eq!(format!("{:.5}", rs_exponent_formula(4)), "0.57312");
        assert!((rs_exponent_formula(2) - 0.5).abs() < 1e-15);
        for l in 2..=16 {
            assert!(exponent_lower_bound(l) <= rs_exponent_formula(l) + 1e-15);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let k = Kernel::arikan();
        let tiny = Budgets { suffix_pairs: 3, ..Budgets::default() };
        assert!(matches!(
            k.partial_distance(0, 0, 1, &[], &tiny),
            Err(Error::SuffixSpaceTooLarge { size: 4, budget: 3 })
        ));
        assert!(k.partial_distance(1, 0, 1, &[0], &tiny).is_ok());
    }

    #[test]
    fn non_linear_requires_brute_force() {
        let t = vec![vec![1, 1], vec![0, 0], vec![1, 0], vec![0, 1]];
        let k = Kernel::from_map(2, 2, &t).unwrap();
        assert_eq!(k.partial_distance_linear(0, &budgets()), Err(Error::NotLinear));
        let p = k.distance_profile(&budgets()).unwrap();
        assert!(p.d_min.iter().zip(&p.d_max).all(|(a, b)| 1 <= *a && a <= b));
    }
}
