//! Library results against independent closed-form and rank-based oracles.

use polarq::polarize::enumerate_tree;
use polarq::{Budgets, Channel, Field, Kernel};

/// Erasure probabilities of all `2^n` leaves for BEC(eps) under the 2×2 kernel.
fn bec_recursion(eps: f64, n: usize) -> Vec<f64> {
    let mut z = vec![eps];
    for _ in 0..n {
        z = z.iter().flat_map(|&e| [2.0 * e - e * e, e * e]).collect();
    }
    z
}

/// GF(4) with elements `0, 1, a, a+1` encoded as `0..4`, `a^2 = a + 1`.
const GF4_MUL: [[usize; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
const GF4_INV: [usize; 4] = [0, 1, 3, 2];

fn gf4_rank(rows: &[Vec<usize>]) -> usize {
    let mut m: Vec<Vec<usize>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let inv = GF4_INV[m[rank][c]];
        let pivot: Vec<usize> = m[rank].iter().map(|&v| GF4_MUL[inv][v]).collect();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v ^= GF4_MUL[f][pv];
                }
            }
        }
        m[rank] = pivot;
        rank += 1;
    }
    rank
}

/// Erasure probability of `W^(i)` for a GF(4)-linear kernel on a 4-ary erasure channel:
/// `u_i` is lost exactly when `rank(G[i.., S]) = rank(G[i+1.., S])` for the unerased set `S`.
fn gf4_erasure_step(g: &[Vec<usize>], i: usize, eps: f64) -> f64 {
    let ell = g.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << ell) {
        let kept: Vec<usize> = (0..ell).filter(|&c| mask >> c & 1 == 1).collect();
        let restrict = |from: usize| -> Vec<Vec<usize>> {
            g[from..].iter().map(|row| kept.iter().map(|&c| row[c]).collect()).collect()
        };
        let lost = kept.is_empty() || gf4_rank(&restrict(i)) == gf4_rank(&restrict(i + 1));
        if lost {
            let k = kept.len() as i32;
            total += eps.powi(ell as i32 - k) * (1.0 - eps).powi(k);
        }
    }
    total
}

fn gf4_tree(g: &[Vec<usize>], eps: f64, n: usize) -> Vec<f64> {
    let mut z = vec![eps];
    for _ in 0..n {
        z = z
            .iter()
            .flat_map(|&e| (0..g.len()).map(move |i| gf4_erasure_step(g, i, e)))
            .collect();
    }
    z
}

fn rs4_literal() -> Vec<Vec<usize>> {
    // Entry (r, c < 3) is α^{(2-c)(3-r)} with α = 2; last column is zero except γ = α at (3, 3).
    vec![vec![1, 1, 1, 0], vec![2, 3, 1, 0], vec![3, 2, 1, 0], vec![1, 1, 1, 2]]
}

#[test]
fn rs4_matrix_matches_literal() {
    let f = Field::new(4).unwrap();
    assert_eq!(f.primitive_element(), 2);
    let k = Kernel::reed_solomon(&f, 2).unwrap();
    assert_eq!(k.matrix().unwrap(), &rs4_literal());
}

#[test]
fn oracle_field_agrees_with_library() {
    let f = Field::new(4).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(f.mul(a, b), GF4_MUL[a][b]);
            assert_eq!(f.add(a, b), a ^ b);
        }
    }
}

#[test]
fn bec_tree_z_matches_recursion() {
    let w = Channel::erasure(2, 0.5).unwrap();
    let r = enumerate_tree(&w, &Kernel::arikan(), 12, 256, &Budgets::default()).unwrap();
    let oracle = bec_recursion(0.5, 12);
    assert_eq!(r.paths.len(), oracle.len());
    for (rec, z) in r.paths.iter().zip(&oracle) {
        assert!((rec.z - z).abs() < 1e-9, "{:?}: {} vs {}", rec.path, rec.z, z);
        assert!((rec.capacity - (1.0 - z)).abs() < 1e-9);
    }
}

#[test]
fn bec_fractions_frozen() {
    // polarization fraction (δ = 0.01) for n = 0..=12, from the recursion.
    let expected = [
        0.0, 0.0, 0.0, 0.25, 0.25, 0.3125, 0.46875, 0.5625, 0.625, 0.69921875, 0.74609375, 0.7939453125,
        0.829589843750,
    ];
    for (n, &want) in expected.iter().enumerate() {
        let z = bec_recursion(0.5, n);
        let frac = z.iter().filter(|&&v| v <= 0.01 || v >= 0.99).count() as f64 / z.len() as f64;
        assert_eq!(frac, want, "n = {n}");
    }
    let w = Channel::erasure(2, 0.5).unwrap();
    for n in [4, 8] {
        let r = enumerate_tree(&w, &Kernel::arikan(), n, 256, &Budgets::default()).unwrap();
        assert_eq!(r.polarization_fraction(0.01), expected[n]);
    }
}

#[test]
fn rs4_erasure_tree_matches_rank_oracle() {
    let f = Field::new(4).unwrap();
    let k = Kernel::reed_solomon(&f, 2).unwrap();
    let w = Channel::erasure(4, 0.5).unwrap();
    let g = rs4_literal();
    for n in 1..=4 {
        let r = enumerate_tree(&w, &k, n, 256, &Budgets::default()).unwrap();
        let oracle = gf4_tree(&g, 0.5, n);
        for (rec, e) in r.paths.iter().zip(&oracle) {
            assert!((rec.z - e).abs() < 1e-9, "{:?}: {} vs {}", rec.path, rec.z, e);
            assert!((rec.capacity - (1.0 - e)).abs() < 1e-9);
        }
    }
}

#[test]
fn rs4_erasure_fractions_frozen() {
    // Oracle fractions (δ = 0.01) for n = 1..=6.
    let g = rs4_literal();
    let expected = [0.0, 0.375, 0.5625, 0.6875, 0.80859375, 0.87548828125];
    for (n, &want) in (1..=6).zip(&expected) {
        let z = gf4_tree(&g, 0.5, n);
        let frac = z.iter().filter(|&&v| v <= 0.01 || v >= 0.99).count() as f64 / z.len() as f64;
        assert_eq!(frac, want, "n = {n}");
    }
}

#[test]
fn rs4_one_step_erasure_probabilities() {
    let f = Field::new(4).unwrap();
    let k = Kernel::reed_solomon(&f, 2).unwrap();
    let eps: f64 = 0.3;
    let set = polarq::transform::subchannels(&Channel::erasure(4, eps).unwrap(), &k, &Budgets::default()).unwrap();
    let g = rs4_literal();
    for (i, ch) in set.channels.iter().enumerate() {
        let e = gf4_erasure_step(&g, i, eps);
        assert!((ch.bhattacharyya() - e).abs() < 1e-12);
        assert!((ch.error_prob() - e).abs() < 1e-12);
    }
}

#[test]
fn speed_fractions_frozen() {
    let z = bec_recursion(0.5, 16);
    let frac = |beta: f64| {
        let thr = -(2f64).powf(beta * 16.0);
        z.iter().filter(|&&v| v == 0.0 || v.log2() < thr).count() as f64 / z.len() as f64
    };
    assert_eq!(frac(0.4), 20143.0 / 65536.0);
    assert_eq!(frac(0.5), 12723.0 / 65536.0);
    assert_eq!(frac(0.6), 5956.0 / 65536.0);
}
