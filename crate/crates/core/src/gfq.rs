//! Arithmetic in GF(q) for prime and prime-power q.
//!
//! Elements are encoded as integers in `0..q`: for an extension field
//! GF(p^m) the integer `c_0 + c_1 p + ... + c_{m-1} p^{m-1}` stands for the
//! polynomial `c_0 + c_1 x + ... + c_{m-1} x^{m-1}` reduced modulo the field's
//! defining polynomial. The defining polynomial is the smallest monic
//! irreducible of degree m in that same integer order, so a given q always
//! yields the same tables.

use crate::error::{Error, Result};

/// A field element, encoded in `0..q`.
pub type Element = usize;

/// A square or rectangular matrix over GF(q), row-major.
pub type Matrix = Vec<Vec<Element>>;

/// Largest supported field order.
pub const MAX_ORDER: usize = 256;

/// Arithmetic context for GF(q).
#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    q: usize,
    p: usize,
    m: usize,
    /// Coefficients of the defining polynomial, lowest degree first, including
    /// the leading 1. Empty for prime fields.
    modulus: Vec<usize>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Returns `(p, m)` with `q = p^m`, or `None` when q is not a prime power.
pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

pub fn is_prime(n: usize) -> bool {
    matches!(prime_power(n), Some((_, 1)))
}

impl Field {
    /// Builds GF(q).
    pub fn new(q: usize) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(Error::FieldOrderOutOfRange(q));
        }
        let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        let modulus = if m == 1 {
            Vec::new()
        } else {
            smallest_irreducible(p, m)
        };

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                let (s, t) = if m == 1 {
                    ((a + b) % p, (a * b) % p)
                } else {
                    (
                        poly_add_encoded(a, b, p, m),
                        poly_mul_encoded(a, b, p, m, &modulus),
                    )
                };
                add[a * q + b] = s as u8;
                mul[a * q + b] = t as u8;
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).expect("additive inverse") as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).expect("multiplicative inverse") as u8;
            }
        }

        Ok(Self {
            q,
            p,
            m,
            modulus,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn is_prime_field(&self) -> bool {
        self.m == 1
    }

    /// Defining polynomial, lowest degree first (empty for prime fields).
    pub fn modulus(&self) -> &[usize] {
        &self.modulus
    }

    pub fn contains(&self, a: Element) -> bool {
        a < self.q
    }

    pub fn check(&self, a: Element) -> Result<Element> {
        if a < self.q {
            Ok(a)
        } else {
            Err(Error::InvalidElement { value: a, q: self.q })
        }
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        self.add[a * self.q + b] as Element
    }

    #[inline]
    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.mul[a * self.q + b] as Element
    }

    #[inline]
    pub fn neg(&self, a: Element) -> Element {
        self.neg[a] as Element
    }

    pub fn inv(&self, a: Element) -> Result<Element> {
        if a == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inv[a] as Element)
        }
    }

    pub fn div(&self, a: Element, b: Element) -> Result<Element> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^k`, with `a^0 = 1` (including `0^0`).
    pub fn pow(&self, a: Element, mut k: u64) -> Element {
        let mut base = a;
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: Element) -> Option<usize> {
        if a == 0 || a >= self.q {
            return None;
        }
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }

    pub fn is_primitive(&self, a: Element) -> bool {
        self.multiplicative_order(a) == Some(self.q - 1)
    }

    /// Smallest-encoded primitive element.
    pub fn primitive_element(&self) -> Element {
        (1..self.q)
            .find(|&a| self.is_primitive(a))
            .expect("every finite field has a primitive element")
    }

    /// Row vector times matrix: `u · G`.
    pub fn vec_mat(&self, u: &[Element], g: &Matrix, out: &mut [Element]) {
        out.iter_mut().for_each(|o| *o = 0);
        for (r, &ur) in u.iter().enumerate() {
            if ur == 0 {
                continue;
            }
            for (o, &grc) in out.iter_mut().zip(&g[r]) {
                *o = self.add(*o, self.mul(ur, grc));
            }
        }
    }

    pub fn mat_mul(&self, a: &Matrix, b: &Matrix) -> Matrix {
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|row| {
                let mut out = vec![0; cols];
                self.vec_mat(row, b, &mut out);
                out
            })
            .collect()
    }

    pub fn identity(&self, n: usize) -> Matrix {
        (0..n)
            .map(|r| (0..n).map(|c| usize::from(r == c)).collect())
            .collect()
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self, m: &Matrix) -> usize {
        let mut rows: Matrix = m.clone();
        let cols = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = self.inv[rows[rank][c]] as Element;
            for v in rows[rank].iter_mut() {
                *v = self.mul(*v, inv);
            }
            for r in 0..rows.len() {
                if r != rank && rows[r][c] != 0 {
                    let f = rows[r][c];
                    for k in 0..cols {
                        let t = self.mul(f, rows[rank][k]);
                        rows[r][k] = self.sub(rows[r][k], t);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

fn decode(mut a: usize, p: usize, m: usize) -> Vec<usize> {
    let mut c = vec![0; m];
    for ci in c.iter_mut() {
        *ci = a % p;
        a /= p;
    }
    c
}

fn encode(c: &[usize], p: usize) -> usize {
    c.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn poly_add_encoded(a: usize, b: usize, p: usize, m: usize) -> usize {
    let (ca, cb) = (decode(a, p, m), decode(b, p, m));
    let s: Vec<usize> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
    encode(&s, p)
}

fn poly_mul_encoded(a: usize, b: usize, p: usize, m: usize, modulus: &[usize]) -> usize {
    let (ca, cb) = (decode(a, p, m), decode(b, p, m));
    let mut prod = vec![0usize; 2 * m];
    for (i, &x) in ca.iter().enumerate() {
        for (j, &y) in cb.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&mut prod, modulus, p);
    prod.truncate(m);
    encode(&prod, p)
}

/// Reduces `a` in place modulo the monic polynomial `modulus`.
fn poly_rem(a: &mut [usize], modulus: &[usize], p: usize) {
    let d = modulus.len() - 1;
    for top in (d..a.len()).rev() {
        let c = a[top];
        if c == 0 {
            continue;
        }
        for (k, &mk) in modulus.iter().enumerate() {
            let idx = top - d + k;
            a[idx] = (a[idx] + p * p - (c * mk) % p) % p;
        }
    }
}

/// Whether the monic polynomial `f` (lowest degree first) is divisible by the monic `g`.
fn divides(g: &[usize], f: &[usize], p: usize) -> bool {
    let mut r = f.to_vec();
    poly_rem(&mut r, g, p);
    r[..g.len() - 1].iter().all(|&c| c == 0)
}

fn monic_from_index(t: usize, degree: usize, p: usize) -> Vec<usize> {
    let mut c = decode(t, p, degree);
    c.push(1);
    c
}

fn is_irreducible(f: &[usize], p: usize) -> bool {
    let m = f.len() - 1;
    for d in 1..=m / 2 {
        for t in 0..p.pow(d as u32) {
            if divides(&monic_from_index(t, d, p), f, p) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: usize, m: usize) -> Vec<usize> {
    (0..p.pow(m as u32))
        .map(|t| monic_from_index(t, m, p))
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_has_empty_modulus() {
        let f = Field::new(5).unwrap();
        assert_eq!((f.characteristic(), f.degree()), (5, 1));
        assert!(f.modulus().is_empty());
    }

    #[test]
    fn gf4_modulus_and_products() {
        let f = Field::new(4).unwrap();
        assert_eq!((f.characteristic(), f.degree()), (2, 2));
        // x^2 + x + 1
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.add(2, 3), 1);
        assert!(f.is_primitive(2));
    }

    #[test]
    fn gf8_and_gf9_moduli() {
        // x^3 + x + 1 precedes x^3 + x^2 + 1.
        assert_eq!(Field::new(8).unwrap().modulus(), &[1, 1, 0, 1]);
        // x^2 + 1 is irreducible over GF(3) and smallest.
        assert_eq!(Field::new(9).unwrap().modulus(), &[1, 0, 1]);
        // x^4 + x + 1 over GF(2).
        assert_eq!(Field::new(16).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert_eq!(Field::new(6).unwrap_err(), Error::NotPrimePower(6));
        assert_eq!(Field::new(12).unwrap_err(), Error::NotPrimePower(12));
        assert!(matches!(Field::new(1), Err(Error::FieldOrderOutOfRange(1))));
    }

    #[test]
    fn inverse_of_zero() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.inv(0), Err(Error::DivisionByZero));
        assert_eq!(f.inv(3).unwrap(), 5);
    }

    #[test]
    fn primitive_elements() {
        assert!(!Field::new(5).unwrap().is_primitive(1));
        assert!(!Field::new(5).unwrap().is_primitive(0));
        assert_eq!(Field::new(2).unwrap().primitive_element(), 1);
        assert_eq!(Field::new(5).unwrap().primitive_element(), 2);
        assert_eq!(Field::new(7).unwrap().primitive_element(), 3);
        assert_eq!(Field::new(4).unwrap().primitive_element(), 2);
    }

    #[test]
    fn pow_zero_is_one() {
        let f = Field::new(9).unwrap();
        for a in 0..9 {
            assert_eq!(f.pow(a, 0), 1);
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let f = Field::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn primitive_powers_enumerate_units() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64] {
            let f = Field::new(q).unwrap();
            let alpha = f.primitive_element();
            let mut seen = vec![false; q];
            for k in 0..(q - 1) as u64 {
                let v = f.pow(alpha, k);
                assert!(v != 0 && !seen[v], "q={q} k={k}");
                seen[v] = true;
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        for q in [4, 8, 9, 27, 64] {
            assert_eq!(Field::new(q).unwrap(), Field::new(q).unwrap());
        }
    }

    #[test]
    fn rank_detects_singularity() {
        let f = Field::new(3).unwrap();
        assert_eq!(f.rank(&vec![vec![0; 3]; 3]), 0);
        assert_eq!(f.rank(&vec![vec![1, 2], vec![2, 1]]), 1);
        assert_eq!(f.rank(&f.identity(4)), 4);
    }
}
