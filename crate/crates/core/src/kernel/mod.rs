//! Polarization kernels: bijections `g: X^ℓ → X^ℓ`.
//!
//! Inputs and outputs are tuples `(u_0, ..., u_{ℓ-1})`; tables are indexed by
//! the mixed-radix value of the tuple with `u_0` as the most significant digit.
//! A kernel is either an explicit lookup table or a matrix over GF(q) acting
//! as `g(u) = u·G`; a table that turns out to be GF(q)-linear gets its matrix
//! attached.

mod distance;
mod linear;

pub use distance::{exponent_lower_bound, rs_exponent_formula, DistanceProfile};
pub use linear::{normalized_form, polarizes_corollary_primitive, polarizes_theorem_prime, vlp_decompose, NormalizedForm, Vlp};

use serde::Serialize;

use crate::channel::Permutation;
use crate::error::{Error, Result};
use crate::gfq::{Element, Field, Matrix};
use crate::numeric::{checked_pow, digits_into, index_of};

/// Largest explicit table accepted, in tuples.
pub const MAX_TABLE: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `q^ℓ · ℓ` symbols, image tuples in input order.
    Table(Vec<u8>),
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    q: usize,
    ell: usize,
    repr: Repr,
    matrix: Option<Matrix>,
    field: Option<Field>,
}

/// Existence certificate for the partial-polarization condition on a general kernel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// The fixed `u_0 .. u_{ℓ-2}`.
    pub prefix: Vec<usize>,
    pub i: usize,
    pub j: usize,
    /// `u_{ℓ-1} ↦ g(prefix, u_{ℓ-1})_i`.
    pub sigma: Vec<usize>,
    /// `u_{ℓ-1} ↦ g(prefix, u_{ℓ-1})_j`.
    pub tau: Vec<usize>,
}

impl Witness {
    pub fn sigma(&self) -> Permutation {
        Permutation::new(self.sigma.clone()).expect("witness maps are bijective")
    }

    pub fn tau(&self) -> Permutation {
        Permutation::new(self.tau.clone()).expect("witness maps are bijective")
    }
}

impl Kernel {
    /// Builds a kernel from an explicit table of `q^ℓ` image tuples.
    pub fn from_map(q: usize, ell: usize, table: &[Vec<usize>]) -> Result<Self> {
        if q < 2 || ell == 0 {
            return Err(Error::InvalidKernel(format!("need q ≥ 2 and ℓ ≥ 1, got q={q}, ℓ={ell}")));
        }
        if q > 256 {
            return Err(Error::InvalidKernel(format!("alphabet size {q} exceeds 256")));
        }
        let size = checked_pow(q, ell)
            .filter(|&s| s <= MAX_TABLE)
            .ok_or_else(|| Error::InvalidKernel(format!("table of {q}^{ell} tuples is too large")))?
            as usize;
        if table.len() != size {
            return Err(Error::InvalidKernel(format!(
                "table has {} entries, expected {q}^{ell} = {size}",
                table.len()
            )));
        }
        let mut flat = Vec::with_capacity(size * ell);
        let mut seen = vec![false; size];
        for (u, image) in table.iter().enumerate() {
            if image.len() != ell {
                return Err(Error::InvalidKernel(format!(
                    "entry {u} has length {}, expected {ell}",
                    image.len()
                )));
            }
            if let Some(&s) = image.iter().find(|&&s| s >= q) {
                return Err(Error::InvalidKernel(format!("symbol {s} out of range in entry {u}")));
            }
            let idx = index_of(image, q);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::NotBijective(format!("image {image:?} appears twice")));
            }
            flat.extend(image.iter().map(|&s| s as u8));
        }

        let field = Field::new(q).ok();
        let mut kernel = Self {
            q,
            ell,
            repr: Repr::Table(flat),
            matrix: None,
            field,
        };
        if kernel.field.is_some() {
            kernel.matrix = kernel.linear_matrix_from_table();
        }
        Ok(kernel)
    }

    /// Linear kernel `g(u) = u·G` over `field`.
    pub fn from_matrix(field: &Field, g: &Matrix) -> Result<Self> {
        let ell = g.len();
        if ell == 0 || g.iter().any(|row| row.len() != ell) {
            return Err(Error::InvalidKernel("matrix must be square and nonempty".into()));
        }
        for row in g {
            for &v in row {
                field.check(v)?;
            }
        }
        if field.rank(g) != ell {
            return Err(Error::SingularMatrix);
        }
        Ok(Self {
            q: field.order(),
            ell,
            repr: Repr::Linear,
            matrix: Some(g.clone()),
            field: Some(field.clone()),
        })
    }

    /// The 2×2 kernel `g(u_0, u_1) = (u_0 + u_1, u_1)` over GF(2).
    pub fn arikan() -> Self {
        let f = Field::new(2).expect("GF(2)");
        Self::from_matrix(&f, &vec![vec![1, 0], vec![1, 1]]).expect("nonsingular")
    }

    pub fn identity(field: &Field, ell: usize) -> Result<Self> {
        Self::from_matrix(field, &field.identity(ell))
    }

    /// The q×q Reed–Solomon kernel.
    ///
    /// With `α` the field's primitive element, entry `(r, c)` for `c < q-1` is
    /// `α^{(q-2-c)(q-1-r)}`; the last column is zero except for `γ` in the last row.
    pub fn reed_solomon(field: &Field, gamma: Element) -> Result<Self> {
        field.check(gamma)?;
        if gamma == 0 {
            return Err(Error::GammaZero);
        }
        Self::from_matrix(field, &rs_matrix(field, gamma))
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn size(&self) -> usize {
        self.ell
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        self.matrix.as_ref()
    }

    pub fn field(&self) -> Option<&Field> {
        self.field.as_ref()
    }

    /// Number of input tuples, `q^ℓ`, if it fits a `usize`.
    pub fn domain_size(&self) -> Option<u128> {
        checked_pow(self.q, self.ell)
    }

    /// Writes `g(u)` into `out`.
    #[inline]
    pub fn apply(&self, u: &[usize], out: &mut [usize]) {
        match &self.repr {
            Repr::Table(t) => {
                let base = index_of(u, self.q) * self.ell;
                for (o, &s) in out.iter_mut().zip(&t[base..base + self.ell]) {
                    *o = s as usize;
                }
            }
            Repr::Linear => {
                let f = self.field.as_ref().expect("linear kernels carry a field");
                f.vec_mat(u, self.matrix.as_ref().expect("linear kernels carry a matrix"), out);
            }
        }
    }

    /// `g(u)` as a new vector.
    pub fn image(&self, u: &[usize]) -> Vec<usize> {
        let mut out = vec![0; self.ell];
        self.apply(u, &mut out);
        out
    }

    /// Whether `g` is GF(q)-linear.
    pub fn is_linear(&self) -> Result<bool> {
        if self.field.is_none() {
            return Err(Error::NoField(self.q));
        }
        Ok(self.matrix.is_some())
    }

    /// Candidate matrix from unit-vector images, kept only if it reproduces the table.
    fn linear_matrix_from_table(&self) -> Option<Matrix> {
        let f = self.field.as_ref()?;
        let Repr::Table(_) = &self.repr else {
            return self.matrix.clone();
        };
        let ell = self.ell;
        let zero = vec![0; ell];
        if self.image(&zero) != zero {
            return None;
        }
        let g: Matrix = (0..ell)
            .map(|r| {
                let mut e = vec![0; ell];
                e[r] = 1;
                self.image(&e)
            })
            .collect();
        let size = self.domain_size()? as usize;
        let mut u = vec![0; ell];
        let mut lin = vec![0; ell];
        let mut tab = vec![0; ell];
        for idx in 0..size {
            digits_into(idx, self.q, &mut u);
            f.vec_mat(&u, &g, &mut lin);
            self.apply(&u, &mut tab);
            if lin != tab {
                return None;
            }
        }
        Some(g)
    }

    /// Explicit table of all `q^ℓ` images.
    pub fn table(&self) -> Result<Vec<Vec<usize>>> {
        let size = self
            .domain_size()
            .filter(|&s| s <= MAX_TABLE)
            .ok_or_else(|| Error::InvalidKernel("table too large to materialize".into()))?
            as usize;
        let mut u = vec![0; self.ell];
        Ok((0..size)
            .map(|idx| {
                digits_into(idx, self.q, &mut u);
                self.image(&u)
            })
            .collect())
    }

    /// Lexicographically first witness `(prefix, i, j, σ, τ)` for the
    /// partial-polarization condition on arbitrary kernels, or `None`.
    ///
    /// Within a prefix, pairs with `i < j` are tried before `i = j`.
    pub fn corollary1_witness(&self) -> Option<Witness> {
        let q = self.q;
        let ell = self.ell;
        let prefixes = checked_pow(q, ell - 1).filter(|&s| s <= MAX_TABLE)? as usize;

        // bijective[p][m]: coordinate m of g(prefix p, ·) is a bijection in the last input.
        let mut bijective = vec![vec![false; ell]; prefixes];
        let mut maps = vec![vec![vec![0usize; q]; ell]; prefixes];
        let mut u = vec![0; ell];
        let mut out = vec![0; ell];
        for p in 0..prefixes {
            digits_into(p, q, &mut u[..ell - 1]);
            for last in 0..q {
                u[ell - 1] = last;
                self.apply(&u, &mut out);
                for m in 0..ell {
                    maps[p][m][last] = out[m];
                }
            }
            for m in 0..ell {
                let mut seen = vec![false; q];
                bijective[p][m] = maps[p][m].iter().all(|&v| !std::mem::replace(&mut seen[v], true));
            }
        }
        let bad: Vec<usize> = (0..prefixes).filter(|&p| !bijective[p].iter().any(|&b| b)).collect();

        let pairs = (0..ell)
            .flat_map(|i| (i + 1..ell).map(move |j| (i, j)))
            .chain((0..ell).map(|i| (i, i)))
            .collect::<Vec<_>>();
        for p in 0..prefixes {
            if bad.iter().any(|&b| b != p) {
                continue;
            }
            for &(i, j) in &pairs {
                if bijective[p][i] && bijective[p][j] {
                    let mut prefix = vec![0; ell - 1];
                    digits_into(p, q, &mut prefix);
                    return Some(Witness {
                        prefix,
                        i,
                        j,
                        sigma: maps[p][i].clone(),
                        tau: maps[p][j].clone(),
                    });
                }
            }
        }
        None
    }

    /// Matrix-level checks; `None` for kernels without a matrix.
    pub fn vlp(&self) -> Option<Result<Vlp>> {
        Some(vlp_decompose(self.field.as_ref()?, self.matrix.as_ref()?))
    }
}

fn rs_matrix(field: &Field, gamma: Element) -> Matrix {
    let q = field.order();
    let alpha = field.primitive_element();
    (0..q)
        .map(|r| {
            (0..q)
                .map(|c| {
                    if c + 1 < q {
                        field.pow(alpha, ((q - 2 - c) * (q - 1 - r)) as u64)
                    } else if r + 1 == q {
                        gamma
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}
