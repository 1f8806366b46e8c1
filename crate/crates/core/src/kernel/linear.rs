//! Normal forms of linear kernels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::{Field, Matrix};

/// `G = V·L·P` with `V` upper triangular, `L` lower triangular, `P` a permutation matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vlp {
    pub v: Matrix,
    pub l: Matrix,
    pub p: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedForm {
    pub l: Matrix,
    /// Largest row of `l` with more than one nonzero entry; `None` when `l` is diagonal.
    pub k: Option<usize>,
}

/// Decomposes a full-rank `g` as `V·L·P`.
///
/// Rows are processed bottom-up. Each row pivots on its rightmost nonzero
/// entry among columns not yet claimed, and that column is cleared from the
/// rows above it. Lower-triangular inputs come back as `(I, G, I)`.
pub fn vlp_decompose(field: &Field, g: &Matrix) -> Result<Vlp> {
    let n = g.len();
    if n == 0 || g.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidKernel("matrix must be square and nonempty".into()));
    }
    let mut m = g.clone();
    let mut v = field.identity(n);
    let mut claimed = vec![false; n];
    let mut pivot_col = vec![0; n];

    for r in (0..n).rev() {
        let c = (0..n)
            .rev()
            .find(|&c| !claimed[c] && m[r][c] != 0)
            .ok_or(Error::SingularMatrix)?;
        claimed[c] = true;
        pivot_col[r] = c;
        let inv = field.inv(m[r][c])?;
        for s in 0..r {
            if m[s][c] == 0 {
                continue;
            }
            let f = field.mul(m[s][c], inv);
            // row_s -= f·row_r, compensated by column_r(V) += f·column_s(V).
            for j in 0..n {
                let t = field.mul(f, m[r][j]);
                m[s][j] = field.sub(m[s][j], t);
            }
            for row in v.iter_mut() {
                let t = field.mul(f, row[s]);
                row[r] = field.add(row[r], t);
            }
        }
    }

    let mut l = vec![vec![0; n]; n];
    let mut p = vec![vec![0; n]; n];
    for r in 0..n {
        p[r][pivot_col[r]] = 1;
        for i in 0..n {
            l[i][r] = m[i][pivot_col[r]];
        }
    }
    Ok(Vlp { v, l, p })
}

/// Lower-triangular representative with `L_kk = 1`, obtained by scaling row `k` by `L_kk⁻¹`.
pub fn normalized_form(field: &Field, g: &Matrix) -> Result<NormalizedForm> {
    let mut l = vlp_decompose(field, g)?.l;
    let k = (0..l.len())
        .rev()
        .find(|&r| l[r].iter().filter(|&&e| e != 0).count() > 1);
    if let Some(k) = k {
        let inv = field.inv(l[k][k])?;
        for e in l[k].iter_mut() {
            *e = field.mul(*e, inv);
        }
    }
    Ok(NormalizedForm { l, k })
}

/// Polarization condition for prime alphabets: `q` prime and `G` not equivalent to a diagonal matrix.
pub fn polarizes_theorem_prime(field: &Field, g: &Matrix) -> Result<bool> {
    let nf = normalized_form(field, g)?;
    Ok(field.is_prime_field() && nf.k.is_some())
}

/// Polarization condition for prime-power alphabets: some `L_kj`, `j < k`, is primitive.
pub fn polarizes_corollary_primitive(field: &Field, g: &Matrix) -> Result<bool> {
    let nf = normalized_form(field, g)?;
    Ok(nf
        .k
        .is_some_and(|k| nf.l[k][..k].iter().any(|&e| field.is_primitive(e))))
}
