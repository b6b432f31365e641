//! Small dense complex linear algebra used by the detectors and bounds.
//!
//! Everything here targets K x K Hermitian positive-definite Gram matrices
//! with K in the tens, so plain loops beat any external factorization
//! backend. Matrices are `ndarray::Array2<C64>` in standard (row-major)
//! layout; accumulations run row-by-row to stay cache-friendly for tall
//! M x K inputs.

use ndarray::{Array1, Array2, ArrayView2};

use crate::{C64, Error, Result};

/// Hermitian Gram matrix `A^H A` of a tall matrix.
pub fn herm_gram(a: &ArrayView2<C64>) -> Array2<C64> {
    let (m, k) = a.dim();
    let mut gram = Array2::<C64>::zeros((k, k));
    for row in 0..m {
        let r = a.row(row);
        for i in 0..k {
            let ci = r[i].conj();
            for j in i..k {
                gram[[i, j]] += ci * r[j];
            }
        }
    }
    // Fill the lower triangle from the upper one.
    for i in 0..k {
        for j in 0..i {
            gram[[i, j]] = gram[[j, i]].conj();
        }
    }
    gram
}

/// Cross product `A^H B` for equal-height matrices.
pub fn herm_cross(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Result<Array2<C64>> {
    let (m, ka) = a.dim();
    let (mb, kb) = b.dim();
    if m != mb {
        return Err(Error::Dimension(format!(
            "A^H B needs matching heights (got {m} and {mb})"
        )));
    }
    let mut out = Array2::<C64>::zeros((ka, kb));
    for row in 0..m {
        let ra = a.row(row);
        let rb = b.row(row);
        for i in 0..ka {
            let ci = ra[i].conj();
            for j in 0..kb {
                out[[i, j]] += ci * rb[j];
            }
        }
    }
    Ok(out)
}

/// Plain product `A B`. Kept local for the same reason as the rest of the
/// module: the operands stay small enough that a loop in (i, l, j) order is
/// already memory-bound.
pub fn matmul(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Result<Array2<C64>> {
    let (m, ka) = a.dim();
    let (kb, n) = b.dim();
    if ka != kb {
        return Err(Error::Dimension(format!(
            "product needs inner dimensions to agree (got {ka} and {kb})"
        )));
    }
    let mut out = Array2::<C64>::zeros((m, n));
    for i in 0..m {
        for l in 0..ka {
            let ail = a[[i, l]];
            for j in 0..n {
                out[[i, j]] += ail * b[[l, j]];
            }
        }
    }
    Ok(out)
}

/// Squared Euclidean norm of each column.
pub fn col_norms_sq(a: &ArrayView2<C64>) -> Array1<f64> {
    let (m, k) = a.dim();
    let mut out = Array1::<f64>::zeros(k);
    for row in 0..m {
        let r = a.row(row);
        for j in 0..k {
            out[j] += r[j].norm_sqr();
        }
    }
    out
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
///
/// The factor satisfies `L L^H = A` with real positive diagonal entries.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<C64>,
}

impl Cholesky {
    /// Factor a Hermitian positive-definite matrix; only the lower triangle
    /// of the input (including the diagonal) is read.
    pub fn factor(a: &ArrayView2<C64>) -> Result<Self> {
        let (n, nc) = a.dim();
        if n != nc {
            return Err(Error::Dimension(format!("cannot factor a {n} x {nc} matrix")));
        }
        let mut l = Array2::<C64>::zeros((n, n));
        for j in 0..n {
            let mut d = a[[j, j]].re;
            for p in 0..j {
                d -= l[[j, p]].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d });
            }
            let dj = d.sqrt();
            l[[j, j]] = C64::new(dj, 0.0);
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for p in 0..j {
                    s -= l[[i, p]] * l[[j, p]].conj();
                }
                l[[i, j]] = s / dj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        // Forward: L y = b.
        for i in 0..n {
            let mut s = b[i];
            for p in 0..i {
                s -= self.l[[i, p]] * b[p];
            }
            b[i] = s / self.l[[i, i]].re;
        }
        // Backward: L^H x = y.
        for i in (0..n).rev() {
            let mut s = b[i];
            for p in (i + 1)..n {
                s -= self.l[[p, i]].conj() * b[p];
            }
            b[i] = s / self.l[[i, i]].re;
        }
    }

    /// Solve `A X = B` column by column.
    pub fn solve_mat(&self, b: &ArrayView2<C64>) -> Result<Array2<C64>> {
        let n = self.dim();
        if b.nrows() != n {
            return Err(Error::Dimension(format!(
                "solve expects {n} rows, got {}",
                b.nrows()
            )));
        }
        let mut out = b.to_owned();
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..b.ncols() {
            for i in 0..n {
                col[i] = out[[i, j]];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                out[[i, j]] = col[i];
            }
        }
        Ok(out)
    }

    /// Inverse of `A`, via n identity solves. Only used where a formula
    /// references entries of an inverse explicitly.
    pub fn inverse(&self) -> Array2<C64> {
        let n = self.dim();
        let eye = Array2::<C64>::eye(n);
        self.solve_mat(&eye.view()).expect("identity has matching dimension")
    }

    /// Base-2 log-determinant of `A` (twice the log of the factor diagonal).
    pub fn log2_det(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.dim() {
            s += self.l[[j, j]].re.log2();
        }
        2.0 * s
    }
}

/// Rough spectral condition number of a Hermitian positive-definite matrix.
///
/// Power iteration for the top eigenvalue and inverse iteration through the
/// supplied factorization for the bottom one; an order-of-magnitude estimate
/// is all the rejection policy needs.
pub fn cond_estimate_hpd(a: &ArrayView2<C64>, chol: &Cholesky) -> f64 {
    let n = a.nrows();
    if n == 1 {
        return 1.0;
    }
    // Deterministic start vector with all components nonzero.
    let start: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64) / (n as f64 + 1.0), 0.0))
        .collect();

    let mut v = start.clone();
    let mut lam_max = 0.0;
    for _ in 0..40 {
        let w = matvec(a, &v);
        let norm = vec_norm(&w);
        if norm == 0.0 {
            break;
        }
        lam_max = norm / vec_norm(&v);
        v = w;
        normalize(&mut v);
    }

    let mut u = start;
    let mut inv_lam_min = 0.0;
    for _ in 0..40 {
        let mut w = u.clone();
        chol.solve_in_place(&mut w);
        let norm = vec_norm(&w);
        if !norm.is_finite() {
            return f64::INFINITY;
        }
        inv_lam_min = norm / vec_norm(&u);
        u = w;
        normalize(&mut u);
    }

    let lam_min = if inv_lam_min > 0.0 { 1.0 / inv_lam_min } else { f64::MIN_POSITIVE };
    (lam_max / lam_min).max(1.0)
}

fn matvec(a: &ArrayView2<C64>, v: &[C64]) -> Vec<C64> {
    let n = a.nrows();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            s += a[[i, j]] * v[j];
        }
        out[i] = s;
    }
    out
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}
