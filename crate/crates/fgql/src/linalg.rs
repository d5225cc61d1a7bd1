//! Dense symmetric linear algebra for desk-scale systems.
//!
//! The solver's coupling matrix is SPD of size r (a few dozen), so a plain
//! Cholesky factorization with explicit pivot reporting is all that's
//! needed; eigenvalue bounds for the design audit come from cyclic Jacobi
//! sweeps. Everything is deterministic: fixed loop order, no threading.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: Array2<f64>,
    /// Smallest diagonal pivot encountered, for diagnostics.
    pub smallest_pivot: f64,
}

impl Cholesky {
    /// Factorizes a symmetric positive definite matrix.
    ///
    /// Fails with the offending pivot when the matrix is numerically
    /// singular or indefinite.
    pub fn new(a: ArrayView2<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "cholesky needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let mut l = Array2::<f64>::zeros((n, n));
        let mut smallest_pivot = f64::INFINITY;
        for j in 0..n {
            let mut d = a[[j, j]];
            for k in 0..j {
                d -= l[[j, k]] * l[[j, k]];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::SingularSystem { pivot: d, index: j });
            }
            smallest_pivot = smallest_pivot.min(d);
            let dj = d.sqrt();
            l[[j, j]] = dj;
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = s / dj;
            }
        }
        Ok(Self {
            factor: l,
            smallest_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// The lower-triangular factor `L` with `A = L Lᵗ`.
    pub fn factor(&self) -> ArrayView2<'_, f64> {
        self.factor.view()
    }

    /// Solves `A x = b` using the cached factor.
    pub fn solve(&self, b: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let l = &self.factor;
        // Forward substitution L w = b.
        let mut w = b.to_owned();
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= l[[i, k]] * w[k];
            }
            w[i] = s / l[[i, i]];
        }
        // Back substitution Lᵗ x = w.
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in (i + 1)..n {
                s -= l[[k, i]] * w[k];
            }
            w[i] = s / l[[i, i]];
        }
        w
    }

    /// Dense inverse of the factored matrix.
    pub fn inverse(&self) -> Array2<f64> {
        let n = self.dim();
        let mut inv = Array2::<f64>::zeros((n, n));
        let mut e = Array1::<f64>::zeros(n);
        for j in 0..n {
            e.fill(0.0);
            e[j] = 1.0;
            let col = self.solve(e.view());
            inv.column_mut(j).assign(&col);
        }
        inv
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut m = a.to_owned();
    let tol = 1e-14 * frobenius_norm(m.view()).max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = m[[i, j]];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m[[i, i]];
                let aqq = m[[j, j]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mik = m[[i, k]];
                    let mjk = m[[j, k]];
                    m[[i, k]] = c * mik - s * mjk;
                    m[[j, k]] = s * mik + c * mjk;
                }
                for k in 0..n {
                    let mki = m[[k, i]];
                    let mkj = m[[k, j]];
                    m[[k, i]] = c * mki - s * mkj;
                    m[[k, j]] = s * mki + c * mkj;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eig)
}

fn frobenius_norm(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
