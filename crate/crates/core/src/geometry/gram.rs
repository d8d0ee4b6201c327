//! Solves with symmetric positive definite Gram matrices of polynomial bases.
//!
//! The matrix is first scaled to unit diagonal. The default path is then a
//! diagonally pivoted Cholesky factorization; when the spectral condition
//! number of the scaled matrix exceeds [`CONDITION_LIMIT`] the solver switches
//! to a basis orthonormalized by modified Gram–Schmidt (with one
//! re-orthogonalization pass) under the inner product the Gram matrix
//! represents.

use crate::error::{Result, VemError};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramMethod {
    PivotedCholesky,
    Orthonormalized,
}

/// Factorized Gram matrix ready for repeated solves.
#[derive(Clone, Debug)]
pub struct GramSolver {
    /// Explicit inverse; these matrices are at most a few dozen rows.
    inverse: DMatrix<f64>,
    pub method: GramMethod,
    pub condition: f64,
}

fn pivoted_cholesky_inverse(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = g.nrows();
    let mut a = g.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        // pick the largest remaining diagonal entry
        let (mut piv, mut best) = (k, f64::NEG_INFINITY);
        for i in k..n {
            let d = a[(i, i)] - (0..k).map(|j| l[(i, j)] * l[(i, j)]).sum::<f64>();
            if d > best {
                best = d;
                piv = i;
            }
        }
        if best <= 0.0 {
            return None;
        }
        if piv != k {
            a.swap_rows(k, piv);
            a.swap_columns(k, piv);
            l.swap_rows(k, piv);
            perm.swap(k, piv);
        }
        l[(k, k)] = best.sqrt();
        for i in k + 1..n {
            let s = a[(i, k)] - (0..k).map(|j| l[(i, j)] * l[(k, j)]).sum::<f64>();
            l[(i, k)] = s / l[(k, k)];
        }
    }
    // P G P^T = L L^T  =>  G^{-1} = P^T L^{-T} L^{-1} P
    let linv = l.solve_lower_triangular(&DMatrix::identity(n, n))?;
    let inv_p = linv.transpose() * &linv;
    let mut inv = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(perm[i], perm[j])] = inv_p[(i, j)];
        }
    }
    Some(inv)
}

/// Rows of `t` satisfy `t G t^T = I`; then `G^{-1} = t^T t`.
fn orthonormalized_inverse(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = g.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let inner = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * g * v)[(0, 0)];
    for i in 0..n {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for _pass in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                v -= b * c;
            }
        }
        let nrm2 = inner(&v, &v);
        if nrm2 <= 0.0 {
            return None;
        }
        v /= nrm2.sqrt();
        basis.push(v);
    }
    let mut t = DMatrix::zeros(n, n);
    for (i, b) in basis.iter().enumerate() {
        t.set_row(i, &b.transpose());
    }
    Some(t.transpose() * t)
}

impl GramSolver {
    pub fn new(gram: &DMatrix<f64>) -> Result<Self> {
        let n = gram.nrows();
        if n == 0 {
            return Ok(GramSolver {
                inverse: DMatrix::zeros(0, 0),
                method: GramMethod::PivotedCholesky,
                condition: 1.0,
            });
        }
        let sym = (gram + gram.transpose()) * 0.5;
        // symmetric diagonal equilibration: G = D S D with unit diagonal S
        if let Some(i) = (0..n).find(|&i| sym[(i, i)] <= 0.0) {
            return Err(VemError::Internal(format!(
                "Gram matrix has non-positive diagonal entry {i}"
            )));
        }
        let d: Vec<f64> = (0..n).map(|i| sym[(i, i)].sqrt().recip()).collect();
        let sym = DMatrix::from_fn(n, n, |i, j| sym[(i, j)] * d[i] * d[j]);
        let eig = SymmetricEigen::new(sym.clone()).eigenvalues;
        let (lo, hi) = eig
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo <= 0.0 {
            return Err(VemError::Internal(format!(
                "Gram matrix is not positive definite (eigenvalues in [{lo:.3e}, {hi:.3e}])"
            )));
        }
        let condition = hi / lo;
        let (inverse, method) = if condition <= CONDITION_LIMIT {
            match pivoted_cholesky_inverse(&sym) {
                Some(inv) => (inv, GramMethod::PivotedCholesky),
                None => (
                    orthonormalized_inverse(&sym).ok_or_else(singular)?,
                    GramMethod::Orthonormalized,
                ),
            }
        } else {
            (
                orthonormalized_inverse(&sym).ok_or_else(singular)?,
                GramMethod::Orthonormalized,
            )
        };
        let inverse = DMatrix::from_fn(n, n, |i, j| inverse[(i, j)] * d[i] * d[j]);
        Ok(GramSolver {
            inverse,
            method,
            condition,
        })
    }

    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        &self.inverse * rhs
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }
}

fn singular() -> VemError {
    VemError::Internal("Gram matrix is numerically singular".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn well_conditioned_uses_cholesky() {
        let g = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let s = GramSolver::new(&g).unwrap();
        assert_eq!(s.method, GramMethod::PivotedCholesky);
        let id = &g * s.inverse();
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn ill_conditioned_falls_back() {
        let g = hilbert(10);
        let s = GramSolver::new(&g).unwrap();
        assert_eq!(s.method, GramMethod::Orthonormalized);
        assert!(s.condition > CONDITION_LIMIT);
        // backward check on a vector with an exact representation
        let x = DMatrix::from_fn(10, 1, |i, _| (i as f64 + 1.0).recip());
        let b = &g * &x;
        let r = &g * s.solve(&b) - &b;
        assert!(r.amax() < f64::EPSILON * s.condition * b.amax());
    }

    #[test]
    fn indefinite_is_an_error() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GramSolver::new(&g).is_err());
    }
}
