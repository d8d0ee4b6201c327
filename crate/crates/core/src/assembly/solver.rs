//! Jacobi-preconditioned conjugate gradients and spectral checks.

use super::sparse::{dot, CsrMatrix};
use crate::error::{Result, VemError};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖` at exit.
    pub relative_residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 20_000,
        }
    }
}

/// Solves `A x = b` starting from `x`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], opts: &SolverOptions) -> Result<SolveStats> {
    let n = a.nrows();
    let bnorm = dot(b, b).sqrt();
    if n == 0 || bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r: Vec<f64> = a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / bnorm;
    for it in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: res,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(VemError::SolverDiverged {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
    }
    // recompute the true residual before giving up
    let ax = a.mul_vec(x);
    let true_res = ax.iter().zip(b).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt() / bnorm;
    if true_res <= opts.tol {
        return Ok(SolveStats {
            iterations: opts.max_iter,
            relative_residual: true_res,
        });
    }
    Err(VemError::SolverDiverged {
        iterations: opts.max_iter,
        residual: true_res,
    })
}

/// Smallest eigenvalue by block inverse iteration (inner CG solves) with a
/// Rayleigh–Ritz step, which converges at the rate `λ_1/λ_{b+1}` even when
/// the lowest eigenvalues cluster. `None` when the matrix is empty.
pub fn smallest_eigenvalue(a: &CsrMatrix) -> Result<Option<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(None);
    }
    let b = n.min(4);
    // deterministic start block with components in every eigendirection
    let mut x = DMatrix::from_fn(n, b, |i, j| 1.0 + (((i + 1) * (7919 + 104_729 * j)) % 101) as f64 / 101.0);
    x = x.qr().q();
    let inner = SolverOptions {
        tol: 1e-13,
        max_iter: 20 * n + 1000,
    };
    let mut lambda = f64::INFINITY;
    for _ in 0..500 {
        let mut y = DMatrix::zeros(n, b);
        for j in 0..b {
            let mut col = vec![0.0; n];
            pcg(a, x.column(j).as_slice(), &mut col, &inner)?;
            y.set_column(j, &DVector::from_vec(col));
        }
        let q = y.qr().q();
        let mut aq = DMatrix::zeros(n, b);
        for j in 0..b {
            aq.set_column(j, &DVector::from_vec(a.mul_vec(q.column(j).as_slice())));
        }
        let t = q.transpose() * &aq;
        let eig = nalgebra::SymmetricEigen::new((&t + t.transpose()) * 0.5);
        let (imin, lmin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |m, (i, &v)| if v < m.1 { (i, v) } else { m });
        x = &q * &eig.eigenvectors;
        let v = x.column(imin);
        let resid = (&aq * eig.eigenvectors.column(imin) - v * lmin).norm();
        let done = ((lmin - lambda) / lmin).abs() < 1e-13 || resid <= 1e-10 * lmin.abs();
        lambda = lmin;
        if done {
            break;
        }
    }
    Ok(Some(lambda))
}

/// Largest size for which the dense SVD kernel check runs.
pub const DENSE_CHECK_LIMIT: usize = 500;

/// Dimension of the numerical kernel (singular values below
/// `1e-10·σ_max`), or `None` above [`DENSE_CHECK_LIMIT`].
pub fn kernel_dimension(a: &CsrMatrix) -> Option<usize> {
    if a.nrows() > DENSE_CHECK_LIMIT {
        return None;
    }
    let s = a.to_dense().svd(false, false).singular_values;
    let tol = 1e-10 * s.max();
    Some(s.iter().filter(|v| **v <= tol).count())
}
