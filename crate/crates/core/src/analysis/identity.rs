//! Numerical check of the error equation
//!
//! `a_h(u_h - u_I, v) = Σ_K [ (∇Π_K(u - u_I), ∇Π_K v)_K
//!     + Σ_F (∇(Π_K u - u)·n, Q_K v - Q_F v)_F ] - S_h(u_I, v)`
//!
//! for discrete `v` vanishing on the Dirichlet boundary (Neumann faces carry
//! the flux `∇u·n` in the load, so their terms take the same form). `Π_K u` is the exact
//! gradient projection of `u`; every term against `u` is integrated by
//! quadrature, everything else is exact polynomial algebra.

use super::{ManufacturedProblem, Solution};
use crate::assembly::sparse::dot;
use crate::error::Result;
use crate::geometry::monomial::eval_monomials;
use crate::geometry::GramSolver;
use crate::local::LocalStiffness;
use crate::mesh::PolyMesh;
use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Quadrature order for the identity check (load and right-hand side):
/// four orders above the error-norm default, which puts the quadrature
/// error below 1e-9 relative on the coarsest test meshes.
pub fn identity_quad_order(k: usize) -> usize {
    2 * k + 8
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityReport {
    pub trials: usize,
    /// `max |L - R| / (|L| + |R| + ε_mach)`.
    pub max_relative: f64,
    /// `max |L - R|`.
    pub max_absolute: f64,
    /// `max(|L|, |R|)` over the trials.
    pub max_side: f64,
    /// Polynomial exact solution in `P_k`: both sides vanish.
    pub polynomial: bool,
}

impl IdentityReport {
    /// The gated quantity: the absolute size of both sides when they must
    /// vanish, the relative discrepancy otherwise.
    pub fn residual(&self) -> f64 {
        if self.polynomial {
            self.max_side.max(self.max_absolute)
        } else {
            self.max_relative
        }
    }
}

/// Cell contribution `c_K` with `RHS(v) = Σ_K c_K · v_K`.
fn cell_functional(
    mesh: &PolyMesh,
    ls: &LocalStiffness,
    ui: &DVector<f64>,
    grad: fn(&Vector3<f64>) -> Vector3<f64>,
    order: usize,
) -> Result<DVector<f64>> {
    let cp = &ls.projectors;
    let n3 = cp.basis.len();
    let nd = cp.n_dofs();

    // (∇u, ∇m_a)_K
    let mut cu = DVector::zeros(n3);
    for (x, w) in mesh.cell_quadrature(cp.cell, order)? {
        let gu = grad(&x);
        for (c, gm) in cu.iter_mut().zip(cp.basis.grad_all(x.as_slice())) {
            *c += w * gu.dot(&Vector3::from(gm));
        }
    }
    let pi_u = {
        let block = cp.grad.view((1, 1), (n3 - 1, n3 - 1)).clone_owned();
        let sol = GramSolver::new(&block)?.solve(&DMatrix::from_column_slice(n3 - 1, 1, &cu.as_slice()[1..]));
        let mut p = DVector::zeros(n3);
        p.rows_mut(1, n3 - 1).copy_from(&sol.column(0));
        p
    };

    let consistency = cp.pi.transpose() * (&cu - &cp.grad * (&cp.pi * ui));
    let stab = &ls.stabilization * ui;

    let mut flux = DVector::zeros(nd);
    for (i, cf) in cp.faces.iter().enumerate() {
        let geom = &mesh.faces()[cf.face].geometry;
        let qf = cp.lift(i, &cf.proj.q);
        for (x, w) in mesh.face_quadrature(cf.face, order)? {
            let mut gpi = Vector3::zeros();
            for (gm, c) in cp.basis.grad_all(x.as_slice()).iter().zip(pi_u.iter()) {
                gpi += Vector3::from(*gm) * *c;
            }
            let dn = (gpi - grad(&x)).dot(&cf.normal);
            let mk = DVector::from_vec(cp.basis.eval_all(x.as_slice()));
            let s = geom.scaled(&x);
            let mf = DVector::from_vec(eval_monomials(2, cp.k, &[s[0], s[1], 0.0]));
            let row = cp.q.transpose() * mk - qf.transpose() * mf;
            flux.axpy(w * dn, &row, 1.0);
        }
    }
    Ok(consistency + flux - stab)
}

/// Evaluates both sides for `trials` random `v` (seeded, zero on
/// constrained DOFs) using quadrature of the given order.
pub fn verify_error_equation(
    mesh: &PolyMesh,
    sol: &Solution,
    problem: &ManufacturedProblem,
    trials: usize,
    seed: u64,
    order: usize,
) -> Result<IdentityReport> {
    let sys = &sol.system;
    let parts: Vec<Result<DVector<f64>>> = sys
        .locals
        .par_iter()
        .zip(&sys.cell_dofs)
        .map(|(ls, dofs)| {
            let ui = DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| sol.u_i[g]));
            cell_functional(mesh, ls, &ui, problem.grad, order)
        })
        .collect();
    let mut rhs = vec![0.0; sys.len()];
    for (p, dofs) in parts.into_iter().zip(&sys.cell_dofs) {
        let p = p?;
        for (i, &g) in dofs.iter().enumerate() {
            rhs[g] += p[i];
        }
    }
    let d: Vec<f64> = sol.u_h.iter().zip(&sol.u_i).map(|(a, b)| a - b).collect();
    let lhs = sys.matrix.mul_vec(&d);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IdentityReport {
        trials,
        max_relative: 0.0,
        max_absolute: 0.0,
        max_side: 0.0,
        polynomial: problem.is_polynomial_of(sys.dofs.k),
    };
    for _ in 0..trials {
        let v: Vec<f64> = sys
            .constrained
            .iter()
            .map(|&c| if c { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let l = dot(&lhs, &v);
        let r = dot(&rhs, &v);
        let abs = (l - r).abs();
        report.max_absolute = report.max_absolute.max(abs);
        report.max_relative = report.max_relative.max(abs / (l.abs() + r.abs() + f64::EPSILON));
        report.max_side = report.max_side.max(l.abs()).max(r.abs());
    }
    Ok(report)
}
