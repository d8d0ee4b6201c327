//! Manufactured problems, discrete error norms, the error-equation check and
//! convergence studies.

pub mod identity;
pub mod problems;
pub mod study;

pub use identity::{identity_quad_order, verify_error_equation, IdentityReport};
pub use problems::ManufacturedProblem;
pub use study::{convergence_study, fit_rate, ErrorReport, LevelRecord, RateFit};

use crate::assembly::{
    add_neumann_load, apply_dirichlet, assemble, interpolate, solve, sparse::dot, AssemblyConfig, GlobalSystem, SolveStats,
    SolverOptions,
};
use crate::error::{Result, VemError};
use crate::local::{CellProjectors, LocalOptions};
use crate::mesh::PolyMesh;
use nalgebra::{DVector, Vector3};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    pub k: usize,
    pub local: LocalOptions,
    pub solver: SolverOptions,
    /// Quadrature order for loads, interpolation and error norms;
    /// `None` means `2k + 4`.
    pub quad_order: Option<usize>,
}

impl SolveConfig {
    pub fn new(k: usize) -> Self {
        SolveConfig {
            k,
            local: LocalOptions::default(),
            solver: SolverOptions::default(),
            quad_order: None,
        }
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order.unwrap_or(2 * self.k + 4)
    }
}

pub struct Solution {
    pub system: GlobalSystem,
    pub u_h: Vec<f64>,
    /// Canonical interpolant of the exact solution.
    pub u_i: Vec<f64>,
    pub stats: SolveStats,
}

/// Assembles, imposes `g = u` on the Dirichlet boundary and the flux `∇u·n`
/// on Neumann faces, and solves.
pub fn solve_problem(mesh: &PolyMesh, cfg: &SolveConfig, problem: &ManufacturedProblem) -> Result<Solution> {
    let order = cfg.quad_order();
    let acfg = AssemblyConfig {
        k: cfg.k,
        local: cfg.local,
        load_order: Some(order),
    };
    let mut system = assemble(mesh, &acfg, problem.f)?;
    let grad = problem.grad;
    add_neumann_load(&mut system, mesh, |x, n| grad(x).dot(n), order)?;
    let g = interpolate(mesh, &system.dofs, problem.u, order, true)?;
    let red = apply_dirichlet(&system, &g);
    let (u_h, stats) = solve(&red, &cfg.solver)?;
    let u_i = interpolate(mesh, &system.dofs, problem.u, order, false)?;
    Ok(Solution {
        system,
        u_h,
        u_i,
        stats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Errors {
    /// `⫼u_h - u_I⫼`
    pub energy: f64,
    /// `(Σ_K |u - Π_K u_h|²_{1,K})^{1/2}`
    pub h1: f64,
    /// `(Σ_K ‖u - Q_K u_h‖²_{0,K})^{1/2}`
    pub l2: f64,
}

/// `sqrt((u_h - u_I)ᵀ A (u_h - u_I))` with the full assembled matrix.
pub fn energy_error(system: &GlobalSystem, u_h: &[f64], u_i: &[f64]) -> Result<f64> {
    let d: Vec<f64> = u_h.iter().zip(u_i).map(|(a, b)| a - b).collect();
    let e2 = dot(&d, &system.matrix.mul_vec(&d));
    let floor = 1e-12 * system.matrix.max_abs() * dot(&d, &d);
    if e2 < -floor {
        return Err(VemError::Internal(format!(
            "negative discrete energy {e2:.3e} (matrix not positive semidefinite)"
        )));
    }
    Ok(e2.max(0.0).sqrt())
}

fn local_coeffs(m: &nalgebra::DMatrix<f64>, dofs: &[usize], u: &[f64]) -> DVector<f64> {
    m * DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| u[g]))
}

fn cell_errors<F>(mesh: &PolyMesh, system: &GlobalSystem, order: usize, per_cell: F) -> Result<f64>
where
    F: Fn(&CellProjectors, &[usize], &Vector3<f64>) -> f64 + Sync,
{
    let parts: Vec<Result<f64>> = system
        .locals
        .par_iter()
        .zip(&system.cell_dofs)
        .map(|(ls, dofs)| {
            let cp = &ls.projectors;
            let rule = mesh.cell_quadrature(cp.cell, order)?;
            Ok(rule.iter().map(|(x, w)| w * per_cell(cp, dofs, x)).sum())
        })
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total.sqrt())
}

/// Broken H¹ seminorm of `u - Π_K u_h` by cell quadrature.
pub fn broken_h1_error(
    mesh: &PolyMesh,
    system: &GlobalSystem,
    u_h: &[f64],
    grad: fn(&Vector3<f64>) -> Vector3<f64>,
    order: usize,
) -> Result<f64> {
    let coeffs: Vec<DVector<f64>> = system
        .locals
        .iter()
        .zip(&system.cell_dofs)
        .map(|(ls, d)| local_coeffs(&ls.projectors.pi, d, u_h))
        .collect();
    cell_errors(mesh, system, order, |cp, _, x| {
        let c = &coeffs[cp.cell];
        let mut g = grad(x);
        for (gm, ci) in cp.basis.grad_all(x.as_slice()).iter().zip(c.iter()) {
            g -= Vector3::from(*gm) * *ci;
        }
        g.norm_squared()
    })
}

/// L² norm of `u - Q_K u_h` by cell quadrature.
pub fn l2_error(
    mesh: &PolyMesh,
    system: &GlobalSystem,
    u_h: &[f64],
    u: fn(&Vector3<f64>) -> f64,
    order: usize,
) -> Result<f64> {
    let coeffs: Vec<DVector<f64>> = system
        .locals
        .iter()
        .zip(&system.cell_dofs)
        .map(|(ls, d)| local_coeffs(&ls.projectors.q, d, u_h))
        .collect();
    cell_errors(mesh, system, order, |cp, _, x| {
        let c = &coeffs[cp.cell];
        let q: f64 = cp.basis.eval_all(x.as_slice()).iter().zip(c.iter()).map(|(m, c)| m * c).sum();
        (u(x) - q).powi(2)
    })
}

pub fn compute_errors(
    mesh: &PolyMesh,
    sol: &Solution,
    problem: &ManufacturedProblem,
    order: usize,
) -> Result<Errors> {
    Ok(Errors {
        energy: energy_error(&sol.system, &sol.u_h, &sol.u_i)?,
        h1: broken_h1_error(mesh, &sol.system, &sol.u_h, problem.grad, order)?,
        l2: l2_error(mesh, &sol.system, &sol.u_h, problem.u, order)?,
    })
}
