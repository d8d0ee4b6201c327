//! Stabilization matrices on one cell.

use super::cell::CellProjectors;
use nalgebra::DMatrix;

/// Boundary stabilization
/// `h_K⁻¹ Σ_F [ (Q_K u - Q_F u, Q_K v - Q_F v)_F
///   + ε_F h_F Σ_{e ⊂ ∂F} (u - Q_F u, v - Q_F v)_e ]`
/// with `ε_F = c_eps ρ_F`. Edges are visited once per face that contains them.
pub fn stab_new(cp: &CellProjectors, c_eps: f64) -> DMatrix<f64> {
    let nd = cp.n_dofs();
    let mut a = DMatrix::zeros(nd, nd);
    for (i, cf) in cp.faces.iter().enumerate() {
        let qf = cp.lift(i, &cf.proj.q);
        let d = &cf.restriction * &cp.q - &qf;
        a += d.transpose() * &cf.proj.mass * &d;
        let weight = c_eps * cf.rho * cf.diameter;
        for e in &cf.proj.edges {
            let trace = cp.lift(i, &e.trace);
            let d = trace - e.param.restriction(2, cp.k) * &qf;
            let me = super::poly_ops::edge_mass(cp.k, e.param.len);
            a += (d.transpose() * me * &d) * weight;
        }
    }
    symmetrize(a / cp.diameter())
}

/// DOF-based stabilization `Σ_r χ_r(u - Π_K u) χ_r(v - Π_K v)`.
pub fn stab_original(cp: &CellProjectors) -> DMatrix<f64> {
    let nd = cp.n_dofs();
    let d = DMatrix::identity(nd, nd) - cp.dofs_of_monomials() * &cp.pi;
    symmetrize(d.transpose() * d)
}

pub(crate) fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}
