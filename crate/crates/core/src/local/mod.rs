//! Element-level virtual element machinery: DOF layout, projectors,
//! stabilizations, stiffness matrix and load vector on one cell.

pub mod cell;
pub mod dofs;
pub mod face;
pub mod poly_ops;
pub mod stabilization;

pub use cell::{cell_projectors, CellFace, CellProjectors};
pub use dofs::{local_count, DofMap};
pub use face::{face_projector, FaceProjector};
pub use stabilization::{stab_new, stab_original};

use crate::error::{Result, VemError};
use crate::mesh::PolyMesh;
use nalgebra::{DMatrix, DVector, Vector3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilizationVariant {
    New,
    Original,
}

impl std::str::FromStr for StabilizationVariant {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "new" => Ok(StabilizationVariant::New),
            "original" => Ok(StabilizationVariant::Original),
            _ => Err(VemError::Parameter(format!(
                "unknown stabilization '{s}' (expected new or original)"
            ))),
        }
    }
}

impl std::fmt::Display for StabilizationVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilizationVariant::New => "new",
            StabilizationVariant::Original => "original",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LocalOptions {
    pub variant: StabilizationVariant,
    /// Face weight factor: `ε_F = c_eps · ρ_F`.
    pub c_eps: f64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            variant: StabilizationVariant::New,
            c_eps: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalStiffness {
    pub consistency: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    pub variant: StabilizationVariant,
    pub projectors: CellProjectors,
}

impl LocalStiffness {
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.consistency + &self.stabilization
    }
}

pub fn stabilization(cp: &CellProjectors, opts: &LocalOptions) -> DMatrix<f64> {
    match opts.variant {
        StabilizationVariant::New => stab_new(cp, opts.c_eps),
        StabilizationVariant::Original => stab_original(cp),
    }
}

/// `A_c = Π^T G Π` plus the selected stabilization.
pub fn local_stiffness(mesh: &PolyMesh, c: usize, k: usize, opts: &LocalOptions) -> Result<LocalStiffness> {
    let cp = cell_projectors(mesh, c, k)?;
    let consistency = stabilization::symmetrize(cp.pi.transpose() * &cp.grad * &cp.pi);
    let stab = stabilization(&cp, opts);
    Ok(LocalStiffness {
        consistency,
        stabilization: stab,
        variant: opts.variant,
        projectors: cp,
    })
}

/// `b_j = ∫_K f Q_K φ_j` by cell quadrature of the given order.
pub fn local_load<F>(mesh: &PolyMesh, cp: &CellProjectors, f: F, order: usize) -> Result<DVector<f64>>
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let rule = mesh.cell_quadrature(cp.cell, order)?;
    let mut moments = DVector::zeros(cp.basis.len());
    for (x, w) in &rule {
        let fx = f(x) * w;
        if fx == 0.0 {
            continue;
        }
        for (m, v) in moments.iter_mut().zip(cp.basis.eval_all(x.as_slice())) {
            *m += fx * v;
        }
    }
    Ok(cp.q.transpose() * moments)
}

/// Largest relative L² error `‖P m_b - m_b‖ / ‖m_b‖` over the basis
/// monomials, where `dofs` holds the DOFs of each monomial and `mass` is the
/// Gram matrix of the basis.
pub fn reproduction_error(proj: &DMatrix<f64>, dofs: &DMatrix<f64>, mass: &DMatrix<f64>) -> f64 {
    let n = mass.nrows();
    let diff = proj * dofs - DMatrix::identity(n, n);
    (0..n)
        .map(|b| {
            let e = diff.column(b);
            let num = (e.transpose() * mass * e)[(0, 0)].max(0.0);
            (num / mass[(b, b)]).sqrt()
        })
        .fold(0.0, f64::max)
}
