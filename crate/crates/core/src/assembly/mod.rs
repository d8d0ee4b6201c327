//! Global numbering, sparse assembly of the discrete bilinear form, canonical
//! interpolation, Dirichlet elimination and the linear solve.

pub mod solver;
pub mod sparse;

pub use solver::{kernel_dimension, pcg, smallest_eigenvalue, SolveStats, SolverOptions};
pub use sparse::CsrMatrix;

use crate::error::Result;
use crate::geometry::monomial::eval_monomials;
use crate::geometry::quadrature::centered_unit_rule;
use crate::local::dofs::{cell_moment_dofs, edge_dofs, face_moment_dofs};
use crate::local::{local_load, local_stiffness, DofMap, LocalOptions, LocalStiffness};
use crate::mesh::PolyMesh;
use nalgebra::{DVector, Vector3};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct AssemblyConfig {
    pub k: usize,
    pub local: LocalOptions,
    /// Cell quadrature order of the load; `None` means `2k + 4`.
    pub load_order: Option<usize>,
}

impl AssemblyConfig {
    pub fn new(k: usize) -> Self {
        AssemblyConfig {
            k,
            local: LocalOptions::default(),
            load_order: None,
        }
    }

    pub fn load_order(&self) -> usize {
        self.load_order.unwrap_or(2 * self.k + 4)
    }
}

pub struct GlobalSystem {
    pub dofs: DofMap,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub constrained: Vec<bool>,
    pub locals: Vec<LocalStiffness>,
    pub cell_dofs: Vec<Vec<usize>>,
}

impl GlobalSystem {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// `a_h(u, v)` evaluated cell by cell from the local matrices.
    pub fn local_energy(&self, u: &[f64], v: &[f64]) -> f64 {
        self.locals
            .iter()
            .zip(&self.cell_dofs)
            .map(|(ls, dofs)| {
                let ul = DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| u[g]));
                let vl = DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| v[g]));
                (ul.transpose() * ls.matrix() * vl)[(0, 0)]
            })
            .sum()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.constrained[i]).collect()
    }
}

/// Builds all local matrices in parallel and scatters them in cell order.
pub fn assemble<F>(mesh: &PolyMesh, cfg: &AssemblyConfig, f: F) -> Result<GlobalSystem>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let dofs = DofMap::new(mesh, cfg.k);
    let order = cfg.load_order();
    let built: Vec<Result<(LocalStiffness, DVector<f64>)>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let ls = local_stiffness(mesh, c, cfg.k, &cfg.local)?;
            let b = local_load(mesh, &ls.projectors, &f, order)?;
            Ok((ls, b))
        })
        .collect();
    let mut locals = Vec::with_capacity(built.len());
    let mut loads = Vec::with_capacity(built.len());
    for r in built {
        let (ls, b) = r?;
        locals.push(ls);
        loads.push(b);
    }
    let cell_dofs: Vec<Vec<usize>> = (0..mesh.num_cells()).map(|c| dofs.cell_dofs(mesh, c)).collect();
    let nnz: usize = cell_dofs.iter().map(|d| d.len() * d.len()).sum();
    let mut triplets = Vec::with_capacity(nnz);
    let mut rhs = vec![0.0; dofs.len()];
    for ((ls, b), gd) in locals.iter().zip(&loads).zip(&cell_dofs) {
        let a = ls.matrix();
        for (i, &gi) in gd.iter().enumerate() {
            rhs[gi] += b[i];
            for (j, &gj) in gd.iter().enumerate() {
                triplets.push((gi, gj, a[(i, j)]));
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(dofs.len(), &triplets).symmetrized();
    let constrained = dofs.dirichlet_mask(mesh);
    Ok(GlobalSystem {
        dofs,
        matrix,
        rhs,
        constrained,
        locals,
        cell_dofs,
    })
}

/// Canonical interpolant: vertex values and averaged edge, face and cell
/// moments against scaled monomials, by quadrature of the given order
/// (exact for polynomial `u` when `order ≥ deg u + k - 2`).
/// With `dirichlet_only` only Dirichlet boundary entities are filled, the
/// rest is left at zero.
pub fn interpolate<F>(mesh: &PolyMesh, dofs: &DofMap, u: F, order: usize, dirichlet_only: bool) -> Result<Vec<f64>>
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let k = dofs.k;
    let mut out = vec![0.0; dofs.len()];
    for (v, p) in mesh.vertices().iter().enumerate() {
        if !dirichlet_only || mesh.is_dirichlet_vertex(v) {
            out[dofs.vertex(v)] = u(p);
        }
    }
    if edge_dofs(k) > 0 {
        let rule = centered_unit_rule(order);
        for e in 0..mesh.num_edges() {
            if dirichlet_only && !mesh.is_dirichlet_edge(e) {
                continue;
            }
            let (a, b) = mesh.edge_points(e);
            let mid = (a + b) * 0.5;
            for &(s, w) in &rule {
                let val = w * u(&(mid + (b - a) * s));
                for j in 0..edge_dofs(k) {
                    out[dofs.edge(e, j)] += val * s.powi(j as i32);
                }
            }
        }
    }
    if face_moment_dofs(k) > 0 {
        for f in 0..mesh.num_faces() {
            if dirichlet_only && !mesh.is_dirichlet_face(f) {
                continue;
            }
            let g = &mesh.faces()[f].geometry;
            for (x, w) in mesh.face_quadrature(f, order)? {
                let s = g.scaled(&x);
                let val = w * u(&x) / g.area;
                for (j, m) in eval_monomials(2, k - 2, &[s[0], s[1], 0.0]).iter().enumerate() {
                    out[dofs.face(f, j)] += val * m;
                }
            }
        }
    }
    if cell_moment_dofs(k) > 0 && !dirichlet_only {
        for c in 0..mesh.num_cells() {
            let g = &mesh.cells()[c].geometry;
            for (x, w) in mesh.cell_quadrature(c, order)? {
                let s = (x - g.centroid) / g.diameter;
                let val = w * u(&x) / g.volume;
                for (j, m) in eval_monomials(3, k - 2, &[s.x, s.y, s.z]).iter().enumerate() {
                    out[dofs.cell(c, j)] += val * m;
                }
            }
        }
    }
    Ok(out)
}

/// Adds `∫_F g_N Q_F φ_j` over the Neumann faces, where
/// `flux(x, n)` is the prescribed outward flux at `x` with outward normal `n`.
pub fn add_neumann_load<G>(sys: &mut GlobalSystem, mesh: &PolyMesh, flux: G, order: usize) -> Result<()>
where
    G: Fn(&Vector3<f64>, &Vector3<f64>) -> f64,
{
    for (ls, gd) in sys.locals.iter().zip(&sys.cell_dofs) {
        let cp = &ls.projectors;
        for (i, cf) in cp.faces.iter().enumerate() {
            if !mesh.is_neumann_face(cf.face) {
                continue;
            }
            let geom = &mesh.faces()[cf.face].geometry;
            let mut moments = DVector::zeros(cf.proj.q.nrows());
            for (x, w) in mesh.face_quadrature(cf.face, order)? {
                let g = w * flux(&x, &cf.normal);
                let s = geom.scaled(&x);
                for (m, v) in moments.iter_mut().zip(eval_monomials(2, cp.k, &[s[0], s[1], 0.0])) {
                    *m += g * v;
                }
            }
            let local = cp.lift(i, &cf.proj.q).transpose() * moments;
            for (j, &g) in gd.iter().enumerate() {
                sys.rhs[g] += local[j];
            }
        }
    }
    Ok(())
}

/// Free-DOF system `A_ff x_f = b_f - A_fc x_c`.
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free: Vec<usize>,
    /// Full-length vector holding the constrained values (zero on free DOFs).
    pub lifted: Vec<f64>,
}

impl ReducedSystem {
    pub fn expand(&self, x_free: &[f64]) -> Vec<f64> {
        let mut x = self.lifted.clone();
        for (i, &g) in self.free.iter().enumerate() {
            x[g] = x_free[i];
        }
        x
    }
}

/// Eliminates constrained DOFs using `g_dofs` (full length; only constrained
/// entries are read).
pub fn apply_dirichlet(sys: &GlobalSystem, g_dofs: &[f64]) -> ReducedSystem {
    let free = sys.free_dofs();
    let mut lifted = vec![0.0; sys.len()];
    for i in 0..sys.len() {
        if sys.constrained[i] {
            lifted[i] = g_dofs[i];
        }
    }
    let a_lift = sys.matrix.mul_vec(&lifted);
    let rhs = free.iter().map(|&i| sys.rhs[i] - a_lift[i]).collect();
    ReducedSystem {
        matrix: sys.matrix.submatrix(&free),
        rhs,
        free,
        lifted,
    }
}

pub fn solve(red: &ReducedSystem, opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    let mut x = vec![0.0; red.free.len()];
    let stats = pcg(&red.matrix, &red.rhs, &mut x, opts)?;
    Ok((red.expand(&x), stats))
}

#[cfg(test)]
mod tests;
