//! Cell projectors Π_K and Q_K built from the face projectors.

use super::dofs::{cell_moment_dofs, edge_dofs, face_moment_dofs, face_to_cell_maps, local_count};
use super::face::{face_projector, l2_correction, FaceProjector};
use super::poly_ops::{gradient_gram, low_size, mass_matrix, unit_moment, EdgeParam};
use crate::error::{Result, VemError};
use crate::geometry::monomial::{basis_size, eval_monomials, Poly};
use crate::geometry::{face_restriction, polyhedron_monomial_integrals, GramSolver, ScaledMonomialBasis};
use crate::mesh::PolyMesh;
use nalgebra::{DMatrix, Vector3};

#[derive(Clone, Debug)]
pub struct CellFace {
    /// Global face index.
    pub face: usize,
    pub sign: f64,
    pub proj: FaceProjector,
    /// Cell-local index of each face-local DOF.
    pub map: Vec<usize>,
    /// Face coefficients of the restriction of cell polynomials of degree `k`.
    pub restriction: DMatrix<f64>,
    pub rho: f64,
    pub diameter: f64,
    pub normal: Vector3<f64>,
}

#[derive(Clone, Debug)]
pub struct CellProjectors {
    pub k: usize,
    pub cell: usize,
    pub basis: ScaledMonomialBasis,
    pub pi: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// `(m_a, m_b)_K`, degree `k`.
    pub mass: DMatrix<f64>,
    /// `(∇m_a, ∇m_b)_K`, degree `k`.
    pub grad: DMatrix<f64>,
    pub integrals: Vec<f64>,
    pub faces: Vec<CellFace>,
    /// Cell-scaled parametrizations of the cell edges (sorted order).
    pub edges: Vec<EdgeParam>,
    pub vertices: Vec<Vector3<f64>>,
    pub volume: f64,
}

impl CellProjectors {
    pub fn n_dofs(&self) -> usize {
        self.pi.ncols()
    }

    pub fn diameter(&self) -> f64 {
        self.basis.diameter
    }

    /// Spread a matrix acting on face DOFs to cell-local columns.
    pub fn lift(&self, face: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
        let map = &self.faces[face].map;
        let mut out = DMatrix::zeros(m.nrows(), self.n_dofs());
        for (j, &col) in map.iter().enumerate() {
            for i in 0..m.nrows() {
                out[(i, col)] += m[(i, j)];
            }
        }
        out
    }

    fn moment_offset(&self) -> usize {
        self.n_dofs() - cell_moment_dofs(self.k)
    }

    /// Cell DOFs (`N_K × dim P_k(K)`) of every cell scaled monomial.
    pub fn dofs_of_monomials(&self) -> DMatrix<f64> {
        let k = self.k;
        let n3 = basis_size(3, k);
        let ne = edge_dofs(k);
        let nfm = face_moment_dofs(k);
        let mut x = DMatrix::zeros(self.n_dofs(), n3);
        for (i, p) in self.vertices.iter().enumerate() {
            let vals = eval_monomials(3, k, &self.basis.scaled(p.as_slice()));
            for b in 0..n3 {
                x[(i, b)] = vals[b];
            }
        }
        let base = self.vertices.len();
        for (i, e) in self.edges.iter().enumerate() {
            let r = e.restriction(3, k);
            for m in 0..ne {
                for b in 0..n3 {
                    x[(base + i * ne + m, b)] = (0..=k).map(|p| r[(p, b)] * unit_moment(p + m)).sum();
                }
            }
        }
        let base = base + self.edges.len() * ne;
        for (fi, cf) in self.faces.iter().enumerate() {
            let rows = cf.proj.mass.rows(0, nfm) * &cf.restriction / cf.proj.area;
            for m in 0..nfm {
                for b in 0..n3 {
                    x[(base + fi * nfm + m, b)] = rows[(m, b)];
                }
            }
        }
        let off = self.moment_offset();
        for m in 0..cell_moment_dofs(k) {
            for b in 0..n3 {
                x[(off + m, b)] = self.mass[(m, b)] / self.volume;
            }
        }
        x
    }
}

pub fn cell_projectors(mesh: &PolyMesh, c: usize, k: usize) -> Result<CellProjectors> {
    build(mesh, c, k).map_err(|e| e.in_cell(c))
}

fn build(mesh: &PolyMesh, c: usize, k: usize) -> Result<CellProjectors> {
    if k == 0 {
        return Err(VemError::Parameter("order k must be at least 1".into()));
    }
    let cell = &mesh.cells()[c];
    let g = &cell.geometry;
    let h = g.diameter;
    let centroid = g.centroid;
    let n3 = basis_size(3, k);
    let nd = local_count(mesh, c, k);
    let ints = polyhedron_monomial_integrals(&mesh.oriented_faces(c), &centroid, h, 2 * k);
    let maps = face_to_cell_maps(mesh, c, k);

    let mut faces = Vec::with_capacity(cell.faces.len());
    for ((&f, &sign), map) in cell.faces.iter().zip(&cell.signs).zip(maps) {
        let face = &mesh.faces()[f];
        let n = face.vertices.len();
        let forward: Vec<bool> = (0..n)
            .map(|i| face.vertices[i] < face.vertices[(i + 1) % n])
            .collect();
        let proj = face_projector(&face.geometry, &forward, k)?;
        faces.push(CellFace {
            face: f,
            sign,
            restriction: face_restriction(&centroid, h, &face.geometry, k),
            rho: face.geometry.chunkiness.rho,
            diameter: face.geometry.diameter,
            normal: face.geometry.frame.normal * sign,
            map,
            proj,
        });
    }
    let edges = cell
        .edges
        .iter()
        .map(|&e| {
            let (a, b) = mesh.edge_points(e);
            EdgeParam::in_cell(&a, &b, &centroid, h)
        })
        .collect();
    let vertices = cell.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
    let mut cp = CellProjectors {
        k,
        cell: c,
        basis: ScaledMonomialBasis::new(3, k, centroid, h),
        pi: DMatrix::zeros(n3, nd),
        q: DMatrix::zeros(n3, nd),
        mass: mass_matrix(3, k, k, &ints),
        grad: gradient_gram(3, k, h, &ints),
        integrals: ints,
        faces,
        edges,
        vertices,
        volume: g.volume,
    };

    let mom0 = cp.moment_offset();
    let lifted_q: Vec<DMatrix<f64>> = (0..cp.faces.len()).map(|i| cp.lift(i, &cp.faces[i].proj.q)).collect();
    let mut rhs = DMatrix::zeros(n3, nd);
    for a in 1..n3 {
        let ma = Poly::monomial(3, k, a);
        if k >= 2 {
            let lap = ma.laplacian().with_degree(k - 2);
            for (b, coef) in lap.coeffs().iter().enumerate() {
                rhs[(a, mom0 + b)] -= cp.volume * coef / (h * h);
            }
        }
        for (cf, lq) in cp.faces.iter().zip(&lifted_q) {
            let mut dn = Poly::zero(3, k);
            for v in 0..3 {
                dn.add_assign_scaled(&ma.derivative(v).with_degree(k), cf.normal[v] / h);
            }
            let on_face = &cf.restriction * nalgebra::DVector::from_column_slice(dn.coeffs());
            let row = on_face.transpose() * &cf.proj.mass * lq;
            let mut r = rhs.row_mut(a);
            r += row;
        }
    }

    let mean_of_basis: Vec<f64> = if k == 1 {
        let surface: f64 = cp.faces.iter().map(|f| f.proj.area).sum();
        let mut acc = DMatrix::zeros(1, n3);
        for (cf, lq) in cp.faces.iter().zip(&lifted_q) {
            let n2 = basis_size(2, k);
            let fi = DMatrix::from_row_slice(1, n2, &cf.proj.integrals[..n2]);
            acc += &fi * &cf.restriction;
            let mut r = rhs.row_mut(0);
            r += &fi * lq / surface;
        }
        acc.iter().map(|v| v / surface).collect()
    } else {
        rhs[(0, mom0)] = 1.0;
        cp.integrals[..n3].iter().map(|v| v / cp.volume).collect()
    };

    let solver = GramSolver::new(&cp.grad.view((1, 1), (n3 - 1, n3 - 1)).into_owned())?;
    let upper = solver.solve(&rhs.rows(1, n3 - 1).into_owned());
    let mut pi = DMatrix::zeros(n3, nd);
    pi.rows_mut(1, n3 - 1).copy_from(&upper);
    for col in 0..nd {
        let s: f64 = (1..n3).map(|b| mean_of_basis[b] * upper[(b - 1, col)]).sum();
        pi[(0, col)] = (rhs[(0, col)] - s) / mean_of_basis[0];
    }
    cp.q = l2_correction(&pi, &cp.mass, low_size(3, k), mom0, cp.volume, cell_moment_dofs(k))?;
    cp.pi = pi;
    Ok(cp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_cube_grid, gen_perturbed_grid, gen_slit_cube_grid};

    fn meshes() -> Vec<PolyMesh> {
        vec![
            gen_cube_grid(1).unwrap(),
            gen_perturbed_grid(2, 0.2, 3).unwrap(),
            gen_slit_cube_grid(1, 0.1).unwrap(),
            gen_slit_cube_grid(2, 0.01).unwrap(),
        ]
    }

    #[test]
    fn reproduces_cell_monomials() {
        for m in meshes() {
            for k in 1..=3 {
                for c in 0..m.num_cells() {
                    let cp = cell_projectors(&m, c, k).unwrap();
                    let x = cp.dofs_of_monomials();
                    let n3 = basis_size(3, k);
                    for (name, p) in [("pi", &cp.pi), ("q", &cp.q)] {
                        let err = (p * &x - DMatrix::identity(n3, n3)).amax();
                        assert!(err < 1e-11, "{name} k={k} cell {c}: {err:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn pi_minus_q_lies_in_low_degree() {
        for m in meshes() {
            for k in 1..=3 {
                let cp = cell_projectors(&m, 0, k).unwrap();
                let d = &cp.pi - &cp.q;
                let low = low_size(3, k);
                let tail = d.rows(low, d.nrows() - low).amax();
                assert!(tail < 1e-12 * cp.pi.amax().max(1.0), "k={k}: {tail:e}");
            }
        }
    }

    #[test]
    fn k1_cube_gradient_is_face_flux() {
        let m = gen_cube_grid(1).unwrap();
        let cp = cell_projectors(&m, 0, 1).unwrap();
        let h = cp.diameter();
        for j in 0..8 {
            let mut oracle = Vector3::zeros();
            for cf in &cp.faces {
                let col = cf.map.iter().position(|&l| l == j);
                if let Some(col) = col {
                    let n2 = basis_size(2, 1);
                    let int: f64 = (0..n2).map(|a| cf.proj.integrals[a] * cf.proj.q[(a, col)]).sum();
                    oracle += cf.normal * int;
                }
            }
            oracle /= cp.volume;
            let grad = Vector3::new(cp.pi[(1, j)], cp.pi[(2, j)], cp.pi[(3, j)]) / h;
            assert!((grad - oracle).amax() < 1e-14, "vertex {j}");
        }
    }

    #[test]
    fn slit_cell_reproduces_z() {
        let m = gen_slit_cube_grid(1, 0.1).unwrap();
        let cp = cell_projectors(&m, 0, 1).unwrap();
        let z: Vec<f64> = cp.vertices.iter().map(|p| p.z).collect();
        let coeffs = &cp.pi * nalgebra::DVector::from_vec(z);
        for p in [Vector3::new(0.5, 0.5, 0.5), Vector3::new(0.9, 0.1, 0.2)] {
            let vals = cp.basis.eval_all(p.as_slice());
            let v: f64 = vals.iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum();
            assert!((v - p.z).abs() < 1e-12);
        }
    }

    #[test]
    fn k2_cube_interior_moment() {
        let m = gen_cube_grid(1).unwrap();
        let cp = cell_projectors(&m, 0, 2).unwrap();
        let mut v = DMatrix::zeros(cp.n_dofs(), 1);
        v[(cp.n_dofs() - 1, 0)] = 1.0;
        let q = &cp.q * v;
        let moment0: f64 = (0..q.nrows()).map(|a| cp.mass[(0, a)] * q[(a, 0)]).sum();
        assert!((moment0 - cp.volume).abs() < 1e-14);
    }
}
