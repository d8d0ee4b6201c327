//! Face projectors Π_F (gradient-orthogonal) and Q_F (L²-orthogonal) acting
//! on the face-local DOF vector.

use super::dofs::{edge_dofs, face_dof_count, face_moment_dofs};
use super::poly_ops::{
    edge_pairing, edge_reconstruction, gradient_gram, low_size, mass_matrix, unit_moment, EdgeParam,
};
use crate::error::Result;
use crate::geometry::monomial::{basis_size, Poly};
use crate::geometry::{GramSolver, PolygonGeometry};
use nalgebra::DMatrix;

/// Edge of a face loop seen from the face.
#[derive(Clone, Debug)]
pub struct FaceEdge {
    /// Parametrization in face-scaled coordinates (global edge orientation).
    pub param: EdgeParam,
    /// Outward in-plane normal in face-frame coordinates.
    pub normal: [f64; 2],
    /// `(k+1) × N_F`: face DOFs to σ-coefficients of the edge trace.
    pub trace: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct FaceProjector {
    pub k: usize,
    pub pi: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// `(m_a, m_b)_F` for `|a|, |b| ≤ k`.
    pub mass: DMatrix<f64>,
    /// `∫_F m_a` up to degree `2k`.
    pub integrals: Vec<f64>,
    pub edges: Vec<FaceEdge>,
    pub area: f64,
    pub diameter: f64,
}

/// `forward[i]` tells whether loop edge `i` (vertex `i` to `i+1`) runs along
/// the global edge orientation.
pub fn face_projector(geom: &PolygonGeometry, forward: &[bool], k: usize) -> Result<FaceProjector> {
    let nv = geom.num_vertices();
    let nd = face_dof_count(nv, k);
    let n2 = basis_size(2, k);
    let ne = edge_dofs(k);
    let nm = face_moment_dofs(k);
    let mom0 = nv * (1 + ne);
    let h = geom.diameter;
    let area = geom.area;
    let ints = geom.monomial_integrals(2 * k);
    let rec = edge_reconstruction(k)?;

    let mut edges = Vec::with_capacity(nv);
    for i in 0..nv {
        let j = (i + 1) % nv;
        let (a, b) = if forward[i] { (i, j) } else { (j, i) };
        let (pa, pb) = (geom.local[a], geom.local[b]);
        let param = EdgeParam {
            len: (geom.vertices[b] - geom.vertices[a]).norm(),
            mid: [0.5 * (pa[0] + pb[0]) / h, 0.5 * (pa[1] + pb[1]) / h, 0.0],
            dir: [(pb[0] - pa[0]) / h, (pb[1] - pa[1]) / h, 0.0],
        };
        let mut gather = DMatrix::zeros(k + 1, nd);
        gather[(0, a)] = 1.0;
        gather[(1, b)] = 1.0;
        for m in 0..ne {
            gather[(2 + m, nv + i * ne + m)] = 1.0;
        }
        edges.push(FaceEdge {
            param,
            normal: geom.edge_normal_2d(i),
            trace: &rec * gather,
        });
    }

    let mut rhs = DMatrix::zeros(n2, nd);
    for a in 1..n2 {
        let ma = Poly::monomial(2, k, a);
        if k >= 2 {
            let lap = ma.laplacian().with_degree(k - 2);
            for (b, c) in lap.coeffs().iter().enumerate() {
                rhs[(a, mom0 + b)] -= area * c / (h * h);
            }
        }
        for e in &edges {
            let mut g = ma.derivative(0);
            g.scale(e.normal[0] / h);
            let mut gy = ma.derivative(1);
            gy.scale(e.normal[1] / h);
            g.add_assign_scaled(&gy, 1.0);
            let linear = [[e.param.dir[0], 0.0, 0.0], [e.param.dir[1], 0.0, 0.0]];
            let gs = g.substitute_affine(1, &e.param.mid[..2], &linear);
            let pairing = edge_pairing(k, e.param.len, gs.coeffs());
            let row = DMatrix::from_row_slice(1, k + 1, &pairing) * &e.trace;
            for col in 0..nd {
                rhs[(a, col)] += row[(0, col)];
            }
        }
    }

    // constant fixed by the boundary mean (k = 1) or the face mean (k ≥ 2)
    let mean_of_basis: Vec<f64> = if k == 1 {
        let mut acc = vec![0.0; n2];
        for e in &edges {
            let r = e.param.restriction(2, k);
            for b in 0..n2 {
                acc[b] += e.param.len * (0..=k).map(|p| r[(p, b)] * unit_moment(p)).sum::<f64>();
            }
            let avg: Vec<f64> = (0..=k).map(|p| e.param.len * unit_moment(p)).collect();
            let row = DMatrix::from_row_slice(1, k + 1, &avg) * &e.trace;
            for col in 0..nd {
                rhs[(0, col)] += row[(0, col)] / geom.perimeter;
            }
        }
        acc.iter().map(|v| v / geom.perimeter).collect()
    } else {
        rhs[(0, mom0)] = 1.0;
        ints[..n2].iter().map(|v| v / area).collect()
    };

    let grad = gradient_gram(2, k, h, &ints);
    let solver = GramSolver::new(&grad.view((1, 1), (n2 - 1, n2 - 1)).into_owned())?;
    let upper = solver.solve(&rhs.rows(1, n2 - 1).into_owned());
    let mut pi = DMatrix::zeros(n2, nd);
    pi.rows_mut(1, n2 - 1).copy_from(&upper);
    for col in 0..nd {
        let s: f64 = (1..n2).map(|b| mean_of_basis[b] * upper[(b - 1, col)]).sum();
        pi[(0, col)] = (rhs[(0, col)] - s) / mean_of_basis[0];
    }

    let mass = mass_matrix(2, k, k, &ints);
    let q = l2_correction(&pi, &mass, low_size(2, k), mom0, area, nm)?;
    Ok(FaceProjector {
        k,
        pi,
        q,
        mass,
        integrals: ints,
        edges,
        area,
        diameter: h,
    })
}

/// `Q = Π + w`, `w ∈ P_{k-2}` with `(w, m_b) = measure·moment_b - (Π v, m_b)`.
pub(crate) fn l2_correction(
    pi: &DMatrix<f64>,
    mass: &DMatrix<f64>,
    nlow: usize,
    mom0: usize,
    measure: f64,
    nm: usize,
) -> Result<DMatrix<f64>> {
    let mut q = pi.clone();
    if nlow == 0 {
        return Ok(q);
    }
    debug_assert_eq!(nlow, nm);
    let mut rhs = -(mass.rows(0, nlow) * pi);
    for b in 0..nlow {
        rhs[(b, mom0 + b)] += measure;
    }
    let solver = GramSolver::new(&mass.view((0, 0), (nlow, nlow)).into_owned())?;
    let w = solver.solve(&rhs);
    let mut top = q.rows_mut(0, nlow);
    top += w;
    Ok(q)
}

impl FaceProjector {
    /// Face DOFs (`N_F × dim P_k(F)`) of every face scaled monomial.
    pub fn dofs_of_monomials(&self, geom: &PolygonGeometry) -> DMatrix<f64> {
        let k = self.k;
        let nv = geom.num_vertices();
        let n2 = basis_size(2, k);
        let ne = edge_dofs(k);
        let mut x = DMatrix::zeros(face_dof_count(nv, k), n2);
        for (i, p) in geom.local.iter().enumerate() {
            let vals = crate::geometry::monomial::eval_monomials(
                2,
                k,
                &[p[0] / self.diameter, p[1] / self.diameter, 0.0],
            );
            for b in 0..n2 {
                x[(i, b)] = vals[b];
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let r = e.param.restriction(2, k);
            for m in 0..ne {
                for b in 0..n2 {
                    x[(nv + i * ne + m, b)] = (0..=k).map(|p| r[(p, b)] * unit_moment(p + m)).sum();
                }
            }
        }
        let mom0 = nv * (1 + ne);
        for m in 0..low_size(2, k) {
            for b in 0..n2 {
                x[(mom0 + m, b)] = self.mass[(m, b)] / self.area;
            }
        }
        x
    }
}
