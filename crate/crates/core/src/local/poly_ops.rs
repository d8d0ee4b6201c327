//! Gram matrices of scaled monomial bases and the one-dimensional edge
//! calculus shared by the face and cell projectors.
//!
//! On an edge `e` oriented from its lower to its higher global vertex the
//! parameter is `σ = (x - x_mid)·τ / |e| ∈ [-1/2, 1/2]`, and the edge moments
//! are `∫_{-1/2}^{1/2} v σ^j dσ` for `j < k - 1`.

use crate::error::{Result, VemError};
use crate::geometry::monomial::{basis_size, exponents, index_of};
use nalgebra::{DMatrix, Vector3};

/// `∫_{-1/2}^{1/2} σ^j dσ`.
pub fn unit_moment(j: usize) -> f64 {
    if j % 2 == 1 {
        0.0
    } else {
        0.5f64.powi(j as i32) / (j as f64 + 1.0)
    }
}

/// L² Gram matrix of degree-`deg_r` rows against degree-`deg_c` columns,
/// from monomial integrals of degree at least `deg_r + deg_c`.
pub fn mass_matrix(dim: usize, deg_r: usize, deg_c: usize, ints: &[f64]) -> DMatrix<f64> {
    let er = exponents(dim, deg_r);
    let ec = exponents(dim, deg_c);
    DMatrix::from_fn(er.len(), ec.len(), |i, j| {
        let e = [er[i][0] + ec[j][0], er[i][1] + ec[j][1], er[i][2] + ec[j][2]];
        ints[index_of(dim, e)]
    })
}

/// `(∇m_a, ∇m_b)` in physical units for scaled monomials with scale `h`.
pub fn gradient_gram(dim: usize, degree: usize, h: f64, ints: &[f64]) -> DMatrix<f64> {
    let ex = exponents(dim, degree);
    DMatrix::from_fn(ex.len(), ex.len(), |i, j| {
        let mut s = 0.0;
        for v in 0..dim {
            let (a, b) = (ex[i][v], ex[j][v]);
            if a == 0 || b == 0 {
                continue;
            }
            let mut e = [ex[i][0] + ex[j][0], ex[i][1] + ex[j][1], ex[i][2] + ex[j][2]];
            e[v] -= 2;
            s += (a * b) as f64 * ints[index_of(dim, e)];
        }
        s / (h * h)
    })
}

/// `M_e[p][q] = ∫_e σ^p σ^q ds` for `p, q ≤ k`.
pub fn edge_mass(k: usize, len: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k + 1, k + 1, |p, q| len * unit_moment(p + q))
}

/// Maps `[v(σ=-1/2), v(σ=1/2), moment_0, …, moment_{k-2}]` to the
/// coefficients of the unique `v ∈ P_k(e)` in powers of `σ`.
pub fn edge_reconstruction(k: usize) -> Result<DMatrix<f64>> {
    let n = k + 1;
    let mut v = DMatrix::zeros(n, n);
    for p in 0..n {
        v[(0, p)] = (-0.5f64).powi(p as i32);
        v[(1, p)] = 0.5f64.powi(p as i32);
        for j in 0..k.saturating_sub(1) {
            v[(2 + j, p)] = unit_moment(p + j);
        }
    }
    v.try_inverse().ok_or_else(|| {
        VemError::geometry("edge", "singular edge reconstruction system")
    })
}

/// Per-edge data of the parametrization in some scaled coordinate system.
#[derive(Clone, Debug)]
pub struct EdgeParam {
    pub len: f64,
    /// Scaled coordinates of the midpoint.
    pub mid: [f64; 3],
    /// d(scaled coordinates)/dσ.
    pub dir: [f64; 3],
}

impl EdgeParam {
    /// Parametrization in cell-scaled coordinates `(x - c)/h`.
    pub fn in_cell(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, h: f64) -> Self {
        let mid = ((a + b) * 0.5 - c) / h;
        let d = (b - a) / h;
        EdgeParam {
            len: (b - a).norm(),
            mid: [mid.x, mid.y, mid.z],
            dir: [d.x, d.y, d.z],
        }
    }

    /// Matrix taking degree-`degree` coefficients in `dim` scaled variables
    /// to σ-coefficients of the restriction.
    pub fn restriction(&self, dim: usize, degree: usize) -> DMatrix<f64> {
        let linear: Vec<[f64; 3]> = (0..dim).map(|i| [self.dir[i], 0.0, 0.0]).collect();
        crate::geometry::monomial::substitution_matrix(dim, 1, degree, &self.mid[..dim], &linear)
    }
}

/// Row vector `r` with `r·c = ∫_e p g ds` for σ-coefficients `c` of `p` of
/// degree `k`, given σ-coefficients of `g`.
pub fn edge_pairing(k: usize, len: f64, g: &[f64]) -> Vec<f64> {
    (0..=k)
        .map(|p| len * g.iter().enumerate().map(|(q, gq)| gq * unit_moment(p + q)).sum::<f64>())
        .collect()
}

/// Number of scaled monomials in `dim` variables of degree at most `k - 2`.
pub fn low_size(dim: usize, k: usize) -> usize {
    if k < 2 {
        0
    } else {
        basis_size(dim, k - 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_moments() {
        assert_eq!(unit_moment(0), 1.0);
        assert_eq!(unit_moment(1), 0.0);
        assert!((unit_moment(2) - 1.0 / 12.0).abs() < 1e-16);
        assert!((unit_moment(4) - 1.0 / 80.0).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn reconstruction_recovers_polynomials(k in 1usize..5, c in prop::collection::vec(-2.0f64..2.0, 5)) {
            let coeffs = &c[..=k];
            let eval = |s: f64| coeffs.iter().enumerate().map(|(p, a)| a * s.powi(p as i32)).sum::<f64>();
            let mut dofs = vec![eval(-0.5), eval(0.5)];
            for j in 0..k - 1 {
                dofs.push(coeffs.iter().enumerate().map(|(p, a)| a * unit_moment(p + j)).sum());
            }
            let r = edge_reconstruction(k).unwrap();
            let back = r * nalgebra::DVector::from_vec(dofs);
            for p in 0..=k {
                prop_assert!((back[p] - coeffs[p]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_gram_on_unit_square() {
        // square [-1/2,1/2]² with h = 1: (∇x, ∇x) = 1, (∇(x²), ∇(x²)) = 4∫x² = 1/3
        let ints = crate::geometry::polygon::polygon_monomial_integrals_2d(
            &[[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]],
            4,
        );
        let g = gradient_gram(2, 2, 1.0, &ints);
        assert!((g[(1, 1)] - 1.0).abs() < 1e-14);
        assert!((g[(3, 3)] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(g[(0, 0)], 0.0);
        let m = mass_matrix(2, 1, 1, &ints);
        assert!((m[(1, 1)] - 1.0 / 12.0).abs() < 1e-14);
    }
}
