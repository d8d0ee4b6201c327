//! Polyhedra bounded by planar faces: volume, centroid, exact monomial
//! integrals by reduction to face integrals.

use super::chunkiness::{chebyshev_radius, Chunkiness, HalfSpace};
use super::monomial::{exponents, substitution_matrix};
use super::polygon::{point_set_diameter, PolygonGeometry};
use crate::error::{Result, VemError};
use nalgebra::{DMatrix, Vector3};

/// A face of a polyhedron together with its orientation (+1 when the stored
/// face normal points out of the polyhedron).
#[derive(Clone, Copy)]
pub struct OrientedFace<'a> {
    pub face: &'a PolygonGeometry,
    pub sign: f64,
}

impl OrientedFace<'_> {
    pub fn outward_normal(&self) -> Vector3<f64> {
        self.face.frame.normal * self.sign
    }
}

#[derive(Clone, Debug)]
pub struct PolyhedronGeometry {
    pub volume: f64,
    pub centroid: Vector3<f64>,
    pub diameter: f64,
    pub surface_area: f64,
    pub chunkiness: Chunkiness,
}

impl PolyhedronGeometry {
    pub fn new(faces: &[OrientedFace<'_>], vertices: &[Vector3<f64>]) -> Result<Self> {
        if faces.len() < 4 {
            return Err(VemError::geometry("polyhedron", format!("{} faces", faces.len())));
        }
        let surface_area: f64 = faces.iter().map(|f| f.face.area).sum();
        let flux: Vector3<f64> = faces
            .iter()
            .map(|f| f.outward_normal() * f.face.area)
            .sum();
        if flux.norm() > 1e-12 * surface_area {
            return Err(VemError::geometry(
                "polyhedron",
                format!("boundary is not closed (net flux {:.3e})", flux.norm()),
            ));
        }
        let reference: Vector3<f64> =
            vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
        let mut volume = 0.0;
        let mut first = Vector3::zeros();
        for f in faces {
            let cf = f.face.centroid() - reference;
            let h = cf.dot(&f.outward_normal());
            volume += h * f.face.area / 3.0;
            first += cf * (h * f.face.area / 4.0);
        }
        if volume <= 0.0 {
            return Err(VemError::geometry(
                "polyhedron",
                format!("non-positive volume {volume:.3e}; faces oriented inward"),
            ));
        }
        let centroid = reference + first / volume;
        let diameter = point_set_diameter(vertices);
        let constraints: Vec<HalfSpace<3>> = faces
            .iter()
            .map(|f| {
                let n = f.outward_normal();
                HalfSpace {
                    normal: [n.x, n.y, n.z],
                    offset: n.dot(&f.face.centroid()),
                }
            })
            .collect();
        let chunkiness = chebyshev_radius(&constraints, diameter).into_chunkiness(diameter);
        Ok(PolyhedronGeometry {
            volume,
            centroid,
            diameter,
            surface_area,
            chunkiness,
        })
    }
}

/// Linear map taking coefficients of a cell scaled-monomial polynomial of
/// degree `<= degree` to the coefficients of its restriction to `face` in the
/// face scaled-monomial basis.
pub fn face_restriction(
    centroid: &Vector3<f64>,
    diameter: f64,
    face: &PolygonGeometry,
    degree: usize,
) -> DMatrix<f64> {
    let fr = &face.frame;
    let ratio = face.diameter / diameter;
    let off = (fr.origin - centroid) / diameter;
    let linear = [
        [ratio * fr.axis1.x, ratio * fr.axis2.x, 0.0],
        [ratio * fr.axis1.y, ratio * fr.axis2.y, 0.0],
        [ratio * fr.axis1.z, ratio * fr.axis2.z, 0.0],
    ];
    substitution_matrix(3, 2, degree, &[off.x, off.y, off.z], &linear)
}

/// `∫_K m_α dV` for every cell scaled monomial of degree `<= degree`, using
/// `∫_K g = (1/(d+3)) Σ_F ((x_F - c)·n_F) ∫_F g` for `g` homogeneous of
/// degree `d` about the centroid `c`.
pub fn polyhedron_monomial_integrals(
    faces: &[OrientedFace<'_>],
    centroid: &Vector3<f64>,
    diameter: f64,
    degree: usize,
) -> Vec<f64> {
    let exps = exponents(3, degree);
    let mut out = vec![0.0; exps.len()];
    for f in faces {
        let h = (f.face.centroid() - centroid).dot(&f.outward_normal());
        if h == 0.0 {
            continue;
        }
        let r = face_restriction(centroid, diameter, f.face, degree);
        let fm = f.face.monomial_integrals(degree);
        let face_ints = r.transpose() * nalgebra::DVector::from_column_slice(&fm);
        for (k, e) in exps.iter().enumerate() {
            let d = (e[0] + e[1] + e[2]) as f64;
            out[k] += h * face_ints[k] / (d + 3.0);
        }
    }
    out
}

/// Exact `∫_K m_α dV` of a single cell scaled monomial.
pub fn integrate_monomial_polyhedron(
    faces: &[OrientedFace<'_>],
    cell: &PolyhedronGeometry,
    alpha: [u32; 3],
) -> f64 {
    let d = (alpha[0] + alpha[1] + alpha[2]) as usize;
    let idx = super::monomial::index_of(3, alpha);
    polyhedron_monomial_integrals(faces, &cell.centroid, cell.diameter, d)[idx]
}
