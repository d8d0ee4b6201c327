//! Gauss rules on segments, fan-triangulated polygons and fan-tetrahedralized
//! polyhedra. Simplex rules are collapsed tensor Gauss–Legendre products,
//! exact for polynomials up to the requested order.

use super::polygon::PolygonGeometry;
use super::polyhedron::OrientedFace;
use crate::error::{Result, VemError};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

pub type QuadRule = Vec<(Vector3<f64>, f64)>;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

fn points_for(order: usize, extra: usize) -> usize {
    (order + extra + 1).div_ceil(2).max(1)
}

/// Rule on the segment `a → b`, weights in length units.
pub fn segment_rule(a: &Vector3<f64>, b: &Vector3<f64>, order: usize) -> QuadRule {
    let (x, w) = gauss_legendre(points_for(order, 0));
    let len = (b - a).norm();
    x.iter()
        .zip(&w)
        .map(|(t, wt)| (a + (b - a) * *t, wt * len))
        .collect()
}

/// Rule on `[-1/2, 1/2]` in an edge parameter (weights sum to one).
pub fn centered_unit_rule(order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(points_for(order, 0));
    x.into_iter().zip(w).map(|(t, wt)| (t - 0.5, wt)).collect()
}

struct TriangleRef {
    pts: Vec<(f64, f64, f64)>,
}

impl TriangleRef {
    fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(points_for(order, 1));
        let mut pts = Vec::with_capacity(x.len() * x.len());
        for (u, wu) in x.iter().zip(&w) {
            for (v, wv) in x.iter().zip(&w) {
                pts.push((*u, v * (1.0 - u), wu * wv * (1.0 - u)));
            }
        }
        TriangleRef { pts }
    }

    /// `scale` is twice the (possibly signed) triangle area.
    fn push(&self, out: &mut QuadRule, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, scale: f64) {
        let (e1, e2) = (b - a, c - a);
        for &(s, t, w) in &self.pts {
            out.push((a + e1 * s + e2 * t, w * scale));
        }
    }
}

struct TetRef {
    pts: Vec<(f64, f64, f64, f64)>,
}

impl TetRef {
    fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(points_for(order, 2));
        let mut pts = Vec::with_capacity(x.len().pow(3));
        for (u, wu) in x.iter().zip(&w) {
            for (v, wv) in x.iter().zip(&w) {
                for (s, ws) in x.iter().zip(&w) {
                    let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                    pts.push((*u, v * (1.0 - u), s * (1.0 - u) * (1.0 - v), wu * wv * ws * jac));
                }
            }
        }
        TetRef { pts }
    }
}

/// Fan triangulation of a face from its centroid. Errors when a fan
/// triangle has non-positive area (face not star-shaped about its centroid).
pub fn polygon_quadrature(face: &PolygonGeometry, order: usize) -> Result<QuadRule> {
    let rule = TriangleRef::new(order);
    let c = face.centroid();
    let n = face.num_vertices();
    let mut out = Vec::with_capacity(rule.pts.len() * n);
    for i in 0..n {
        let a = &face.vertices[i];
        let b = &face.vertices[(i + 1) % n];
        let twice_area = (a - c).cross(&(b - c)).dot(&face.frame.normal);
        if twice_area <= 1e-14 * face.diameter * face.diameter {
            return Err(VemError::geometry(
                "polygon fan",
                format!("triangle {i} has non-positive area {:.3e}", 0.5 * twice_area),
            ));
        }
        rule.push(&mut out, &c, a, b, twice_area);
    }
    Ok(out)
}

/// Fan tetrahedralization through `centroid`: every face is fanned from its
/// own centroid and each triangle is joined to the cell centroid.
pub fn polyhedron_quadrature(
    faces: &[OrientedFace<'_>],
    centroid: &Vector3<f64>,
    diameter: f64,
    order: usize,
) -> Result<QuadRule> {
    let rule = TetRef::new(order);
    let mut out = Vec::new();
    for (fi, f) in faces.iter().enumerate() {
        let cf = f.face.centroid();
        let n = f.face.num_vertices();
        for i in 0..n {
            let (mut a, mut b) = (f.face.vertices[i], f.face.vertices[(i + 1) % n]);
            if f.sign < 0.0 {
                std::mem::swap(&mut a, &mut b);
            }
            let e1 = cf - centroid;
            let e2 = a - centroid;
            let e3 = b - centroid;
            let det = Matrix3::from_columns(&[e1, e2, e3]).determinant();
            if det <= 1e-14 * diameter.powi(3) {
                return Err(VemError::geometry(
                    "polyhedron fan",
                    format!("tetrahedron on face {fi}, edge {i} has non-positive volume"),
                ));
            }
            for &(s, t, r, w) in &rule.pts {
                out.push((centroid + e1 * s + e2 * t + e3 * r, w * det));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polyhedron::tests::unit_cube_faces;

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn cube_rules() {
        let (faces, signs, _) = unit_cube_faces();
        let of: Vec<OrientedFace> = faces
            .iter()
            .zip(&signs)
            .map(|(f, &s)| OrientedFace { face: f, sign: s })
            .collect();
        let c = Vector3::new(0.5, 0.5, 0.5);
        let q1 = polyhedron_quadrature(&of, &c, 3f64.sqrt(), 1).unwrap();
        let vol: f64 = q1.iter().map(|(_, w)| w).sum();
        assert!((vol - 1.0).abs() < 1e-14);
        let q3 = polyhedron_quadrature(&of, &c, 3f64.sqrt(), 3).unwrap();
        let val: f64 = q3.iter().map(|(p, w)| w * p.x * p.x * p.y).sum();
        assert!((val - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn square_rule() {
        let (faces, _, _) = unit_cube_faces();
        let q = polygon_quadrature(&faces[1], 4).unwrap();
        let val: f64 = q.iter().map(|(p, w)| w * p.x.powi(2) * p.y.powi(2)).sum();
        assert!((val - 1.0 / 9.0).abs() < 1e-14);
    }
}
