//! Planar polygons embedded in 3D: local frames, exact monomial integrals.

use super::chunkiness::{chebyshev_radius, Chunkiness, HalfSpace};
use super::monomial::{basis_size, exponents};
use crate::error::{Result, VemError};
use nalgebra::Vector3;

/// Planarity tolerance relative to the face diameter.
pub const PLANARITY_TOL: f64 = 1e-10;

/// Orthonormal frame of a planar face; `origin` is the face centroid.
#[derive(Clone, Debug)]
pub struct FaceFrame {
    pub origin: Vector3<f64>,
    pub axis1: Vector3<f64>,
    pub axis2: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Largest distance of a vertex from the fitted plane.
    pub planarity_residual: f64,
}

impl FaceFrame {
    /// In-plane coordinates of `x` relative to the origin (length units).
    pub fn local(&self, x: &Vector3<f64>) -> [f64; 2] {
        let d = x - self.origin;
        [d.dot(&self.axis1), d.dot(&self.axis2)]
    }

    pub fn point(&self, xi: f64, eta: f64) -> Vector3<f64> {
        self.origin + self.axis1 * xi + self.axis2 * eta
    }
}

/// A validated planar simple polygon with the geometric data VEM needs.
#[derive(Clone, Debug)]
pub struct PolygonGeometry {
    pub vertices: Vec<Vector3<f64>>,
    pub frame: FaceFrame,
    /// Vertex coordinates in the face frame, relative to the centroid.
    pub local: Vec<[f64; 2]>,
    pub area: f64,
    pub perimeter: f64,
    pub diameter: f64,
    pub chunkiness: Chunkiness,
}

fn newell_normal(verts: &[Vector3<f64>]) -> Vector3<f64> {
    let mut n = Vector3::zeros();
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

pub fn point_set_diameter(verts: &[Vector3<f64>]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            h = h.max((verts[i] - verts[j]).norm());
        }
    }
    h
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2], tol: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on_segment = |a: [f64; 2], b: [f64; 2], p: [f64; 2], d: f64| {
        d.abs() <= tol
            && p[0] >= a[0].min(b[0]) - tol.sqrt()
            && p[0] <= a[0].max(b[0]) + tol.sqrt()
            && p[1] >= a[1].min(b[1]) - tol.sqrt()
            && p[1] <= a[1].max(b[1]) + tol.sqrt()
    };
    on_segment(q1, q2, p1, d1)
        || on_segment(q1, q2, p2, d2)
        || on_segment(p1, p2, q1, d3)
        || on_segment(p1, p2, q2, d4)
}

/// Closed-form `∫_0^1 (x0 + t dx)^a (y0 + t dy)^b dt` by binomial expansion.
fn segment_monomial_integral(x0: f64, dx: f64, y0: f64, dy: f64, a: u32, b: u32) -> f64 {
    let binom = |n: u32, k: u32| -> f64 {
        let mut r = 1.0;
        for i in 0..k {
            r = r * (n - i) as f64 / (i + 1) as f64;
        }
        r
    };
    let mut sum = 0.0;
    for i in 0..=a {
        let ci = binom(a, i) * x0.powi((a - i) as i32) * dx.powi(i as i32);
        if ci == 0.0 {
            continue;
        }
        for j in 0..=b {
            let cj = binom(b, j) * y0.powi((b - j) as i32) * dy.powi(j as i32);
            sum += ci * cj / (i + j + 1) as f64;
        }
    }
    sum
}

/// `∫_P x^a y^b dA` for every monomial of degree `<= degree` over the polygon
/// with counter-clockwise vertices `verts`. Uses the homogeneous divergence
/// identity `∫_P g = (1/(d+2)) Σ_e (x·n_e) ∫_e g` and exact edge integrals.
pub fn polygon_monomial_integrals_2d(verts: &[[f64; 2]], degree: usize) -> Vec<f64> {
    let exps = exponents(2, degree);
    let mut out = vec![0.0; exps.len()];
    for i in 0..verts.len() {
        let p0 = verts[i];
        let p1 = verts[(i + 1) % verts.len()];
        let (dx, dy) = (p1[0] - p0[0], p1[1] - p0[1]);
        // (x·n) |e| with n the outward unit normal
        let flux = dy * p0[0] - dx * p0[1];
        if flux == 0.0 {
            continue;
        }
        for (k, e) in exps.iter().enumerate() {
            let d = (e[0] + e[1]) as f64;
            out[k] += flux * segment_monomial_integral(p0[0], dx, p0[1], dy, e[0], e[1]) / (d + 2.0);
        }
    }
    out
}

impl PolygonGeometry {
    pub fn new(vertices: Vec<Vector3<f64>>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(VemError::geometry("polygon", format!("{n} vertices")));
        }
        let diameter = point_set_diameter(&vertices);
        if diameter <= 0.0 {
            return Err(VemError::geometry("polygon", "zero diameter"));
        }
        for i in 0..n {
            if (vertices[(i + 1) % n] - vertices[i]).norm() <= 1e-14 * diameter {
                return Err(VemError::geometry("polygon", format!("degenerate edge at vertex {i}")));
            }
        }
        let nn = newell_normal(&vertices);
        let twice_area = nn.norm();
        if twice_area <= 1e-14 * diameter * diameter {
            return Err(VemError::geometry("polygon", "zero area"));
        }
        let normal = nn / twice_area;
        let first = (vertices[1] - vertices[0]).normalize();
        let mut axis1 = first - normal * first.dot(&normal);
        if axis1.norm() < 1e-8 {
            // first edge nearly along the normal; only possible for a badly non-planar loop
            return Err(VemError::geometry("polygon", "first edge is not in the face plane"));
        }
        axis1.normalize_mut();
        let axis2 = normal.cross(&axis1);

        // shoelace about the first vertex to locate the centroid
        let base = vertices[0];
        let loc0: Vec<[f64; 2]> = vertices
            .iter()
            .map(|v| {
                let d = v - base;
                [d.dot(&axis1), d.dot(&axis2)]
            })
            .collect();
        let m = polygon_monomial_integrals_2d(&loc0, 1);
        let area = m[0];
        if area <= 0.0 {
            return Err(VemError::geometry("polygon", "non-positive signed area"));
        }
        let (cx, cy) = (m[1] / area, m[2] / area);
        let mut origin = base + axis1 * cx + axis2 * cy;
        // put the origin in the plane of best fit (mean offset along the normal)
        let mean_off: f64 =
            vertices.iter().map(|v| (v - origin).dot(&normal)).sum::<f64>() / n as f64;
        origin += normal * mean_off;
        let planarity_residual = vertices
            .iter()
            .map(|v| (v - origin).dot(&normal).abs())
            .fold(0.0, f64::max);
        if planarity_residual > PLANARITY_TOL * diameter {
            return Err(VemError::geometry(
                "polygon",
                format!("non-planar face, residual {planarity_residual:.3e}"),
            ));
        }
        let frame = FaceFrame {
            origin,
            axis1,
            axis2,
            normal,
            planarity_residual,
        };
        let local: Vec<[f64; 2]> = vertices.iter().map(|v| frame.local(v)).collect();

        let tol = 1e-12 * diameter * diameter;
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_intersect(local[i], local[(i + 1) % n], local[j], local[(j + 1) % n], tol) {
                    return Err(VemError::geometry(
                        "polygon",
                        format!("self-intersection between edges {i} and {j}"),
                    ));
                }
            }
        }

        let perimeter = (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).sum();
        let constraints: Vec<HalfSpace<2>> = (0..n)
            .map(|i| {
                let p = local[i];
                let q = local[(i + 1) % n];
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                let l = (dx * dx + dy * dy).sqrt();
                let nrm = [dy / l, -dx / l];
                HalfSpace {
                    normal: nrm,
                    offset: nrm[0] * p[0] + nrm[1] * p[1],
                }
            })
            .collect();
        let chunkiness = chebyshev_radius(&constraints, diameter).into_chunkiness(diameter);

        Ok(PolygonGeometry {
            vertices,
            frame,
            local,
            area,
            perimeter,
            diameter,
            chunkiness,
        })
    }

    pub fn centroid(&self) -> Vector3<f64> {
        self.frame.origin
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// `∫_F m_β dA` for the face scaled monomials `m_β = (ξ/h_F)^β1 (η/h_F)^β2`.
    pub fn monomial_integrals(&self, degree: usize) -> Vec<f64> {
        let h = self.diameter;
        let scaled: Vec<[f64; 2]> = self.local.iter().map(|p| [p[0] / h, p[1] / h]).collect();
        let mut m = polygon_monomial_integrals_2d(&scaled, degree);
        m.iter_mut().for_each(|v| *v *= h * h);
        debug_assert_eq!(m.len(), basis_size(2, degree));
        m
    }

    /// Scaled face coordinates `(ξ/h_F, η/h_F)` of a point.
    pub fn scaled(&self, x: &Vector3<f64>) -> [f64; 2] {
        let l = self.frame.local(x);
        [l[0] / self.diameter, l[1] / self.diameter]
    }

    /// Outward in-plane unit normal of edge `i` (from vertex `i` to `i + 1`),
    /// in face-frame coordinates.
    pub fn edge_normal_2d(&self, i: usize) -> [f64; 2] {
        let p = self.local[i];
        let q = self.local[(i + 1) % self.local.len()];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let l = (dx * dx + dy * dy).sqrt();
        [dy / l, -dx / l]
    }
}

/// Exact `∫_F m_α dA` of a single face scaled monomial.
pub fn integrate_monomial_polygon(face: &PolygonGeometry, alpha: [u32; 2]) -> f64 {
    let d = (alpha[0] + alpha[1]) as usize;
    let idx = super::monomial::index_of(2, [alpha[0], alpha[1], 0]);
    face.monomial_integrals(d)[idx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> PolygonGeometry {
        PolygonGeometry::new(vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn unit_square_integrals() {
        let sq = unit_square();
        assert_relative_eq!(sq.area, 1.0, epsilon = 1e-15);
        assert_relative_eq!(sq.diameter, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(integrate_monomial_polygon(&sq, [0, 0]), 1.0, epsilon = 1e-15);
        assert!(integrate_monomial_polygon(&sq, [1, 0]).abs() < 1e-15);
        assert_relative_eq!(integrate_monomial_polygon(&sq, [2, 0]), 1.0 / 24.0, epsilon = 1e-15);
        assert_relative_eq!(sq.centroid(), Vector3::new(0.5, 0.5, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn unit_square_chunkiness() {
        let sq = unit_square();
        assert_relative_eq!(sq.chunkiness.rho, 0.5 / 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn thin_strip_chunkiness() {
        for eps in [0.1, 0.01, 0.001] {
            let f = PolygonGeometry::new(vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(1.0, eps, 0.0),
                Vector3::new(0.0, eps, 0.0),
            ])
            .unwrap();
            let expected = (eps / 2.0) / (1.0 + eps * eps).sqrt();
            assert_relative_eq!(f.chunkiness.rho, expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_bowtie() {
        let e = PolygonGeometry::new(vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ]);
        assert!(matches!(e, Err(VemError::InvalidGeometry { .. })));
    }

    #[test]
    fn rejects_non_planar() {
        let e = PolygonGeometry::new(vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 1e-3),
            Vector3::new(0.0, 1.0, 0.0),
        ]);
        assert!(matches!(e, Err(VemError::InvalidGeometry { .. })));
    }

    #[test]
    fn frame_is_orthonormal() {
        let f = PolygonGeometry::new(vec![
            Vector3::new(0.1, 0.0, 0.3),
            Vector3::new(1.0, 0.2, 0.0),
            Vector3::new(0.7, 1.0, 0.5),
        ])
        .unwrap();
        let fr = &f.frame;
        assert!(fr.axis1.dot(&fr.axis2).abs() < 1e-14);
        assert!((fr.axis1.norm() - 1.0).abs() < 1e-14);
        assert!((fr.normal - fr.axis1.cross(&fr.axis2)).norm() < 1e-14);
    }
}
