//! Exact integration of scaled monomials over polygons and polyhedra, Gauss
//! rules for general integrands, and star-shape metrics.

pub mod chunkiness;
pub mod gram;
pub mod monomial;
pub mod polygon;
pub mod polyhedron;
pub mod quadrature;

pub use chunkiness::{chebyshev_radius, ChebyshevBall, Chunkiness, HalfSpace};
pub use gram::{GramMethod, GramSolver};
pub use monomial::{basis_size, exponents, Poly, ScaledMonomialBasis};
pub use polygon::{integrate_monomial_polygon, FaceFrame, PolygonGeometry};
pub use polyhedron::{
    face_restriction, integrate_monomial_polyhedron, polyhedron_monomial_integrals,
    OrientedFace, PolyhedronGeometry,
};
pub use quadrature::{polygon_quadrature, polyhedron_quadrature, segment_rule, QuadRule};

use nalgebra::Vector3;

/// Size and shape summary of a face or cell.
#[derive(Clone, Copy, Debug)]
pub struct GeomMetrics {
    pub diameter: f64,
    /// Area for faces, volume for cells.
    pub measure: f64,
    pub centroid: Vector3<f64>,
    pub chunkiness: Chunkiness,
}

impl GeomMetrics {
    pub fn rho(&self) -> f64 {
        self.chunkiness.rho
    }

    /// Face weight `ε_F = c_ε ρ_F` of the boundary stabilization.
    pub fn eps_weight(&self, c_eps: f64) -> f64 {
        c_eps * self.chunkiness.rho
    }
}

impl From<&PolygonGeometry> for GeomMetrics {
    fn from(f: &PolygonGeometry) -> Self {
        GeomMetrics {
            diameter: f.diameter,
            measure: f.area,
            centroid: f.centroid(),
            chunkiness: f.chunkiness,
        }
    }
}

impl From<&PolyhedronGeometry> for GeomMetrics {
    fn from(c: &PolyhedronGeometry) -> Self {
        GeomMetrics {
            diameter: c.diameter,
            measure: c.volume,
            centroid: c.centroid,
            chunkiness: c.chunkiness,
        }
    }
}
