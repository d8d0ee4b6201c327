//! Chunkiness of star-shaped polygons and polyhedra.
//!
//! A simple polytope `D` is star-shaped with respect to a ball `B` exactly
//! when `B` lies in the kernel of `D`, the intersection of the inner
//! half-spaces of all its edges (2D) or faces (3D). The largest such ball is
//! the Chebyshev ball of the kernel, found from the linear program
//! `max r  s.t.  n_i·x + r <= b_i`. The LP is tiny (at most a few dozen
//! constraints in 3 or 4 unknowns), so it is solved by enumerating the
//! vertices of its feasible set.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

/// Inner half-space `normal · x <= offset` with a unit normal.
#[derive(Clone, Copy, Debug)]
pub struct HalfSpace<const D: usize> {
    pub normal: [f64; D],
    pub offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chunkiness {
    /// `r* / h_D`, zero when the kernel is empty.
    pub rho: f64,
    pub star_shaped: bool,
}

#[derive(Clone, Debug)]
pub struct ChebyshevBall<const D: usize> {
    pub center: [f64; D],
    pub radius: f64,
}

impl<const D: usize> ChebyshevBall<D> {
    pub fn into_chunkiness(self, diameter: f64) -> Chunkiness {
        if self.radius > 0.0 {
            Chunkiness {
                rho: self.radius / diameter,
                star_shaped: true,
            }
        } else {
            Chunkiness {
                rho: 0.0,
                star_shaped: false,
            }
        }
    }
}

fn dedup<const D: usize>(cons: &[HalfSpace<D>], scale: f64) -> Vec<HalfSpace<D>> {
    let mut out: Vec<HalfSpace<D>> = Vec::with_capacity(cons.len());
    for c in cons {
        let dup = out.iter().any(|o| {
            (0..D).all(|i| (o.normal[i] - c.normal[i]).abs() < 1e-12)
                && (o.offset - c.offset).abs() < 1e-12 * scale
        });
        if !dup {
            out.push(*c);
        }
    }
    out
}

/// Chebyshev ball of `{x : n_i·x <= b_i}`. A non-positive radius means the
/// set has empty interior. `scale` is a length used for tolerances.
pub fn chebyshev_radius<const D: usize>(cons: &[HalfSpace<D>], scale: f64) -> ChebyshevBall<D> {
    let cons = dedup(cons, scale);
    let m = D + 1;
    let tol = 1e-12 * scale;
    let mut best = ChebyshevBall {
        center: [0.0; D],
        radius: f64::NEG_INFINITY,
    };
    for subset in (0..cons.len()).combinations(m) {
        let mut a = DMatrix::zeros(m, m);
        let mut b = DVector::zeros(m);
        for (row, &ci) in subset.iter().enumerate() {
            for j in 0..D {
                a[(row, j)] = cons[ci].normal[j];
            }
            a[(row, D)] = 1.0;
            b[row] = cons[ci].offset;
        }
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(sol) = lu.solve(&b) else { continue };
        let r = sol[D];
        if r <= best.radius {
            continue;
        }
        let feasible = cons.iter().all(|c| {
            let lhs: f64 = (0..D).map(|j| c.normal[j] * sol[j]).sum::<f64>() + r;
            lhs <= c.offset + tol
        });
        if feasible {
            let mut center = [0.0; D];
            center.copy_from_slice(&sol.as_slice()[..D]);
            best = ChebyshevBall { center, radius: r };
        }
    }
    if best.radius <= tol {
        best.radius = 0.0;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_ball() {
        let mut cons = Vec::new();
        for axis in 0..3 {
            let mut n = [0.0; 3];
            n[axis] = 1.0;
            cons.push(HalfSpace { normal: n, offset: 1.0 });
            n[axis] = -1.0;
            cons.push(HalfSpace { normal: n, offset: 0.0 });
        }
        let ball = chebyshev_radius(&cons, 1.0);
        assert!((ball.radius - 0.5).abs() < 1e-14);
        for c in ball.center {
            assert!((c - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_kernel() {
        // x <= 0 and -x <= -1 cannot both hold
        let cons = [
            HalfSpace { normal: [1.0, 0.0], offset: 0.0 },
            HalfSpace { normal: [-1.0, 0.0], offset: -1.0 },
            HalfSpace { normal: [0.0, 1.0], offset: 1.0 },
            HalfSpace { normal: [0.0, -1.0], offset: 0.0 },
        ];
        let ch = chebyshev_radius(&cons, 1.0).into_chunkiness(1.0);
        assert!(!ch.star_shaped);
        assert_eq!(ch.rho, 0.0);
    }
}
