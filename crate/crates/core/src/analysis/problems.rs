//! Built-in manufactured solutions of `-Δu = f`.

use crate::error::{Result, VemError};
use nalgebra::Vector3;
use std::f64::consts::PI;

type Scalar = fn(&Vector3<f64>) -> f64;
type Vector = fn(&Vector3<f64>) -> Vector3<f64>;

/// Exact solution with its gradient and source; the Dirichlet data is `u`
/// itself.
#[derive(Clone, Copy)]
pub struct ManufacturedProblem {
    pub name: &'static str,
    pub u: Scalar,
    pub grad: Vector,
    pub f: Scalar,
    /// Polynomial degree, `None` for smooth non-polynomial solutions.
    pub degree: Option<usize>,
}

impl std::fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .finish()
    }
}

impl ManufacturedProblem {
    pub const NAMES: [&'static str; 5] = ["poly1", "poly2", "quadratic", "cubic", "sinsinsin"];

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "poly1" => Ok(Self::poly1()),
            "poly2" => Ok(Self::poly2()),
            "quadratic" => Ok(Self::quadratic()),
            "cubic" => Ok(Self::cubic()),
            "sinsinsin" => Ok(Self::sinsinsin()),
            _ => Err(VemError::Parameter(format!(
                "unknown problem '{name}' (expected one of {})",
                Self::NAMES.join(", ")
            ))),
        }
    }

    /// `u = x`.
    pub fn poly1() -> Self {
        ManufacturedProblem {
            name: "poly1",
            u: |x| x.x,
            grad: |_| Vector3::x(),
            f: |_| 0.0,
            degree: Some(1),
        }
    }

    /// `u = x² - y²`.
    pub fn poly2() -> Self {
        ManufacturedProblem {
            name: "poly2",
            u: |x| x.x * x.x - x.y * x.y,
            grad: |x| Vector3::new(2.0 * x.x, -2.0 * x.y, 0.0),
            f: |_| 0.0,
            degree: Some(2),
        }
    }

    /// `u = x² + 2y² - z² + xy - yz + x - 1`, with constant nonzero source.
    pub fn quadratic() -> Self {
        ManufacturedProblem {
            name: "quadratic",
            u: |x| x.x * x.x + 2.0 * x.y * x.y - x.z * x.z + x.x * x.y - x.y * x.z + x.x - 1.0,
            grad: |x| Vector3::new(2.0 * x.x + x.y + 1.0, 4.0 * x.y + x.x - x.z, -2.0 * x.z - x.y),
            f: |_| -4.0,
            degree: Some(2),
        }
    }

    /// `u = x³ - 3xy² + z³ + xz`.
    pub fn cubic() -> Self {
        ManufacturedProblem {
            name: "cubic",
            u: |x| x.x.powi(3) - 3.0 * x.x * x.y * x.y + x.z.powi(3) + x.x * x.z,
            grad: |x| {
                Vector3::new(
                    3.0 * x.x * x.x - 3.0 * x.y * x.y + x.z,
                    -6.0 * x.x * x.y,
                    3.0 * x.z * x.z + x.x,
                )
            },
            f: |x| -6.0 * x.z,
            degree: Some(3),
        }
    }

    /// `u = sin(πx) sin(πy) sin(πz)`, zero on the unit cube boundary.
    pub fn sinsinsin() -> Self {
        ManufacturedProblem {
            name: "sinsinsin",
            u: |x| (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).sin(),
            grad: |x| {
                let (sx, cx) = (PI * x.x).sin_cos();
                let (sy, cy) = (PI * x.y).sin_cos();
                let (sz, cz) = (PI * x.z).sin_cos();
                Vector3::new(cx * sy * sz, sx * cy * sz, sx * sy * cz) * PI
            },
            f: |x| 3.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).sin(),
            degree: None,
        }
    }

    /// `true` when the solution lies in `P_k`.
    pub fn is_polynomial_of(&self, k: usize) -> bool {
        self.degree.is_some_and(|d| d <= k)
    }
}
