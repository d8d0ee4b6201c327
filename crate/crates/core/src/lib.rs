//! Conforming virtual element method of arbitrary order for the Poisson
//! problem on general polyhedral meshes.
//!
//! The crate is layered bottom-up:
//!
//! - [`geometry`]: exact monomial integration, quadrature, chunkiness.
//! - [`mesh`]: polyhedral mesh model, text format, generators.
//! - [`local`]: degrees of freedom, computable projectors, stabilizations and
//!   element matrices on one cell.
//! - [`assembly`]: global numbering, sparse assembly, Dirichlet elimination,
//!   Jacobi-preconditioned conjugate gradients.
//! - [`analysis`]: interpolation, error norms, the error-equation check and
//!   convergence studies.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod local;
pub mod mesh;

pub use error::{Result, VemError};
