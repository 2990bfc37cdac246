//! Local generators of parameter translations and quantum Fisher information
//! for arbitrarily parameterized unitary channels `U(φ) = exp(-i H(φ))`, with
//! an application to detecting deformations of a 2-D grid of Gaussian photon
//! emitters.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: dense Hermitian operators, eigendecomposition with
//!   degeneracy clustering, eigenspace projectors.
//! - [`generator`]: the generator `G_j = i (∂_j U) U†`, computed by a spectral
//!   closed form and cross-checked by Duhamel quadrature, a nested-commutator
//!   series and finite differences of the channel.
//! - [`qfim`]: quantum/classical Fisher information matrices, symmetric
//!   logarithmic derivatives, saturability and weighted Cramér–Rao bounds.
//! - [`grid`]: emitter grids, deformation maps and the deformation QFIM with
//!   closed forms for stretch, shear and rotation.
//! - [`validate`]: seeded self-consistency suites shared by the CLI and tests.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generator;
pub mod grid;
pub mod qfim;
pub mod quadrature;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;

/// Largest absolute entry of a complex matrix.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entry of a real matrix.
pub fn max_norm_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
