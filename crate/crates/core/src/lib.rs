//! Invariant measures of affine finite-type tilings of the hyperbolic half-plane.
//!
//! * [`symbolic`] builds the decoration sequences (Toeplitz and substitution)
//!   and their atlas hierarchies.
//! * [`geometry`] places decorated patches in the half-plane and renders them.
//! * [`measures`] assembles the transition matrices and approximates the cone
//!   of invariant measures, with Hilbert-metric certificates.
//! * [`diffusion`] simulates leafwise Brownian motion and its occupancy times.
//!
//! Linear algebra and affine maps are generic over [`Scalar`]; the aliases
//! below fix the two scalars used in practice.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod measures;
pub mod scalar;
pub mod symbolic;

pub use error::{Error, ErrorKind, Result};
pub use exact::{Dyadic, Exact};
pub use scalar::Scalar;

pub type ExactMatrix = measures::Matrix<Exact>;
pub type Matrix64 = measures::Matrix<f64>;
pub type Matrix32 = measures::Matrix<f32>;
pub type ExactAffine = geometry::AffineMap<Exact>;
pub type Affine64 = geometry::AffineMap<f64>;
pub type ExactPoint = geometry::Point<Exact>;
pub type Point64 = geometry::Point<f64>;
pub type ExactRect = measures::Rect<Exact>;
pub type Rect64 = measures::Rect<f64>;
