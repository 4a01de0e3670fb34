//! Scalar abstraction shared by the exact and floating-point code paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, ToPrimitive};

use crate::exact::Exact;

/// Field-like scalar usable in matrices, affine maps and simplex points.
///
/// Implemented for `f32`, `f64` and [`Exact`].
pub trait Scalar: Num + Clone + PartialOrd + Debug + ToPrimitive + FromPrimitive + Send + Sync + 'static {
    /// Conversion from an arbitrary-precision integer. Lossy for floats.
    fn from_bigint(n: &BigInt) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `true` when arithmetic on this type never rounds.
    const EXACT: bool;
}

impl Scalar for f64 {
    fn from_bigint(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(f64::NAN)
    }
    const EXACT: bool = false;
}

impl Scalar for f32 {
    fn from_bigint(n: &BigInt) -> Self {
        n.to_f32().unwrap_or(f32::NAN)
    }
    const EXACT: bool = false;
}

impl Scalar for Exact {
    fn from_bigint(n: &BigInt) -> Self {
        Exact::from_integer(n.clone())
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64()
    }

    const EXACT: bool = true;
}
