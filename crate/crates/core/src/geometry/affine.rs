use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `x + iy` of the upper half-plane (or its boundary).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }
}

/// The orientation-preserving affine isometry `z -> a z + b`, `a > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap<T> {
    a: T,
    b: T,
}

impl<T: Scalar> AffineMap<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(Error::domain(format!("dilation must be positive, got {a:?}")));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity() -> Self {
        AffineMap {
            a: T::one(),
            b: T::zero(),
        }
    }

    /// `z -> 2z`.
    pub fn dilation() -> Self {
        AffineMap {
            a: T::one() + T::one(),
            b: T::zero(),
        }
    }

    /// `z -> z + 1`.
    pub fn translation() -> Self {
        AffineMap {
            a: T::one(),
            b: T::one(),
        }
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    /// `self ∘ other`: `z -> self(other(z))`.
    pub fn compose(&self, other: &Self) -> Self {
        AffineMap {
            a: self.a.clone() * other.a.clone(),
            b: self.a.clone() * other.b.clone() + self.b.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        let a_inv = T::one() / self.a.clone();
        AffineMap {
            b: T::zero() - self.b.clone() * a_inv.clone(),
            a: a_inv,
        }
    }

    /// `g^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Self::identity();
        for _ in 0..n.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    /// The modular weight `alpha(z -> az + b) = a`.
    pub fn alpha(&self) -> T {
        self.a.clone()
    }

    pub fn apply(&self, p: &Point<T>) -> Point<T> {
        Point {
            x: self.a.clone() * p.x.clone() + self.b.clone(),
            y: self.a.clone() * p.y.clone(),
        }
    }
}
