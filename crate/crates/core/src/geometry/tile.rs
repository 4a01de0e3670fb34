use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Zero};
use serde::{Deserialize, Serialize};

use super::affine::Point;
use crate::error::{Error, Result};
use crate::exact::Exact;

/// Tile `R^row ∘ S^col (P)` of the hyperbolic Penrose tiling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileAddress {
    pub row: i64,
    pub col: BigInt,
}

impl TileAddress {
    pub fn new(row: i64, col: impl Into<BigInt>) -> Self {
        TileAddress { row, col: col.into() }
    }

    /// Horizontal extent `[col 2^row, (col + 1) 2^row)`.
    pub fn x_extent(&self) -> (Exact, Exact) {
        let w = Exact::pow2(self.row);
        let left = Exact::from_integer(self.col.clone()) * &w;
        let right = left.clone() + w;
        (left, right)
    }

    /// Vertical band `[2^row, 2^(row + 1))`.
    pub fn band(&self) -> (Exact, Exact) {
        (Exact::pow2(self.row), Exact::pow2(self.row + 1))
    }
}

/// Vertices `A_1..A_5` of the prototile: `i`, `1/2 + i`, `1 + i`, `1 + 2i`, `2i`.
pub fn prototile() -> [Point<Exact>; 5] {
    let p = |x: Exact, y: i64| Point::new(x, Exact::from_integer(y));
    [
        p(Exact::zero(), 1),
        p(Exact::pow2(-1), 1),
        p(Exact::one(), 1),
        p(Exact::one(), 2),
        p(Exact::zero(), 2),
    ]
}

/// Exact vertex affixes of `R^row ∘ S^col (P)`: images of `A_1..A_5` under
/// `z -> 2^row (z + col)`.
pub fn tile_region(t: &TileAddress) -> [Point<Exact>; 5] {
    let scale = Exact::pow2(t.row);
    let shift = Exact::from_integer(t.col.clone());
    prototile().map(|v| Point::new((v.x + &shift) * &scale, v.y * &scale))
}

/// Tile whose half-open cell `[n 2^k, (n+1) 2^k) x [2^k, 2^(k+1))` contains `(x, y)`.
pub fn tile_containing_point(x: f64, y: f64) -> Result<TileAddress> {
    if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!(
            "point ({x}, {y}) is not in the open upper half-plane"
        )));
    }
    let mut row = y.log2().floor() as i64;
    // log2 may be off by one near powers of two
    while pow2f(row) > y {
        row -= 1;
    }
    while pow2f(row + 1) <= y {
        row += 1;
    }
    let col = (x / pow2f(row)).floor();
    let col = BigInt::from_f64(col).ok_or_else(|| Error::domain("column overflow"))?;
    Ok(TileAddress { row, col })
}

pub(crate) fn pow2f(k: i64) -> f64 {
    crate::exact::ldexp(1.0, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: Exact, y: Exact) -> (f64, f64) {
        (x.to_f64(), y.to_f64())
    }

    #[test]
    fn base_tile_vertices() {
        let v: Vec<_> = tile_region(&TileAddress::new(0, 0))
            .into_iter()
            .map(|p| pt(p.x, p.y))
            .collect();
        assert_eq!(v, vec![(0.0, 1.0), (0.5, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]);
        let v: Vec<_> = tile_region(&TileAddress::new(1, 0))
            .into_iter()
            .map(|p| pt(p.x, p.y))
            .collect();
        assert_eq!(v, vec![(0.0, 2.0), (1.0, 2.0), (2.0, 2.0), (2.0, 4.0), (0.0, 4.0)]);
        let v: Vec<_> = tile_region(&TileAddress::new(0, 1))
            .into_iter()
            .map(|p| pt(p.x, p.y))
            .collect();
        assert_eq!(v, vec![(1.0, 1.0), (1.5, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]);
    }

    #[test]
    fn containing_tile_examples() {
        assert_eq!(tile_containing_point(0.5, 1.5).unwrap(), TileAddress::new(0, 0));
        assert_eq!(tile_containing_point(3.0, 1.0).unwrap(), TileAddress::new(0, 3));
        assert_eq!(tile_containing_point(0.3, 0.6).unwrap(), TileAddress::new(-1, 0));
        assert_eq!(tile_containing_point(-0.1, 2.0).unwrap(), TileAddress::new(1, -1));
        assert!(tile_containing_point(0.0, 0.0).is_err());
        assert!(tile_containing_point(0.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn interior_points_map_back(row in -40i64..40, col in -1000i64..1000, u in 0.001f64..0.999, v in 0.001f64..0.999) {
            let t = TileAddress::new(row, col);
            let w = pow2f(row);
            let x = (col as f64 + u) * w;
            let y = (1.0 + v) * w;
            prop_assert_eq!(tile_containing_point(x, y).unwrap(), t);
        }
    }
}
