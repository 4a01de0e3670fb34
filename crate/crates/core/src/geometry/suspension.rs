use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::affine::AffineMap;
use crate::exact::Exact;

/// Suspension coordinate `[(log2 a - n, shift^n w)]` of the tiling moved by `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuspensionPoint {
    /// `frac(log2 a)`, in `[0, 1)`.
    pub fractional: f64,
    /// `floor(log2 a)`: how far the sequence is shifted.
    pub shift: i64,
}

/// Projects `T(w).g` to the suspension, with an exact integer part.
pub fn suspension_project(g: &AffineMap<Exact>) -> SuspensionPoint {
    let a = g.alpha();
    let shift = a.floor_log2().expect("dilation is positive");
    // a / 2^shift lies in [1, 2)
    let mantissa = (a / Exact::pow2(shift)).to_f64();
    let fractional = mantissa.log2().clamp(0.0, 1.0 - f64::EPSILON / 2.0);
    SuspensionPoint { fractional, shift }
}

/// Floating-point variant for maps with float coefficients.
pub fn suspension_project_float<T>(g: &AffineMap<T>) -> SuspensionPoint
where
    T: Float + crate::scalar::Scalar,
{
    let l = g.alpha().to_f64().expect("finite").log2();
    let shift = l.floor();
    SuspensionPoint {
        fractional: l - shift,
        shift: shift as i64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn projections() {
        let id = AffineMap::<Exact>::identity();
        assert_eq!(
            suspension_project(&id),
            SuspensionPoint {
                fractional: 0.0,
                shift: 0
            }
        );
        let r = AffineMap::<Exact>::dilation();
        assert_eq!(
            suspension_project(&r),
            SuspensionPoint {
                fractional: 0.0,
                shift: 1
            }
        );
        let g = AffineMap::new(Exact::from_integer(3), Exact::zero()).unwrap();
        let p = suspension_project(&g);
        assert_eq!(p.shift, 1);
        assert!((p.fractional - (3f64.log2() - 1.0)).abs() < 1e-15);
        assert!((p.fractional - 0.58496).abs() < 1e-5);
        let g = AffineMap::new(Exact::ratio(3, 8), Exact::from_integer(5)).unwrap();
        let p = suspension_project(&g);
        assert_eq!(p.shift, -2);
        assert!((p.fractional - (1.5f64).log2()).abs() < 1e-15);
    }

    #[test]
    fn float_variant_agrees() {
        let g = AffineMap::new(3.0f64, 1.0).unwrap();
        let p = suspension_project_float(&g);
        assert_eq!(p.shift, 1);
        assert!((p.fractional - 0.5849625).abs() < 1e-6);
    }
}
