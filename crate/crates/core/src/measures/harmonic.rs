//! Harmonic-side checks: product measures on flow boxes, their scaling
//! under the affine group, and the Herglotz representation of positive
//! harmonic functions on the half-plane.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::geometry::AffineMap;

/// Axis-parallel rectangle `[x0, x1] x [y0, y1]` in the upper half-plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: PartialOrd + num_traits::Zero> Rect<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Result<Self> {
        if !(x0 <= x1 && T::zero() < y0 && y0 < y1) {
            return Err(Error::domain("rectangle needs x0 <= x1 and 0 < y0 < y1"));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }
}

/// `int_rect b y dx dy / y^2 = b (x1 - x0) ln(y1 / y0)`.
pub fn cylinder_mass<T: Float>(b: T, rect: &Rect<T>) -> Result<T> {
    if !(b >= T::zero()) {
        return Err(Error::domain("density coefficient must be nonnegative"));
    }
    Rect::new(rect.x0, rect.x1, rect.y0, rect.y1)?;
    Ok(b * (rect.x1 - rect.x0) * (rect.y1 / rect.y0).ln())
}

/// A mass `coefficient * ln(log_argument)` kept in exact symbolic form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicMass {
    pub coefficient: Exact,
    pub log_argument: Exact,
}

impl SymbolicMass {
    pub fn value(&self) -> f64 {
        self.coefficient.to_f64() * self.log_argument.ln()
    }

    pub fn scaled(&self, k: &Exact) -> SymbolicMass {
        SymbolicMass {
            coefficient: self.coefficient.clone() * k,
            log_argument: self.log_argument.clone(),
        }
    }
}

pub fn cylinder_mass_exact(b: &Exact, rect: &Rect<Exact>) -> Result<SymbolicMass> {
    if b.is_negative() {
        return Err(Error::domain("density coefficient must be nonnegative"));
    }
    Rect::new(rect.x0.clone(), rect.x1.clone(), rect.y0.clone(), rect.y1.clone())?;
    Ok(SymbolicMass {
        coefficient: b.clone() * (rect.x1.clone() - &rect.x0),
        log_argument: rect.y1.clone() / &rect.y0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportCheck {
    /// Mass of the `g`-image rectangle.
    pub lhs: SymbolicMass,
    /// `alpha(g)` times the mass of the rectangle.
    pub rhs: SymbolicMass,
    pub equal: bool,
    /// `lhs / mass(rect)`; equals `alpha(g)`.
    pub ratio: Exact,
}

/// Compares the mass of `g(rect)` with `alpha(g)` times the mass of `rect`.
pub fn transport_scaling_check(b: &Exact, rect: &Rect<Exact>, g: &AffineMap<Exact>) -> Result<TransportCheck> {
    let base = cylinder_mass_exact(b, rect)?;
    let (a, t) = (g.a(), g.b());
    let image = Rect::new(
        a.clone() * &rect.x0 + t,
        a.clone() * &rect.x1 + t,
        a.clone() * &rect.y0,
        a.clone() * &rect.y1,
    )?;
    let lhs = cylinder_mass_exact(b, &image)?;
    let rhs = base.scaled(&g.alpha());
    let equal = lhs == rhs;
    // dilation leaves y1/y0 unchanged, so the coefficients carry the ratio
    let ratio = if base.coefficient.is_positive() && lhs.log_argument == base.log_argument {
        lhs.coefficient.clone() / &base.coefficient
    } else {
        g.alpha()
    };
    Ok(TransportCheck { lhs, rhs, equal, ratio })
}

/// Finite boundary measure plus a linear term: `H(x, y) = alpha y + sum m y / ((s - x)^2 + y^2)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAtoms {
    /// `(location, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
    pub alpha_lin: f64,
}

impl BoundaryAtoms {
    pub fn new(atoms: Vec<(f64, f64)>, alpha_lin: f64) -> Result<Self> {
        if atoms.iter().any(|&(s, m)| !s.is_finite() || !(m >= 0.0)) || !(alpha_lin >= 0.0) {
            return Err(Error::domain(
                "atoms need finite locations, nonnegative masses and slope",
            ));
        }
        Ok(BoundaryAtoms { atoms, alpha_lin })
    }
}

pub fn herglotz_evaluate(h: &BoundaryAtoms, x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("evaluation point must lie in the upper half-plane"));
    }
    Ok(h.alpha_lin * y
        + h.atoms
            .iter()
            .map(|&(s, m)| m * y / ((s - x) * (s - x) + y * y))
            .sum::<f64>())
}

const SIMPSON_TOL: f64 = 1e-10;
const SIMPSON_DEPTH: u32 = 40;
const MAX_PANELS: usize = 200_000;

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, f64> {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(delta.abs());
        }
        Ok(rec(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)?
            + rec(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)?)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, (a, fa), (m, fm), (b, fb), whole, tol, SIMPSON_DEPTH).map_err(|residual| Error::Numeric {
        message: format!("adaptive quadrature did not converge on [{a}, {b}]"),
        residual,
    })
}

/// `(1 / pi) int_a^b H(x, y_probe) dx`, the boundary mass of `[a, b]` in the
/// limit `y_probe -> 0`.
///
/// The interval is first cut into panels of width about `y_probe` so that
/// kernel peaks of that width are resolved wherever they sit.
pub fn boundary_recover(h: &dyn Fn(f64, f64) -> f64, a: f64, b: f64, y_probe: f64) -> Result<f64> {
    if !(y_probe > 0.0) || !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("need a < b finite and y_probe > 0"));
    }
    let panels = (((b - a) / y_probe).ceil() as usize).clamp(1, MAX_PANELS);
    let width = (b - a) / panels as f64;
    let f = |x: f64| h(x, y_probe);
    let mut total = 0.0;
    let mut comp = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        let v = adaptive_simpson(&f, lo, hi, (SIMPSON_TOL / panels as f64).max(1e-14))?;
        // Kahan summation across panels
        let yk = v - comp;
        let t = total + yk;
        comp = (t - total) - yk;
        total = t;
    }
    Ok(total / std::f64::consts::PI)
}

/// Closed form of [`boundary_recover`] for atom inputs.
pub fn boundary_recover_oracle(h: &BoundaryAtoms, a: f64, b: f64, y: f64) -> f64 {
    let atoms: f64 = h
        .atoms
        .iter()
        .map(|&(s, m)| m * (((b - s) / y).atan() - ((a - s) / y).atan()))
        .sum();
    (atoms + h.alpha_lin * y * (b - a)) / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn unit() -> Rect<Exact> {
        Rect::new(Exact::zero(), Exact::one(), Exact::one(), Exact::from_integer(2)).unwrap()
    }

    #[test]
    fn cylinder_examples() {
        let r = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        assert!((cylinder_mass(1.0, &r).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(cylinder_mass(0.0, &r).unwrap(), 0.0);
        let img = Rect::new(0.0, 2.0, 2.0, 4.0).unwrap();
        assert!((cylinder_mass(1.0, &img).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!(Rect::new(0.0, 1.0, 0.0, 2.0).is_err());
        assert!(Rect::new(1.0, 0.0, 1.0, 2.0).is_err());
        assert!(cylinder_mass(-1.0, &r).is_err());
        let f32_mass = cylinder_mass(1.0f32, &Rect::new(0.0f32, 1.0, 1.0, 2.0).unwrap()).unwrap();
        assert!((f32_mass - 2f32.ln()).abs() < 1e-6);
    }

    #[test]
    fn transport_examples() {
        let b = Exact::one();
        let c = transport_scaling_check(&b, &unit(), &AffineMap::dilation()).unwrap();
        assert!(c.equal);
        assert_eq!(c.ratio, Exact::from_integer(2));
        assert!((c.lhs.value() - 2.0 * 2f64.ln()).abs() < 1e-15);
        let c = transport_scaling_check(&b, &unit(), &AffineMap::translation()).unwrap();
        assert!(c.equal && c.ratio == Exact::one());
        let half = AffineMap::new(Exact::ratio(1, 2), Exact::zero()).unwrap();
        let c = transport_scaling_check(&b, &unit(), &half).unwrap();
        assert_eq!(c.ratio, Exact::ratio(1, 2));
    }

    #[test]
    fn herglotz_examples() {
        let slope = BoundaryAtoms::new(vec![], 2.0).unwrap();
        assert_eq!(herglotz_evaluate(&slope, 3.0, 0.5).unwrap(), 1.0);
        let atom = BoundaryAtoms::new(vec![(0.0, 1.0)], 0.0).unwrap();
        assert_eq!(herglotz_evaluate(&atom, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(herglotz_evaluate(&BoundaryAtoms::default(), 0.0, 1.0).unwrap(), 0.0);
        assert!(herglotz_evaluate(&atom, 0.0, 0.0).is_err());
        assert!(BoundaryAtoms::new(vec![(0.0, -1.0)], 0.0).is_err());
    }

    #[test]
    fn recovery() {
        let atom = BoundaryAtoms::new(vec![(0.0, 1.0)], 0.0).unwrap();
        let h = |x: f64, y: f64| herglotz_evaluate(&atom, x, y).unwrap();
        let got = boundary_recover(&h, -1.0, 1.0, 1e-4).unwrap();
        let oracle = boundary_recover_oracle(&atom, -1.0, 1.0, 1e-4);
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
        assert!((got - 1.0).abs() < 0.02);
        let far = BoundaryAtoms::new(vec![(5.0, 1.0)], 0.0).unwrap();
        let h = |x: f64, y: f64| herglotz_evaluate(&far, x, y).unwrap();
        assert!(boundary_recover(&h, -1.0, 1.0, 1e-4).unwrap() < 1e-4);
        let slope = BoundaryAtoms::new(vec![], 3.0).unwrap();
        let h = |x: f64, y: f64| herglotz_evaluate(&slope, x, y).unwrap();
        assert!(boundary_recover(&h, -1.0, 1.0, 1e-4).unwrap() < 1e-3);
        assert!(boundary_recover(&h, 1.0, -1.0, 1e-4).is_err());
    }

    proptest! {
        #[test]
        fn herglotz_is_harmonic(
            s in -2.0f64..2.0, m in 0.0f64..3.0, alpha in 0.0f64..2.0,
            x in -1.0f64..1.0, y in 0.5f64..2.0,
        ) {
            let h = BoundaryAtoms::new(vec![(s, m)], alpha).unwrap();
            let f = |x: f64, y: f64| herglotz_evaluate(&h, x, y).unwrap();
            let step = 1e-3;
            let lap = (f(x + step, y) + f(x - step, y) + f(x, y + step) + f(x, y - step) - 4.0 * f(x, y)) / (step * step);
            // y^2 times the Euclidean Laplacian, O(h^2) truncation
            prop_assert!((y * y * lap).abs() < 1e-3 * (1.0 + m / (y * y * y)));
        }
    }
}
