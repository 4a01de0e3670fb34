//! Agreement radius of two decorated tilings around the origin `O = i`.
//!
//! A tiling here is `g(T(w))`: the decorated Penrose tiling moved by an
//! anchor map `g: z -> a z + b` with dyadic coefficients. Its row `k` is the
//! band `[a 2^k, a 2^(k+1))` cut into cells of width `a 2^k` offset by `b`,
//! colored `w_k`. Only `g = Id` is tried when comparing (no optimization over
//! small perturbations), so the resulting `min(1, 1/rho)` is a simplified
//! distance, not the hull metric itself.

use serde::{Deserialize, Serialize};

use super::affine::AffineMap;
use crate::error::Result;
use crate::exact::Exact;
use crate::symbolic::{Letter, Model};

/// Source of row colors.
pub trait Decoration {
    fn color(&self, row: i64) -> Result<Letter>;
}

impl Decoration for Model {
    fn color(&self, row: i64) -> Result<Letter> {
        self.letter(row)
    }
}

impl<F> Decoration for F
where
    F: Fn(i64) -> Result<Letter>,
{
    fn color(&self, row: i64) -> Result<Letter> {
        self(row)
    }
}

pub struct AnchoredTiling<'a> {
    pub decoration: &'a dyn Decoration,
    pub anchor: AffineMap<Exact>,
}

impl<'a> AnchoredTiling<'a> {
    pub fn new(decoration: &'a dyn Decoration, anchor: AffineMap<Exact>) -> Self {
        AnchoredTiling { decoration, anchor }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum AgreementRadius {
    Finite(f64),
    /// No disagreement within the scanned rows; the radius is at least this.
    AtLeast(f64),
    Infinite,
}

impl AgreementRadius {
    /// `min(1, 1/rho)`; an upper bound for [`AgreementRadius::AtLeast`].
    pub fn simplified_distance(&self) -> f64 {
        match *self {
            AgreementRadius::Finite(r) | AgreementRadius::AtLeast(r) => {
                if r <= 1.0 {
                    1.0
                } else {
                    1.0 / r
                }
            }
            AgreementRadius::Infinite => 0.0,
        }
    }
}

/// Hyperbolic distance from `O = (0, 1)` to the band `[lo, 2 lo)`.
fn band_distance(lo: &Exact) -> f64 {
    let one = Exact::from_integer(1);
    let hi = lo.clone() * Exact::from_integer(2);
    if *lo <= one && one < hi {
        0.0
    } else if *lo > one {
        lo.ln()
    } else {
        -hi.ln()
    }
}

/// Largest `rho` such that both tilings have the same colored tiles on the
/// ball `B_rho(O)`, scanning rows whose band lies within `scan_rows` bands of
/// the origin's band.
pub fn agreement_radius(t1: &AnchoredTiling<'_>, t2: &AnchoredTiling<'_>, scan_rows: u32) -> Result<AgreementRadius> {
    // zero-sized decorations (capture-free closures) may share an address
    let same_decoration = std::mem::size_of_val(t1.decoration) != 0
        && std::ptr::eq(
            t1.decoration as *const dyn Decoration as *const (),
            t2.decoration as *const dyn Decoration as *const (),
        );
    if same_decoration && t1.anchor == t2.anchor {
        return Ok(AgreementRadius::Infinite);
    }
    let (a1, a2) = (t1.anchor.alpha(), t2.anchor.alpha());
    let ratio = a1.clone() / a2;
    // row bands line up only when a1/a2 is a power of two
    let e = match ratio.as_dyadic() {
        Some(d) if d.mantissa() == &1.into() => d.exp2(),
        _ => return Ok(AgreementRadius::Finite(0.0)),
    };
    // band containing y = 1
    let k0 = a1.recip().floor_log2().expect("positive dilation");
    let db = t1.anchor.b().clone() - t2.anchor.b().clone();
    let mut best: Option<f64> = None;
    for k in (k0 - scan_rows as i64)..=(k0 + scan_rows as i64) {
        let lo = a1.clone() * Exact::pow2(k);
        let dist = band_distance(&lo);
        if best.is_some_and(|b| dist >= b) {
            continue;
        }
        let offsets_agree = (db.clone() / &lo).to_integer().is_some();
        let colors_agree = t1.decoration.color(k)? == t2.decoration.color(k + e)?;
        if !(offsets_agree && colors_agree) {
            best = Some(dist);
        }
    }
    Ok(match best {
        Some(d) => AgreementRadius::Finite(d),
        None => {
            let edge = [k0 - scan_rows as i64 - 1, k0 + scan_rows as i64 + 1]
                .iter()
                .map(|&k| band_distance(&(a1.clone() * Exact::pow2(k))))
                .fold(f64::INFINITY, f64::min);
            AgreementRadius::AtLeast(edge)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Letter;
    use num_traits::Zero;

    fn id() -> AffineMap<Exact> {
        AffineMap::identity()
    }

    #[test]
    fn identical_inputs_are_at_distance_zero() {
        let m = Model::toeplitz(2);
        let t = AnchoredTiling::new(&m, id());
        let r = agreement_radius(&t, &t, 10).unwrap();
        assert_eq!(r, AgreementRadius::Infinite);
        assert_eq!(r.simplified_distance(), 0.0);
    }

    #[test]
    fn single_row_disagreement() {
        let base = |row: i64| -> Result<Letter> { Ok(Letter::from_index((row.rem_euclid(2)) as usize)) };
        let flip5 = |row: i64| -> Result<Letter> {
            let l = (row.rem_euclid(2)) as usize;
            Ok(Letter::from_index(if row == 5 { 1 - l } else { l }))
        };
        let flip0 = |row: i64| -> Result<Letter> {
            let l = (row.rem_euclid(2)) as usize;
            Ok(Letter::from_index(if row == 0 { 1 - l } else { l }))
        };
        let t = AnchoredTiling::new(&base, id());
        let r = agreement_radius(&t, &AnchoredTiling::new(&flip5, id()), 20).unwrap();
        match r {
            AgreementRadius::Finite(rho) => assert!((rho - 32f64.ln()).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let r = agreement_radius(&t, &AnchoredTiling::new(&flip0, id()), 20).unwrap();
        assert_eq!(r, AgreementRadius::Finite(0.0));
        assert_eq!(r.simplified_distance(), 1.0);
        // a change below the origin: row -3 has band [1/8, 1/4), distance ln 4
        let flipm3 = |row: i64| -> Result<Letter> {
            let l = (row.rem_euclid(2)) as usize;
            Ok(Letter::from_index(if row == -3 { 1 - l } else { l }))
        };
        let r = agreement_radius(&t, &AnchoredTiling::new(&flipm3, id()), 20).unwrap();
        assert_eq!(r, AgreementRadius::Finite(4f64.ln()));
    }

    #[test]
    fn translations_and_dilations() {
        let m = Model::substitution();
        let t = AnchoredTiling::new(&m, id());
        // shifting by 1 preserves rows 0 and below, breaks rows with width > 1
        let s = AnchoredTiling::new(&m, AffineMap::translation());
        assert_eq!(
            agreement_radius(&t, &s, 20).unwrap(),
            AgreementRadius::Finite(2f64.ln())
        );
        // a non power-of-two dilation disagrees at the origin
        let g = AffineMap::new(Exact::from_integer(3), Exact::zero()).unwrap();
        let d = AnchoredTiling::new(&m, g);
        assert_eq!(agreement_radius(&t, &d, 20).unwrap(), AgreementRadius::Finite(0.0));
        // an equal copy behind a different reference scans without finding a difference
        let copy = m.clone();
        let c = AnchoredTiling::new(&copy, id());
        assert!(
            matches!(agreement_radius(&t, &c, 6).unwrap(), AgreementRadius::AtLeast(r) if (r - 6.0 * 2f64.ln()).abs() < 1e-12)
        );
    }
}
