//! Hilbert projective metric on the simplex and Birkhoff contraction bounds.

use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::transition::{transition_matrix, Scheme};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::symbolic::Model;

/// `max_ij ln((x_i / y_i) (y_j / x_j))` for two points of the closed simplex.
///
/// Coordinates vanishing in both points are ignored; a coordinate vanishing
/// in exactly one point gives `+inf`.
pub fn hilbert_distance<T: Float>(x: &[T], y: &[T]) -> Result<T> {
    check_simplex_float(x)?;
    check_simplex_float(y)?;
    if x.len() != y.len() {
        return Err(Error::domain("points of different dimension"));
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (&a, &b) in x.iter().zip(y) {
        match (a.is_zero(), b.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return Ok(T::infinity()),
            _ => {
                let ln = a.ln() - b.ln();
                lo = lo.min(ln);
                hi = hi.max(ln);
            }
        }
    }
    Ok(if hi < lo { T::zero() } else { hi - lo })
}

fn check_simplex_float<T: Float>(x: &[T]) -> Result<()> {
    if x.is_empty() || x.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
        return Err(Error::domain("simplex coordinates must be finite and nonnegative"));
    }
    let s = x.iter().fold(T::zero(), |a, &b| a + b);
    let tol = T::from(1e-9)
        .unwrap_or_else(T::epsilon)
        .max(T::epsilon() * T::from(16).unwrap_or_else(T::one));
    if (s - T::one()).abs() > tol {
        return Err(Error::domain("simplex coordinates must sum to 1"));
    }
    Ok(())
}

/// Hilbert distance of two exact simplex points.
pub fn hilbert_distance_exact(x: &[Exact], y: &[Exact]) -> Result<f64> {
    for p in [x, y] {
        if p.is_empty() || p.iter().any(Exact::is_negative) || p.iter().sum::<Exact>() != Exact::one() {
            return Err(Error::domain("not a point of the simplex"));
        }
    }
    if x.len() != y.len() {
        return Err(Error::domain("points of different dimension"));
    }
    Ok(projective_distance(x, y))
}

/// Hilbert distance between the rays of two nonnegative vectors.
pub(crate) fn projective_distance(x: &[Exact], y: &[Exact]) -> f64 {
    match ratio_spread(x, y) {
        None => f64::INFINITY,
        Some(spread) => ln_ge_one(&spread),
    }
}

/// `max(x_i/y_i) / min(x_j/y_j)` over the common support, or `None` when
/// the supports differ.
fn ratio_spread(x: &[Exact], y: &[Exact]) -> Option<Exact> {
    let mut lo: Option<Exact> = None;
    let mut hi: Option<Exact> = None;
    for (a, b) in x.iter().zip(y) {
        match (a.is_zero(), b.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return None,
            _ => {
                let r = a.clone() / b;
                if lo.as_ref().is_none_or(|l| r < *l) {
                    lo = Some(r.clone());
                }
                if hi.as_ref().is_none_or(|h| r > *h) {
                    hi = Some(r);
                }
            }
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => Some(h / l),
        _ => Some(Exact::one()),
    }
}

/// `ln s` for `s >= 1`, keeping full relative accuracy near 1.
fn ln_ge_one(s: &Exact) -> f64 {
    let two = Exact::from_integer(2);
    if *s < two {
        (s.clone() - Exact::one()).to_f64().ln_1p()
    } else {
        s.ln()
    }
}

/// The segment form `|ln((m + l)(m + r) / (l r))|`: `l` and `r` are the
/// distances from `x` and `y` to the simplex boundary along the line
/// through them and `m = |x - y|`. Used as a cross-check only.
pub fn hilbert_distance_segment(x: &[f64], y: &[f64]) -> Result<f64> {
    check_simplex_float(x)?;
    check_simplex_float(y)?;
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    if d.iter().all(|v| v.abs() < 1e-300) {
        return Ok(0.0);
    }
    // z(t) = x + t (y - x) leaves the simplex at t_lo <= 0 and t_hi >= 1
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (&xi, &di) in x.iter().zip(&d) {
        if di > 0.0 {
            t_lo = t_lo.max(-xi / di);
        } else if di < 0.0 {
            t_hi = t_hi.min(-xi / di);
        }
    }
    let (l, r) = (-t_lo, t_hi - 1.0);
    if l <= 0.0 || r <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((1.0 + l) * (1.0 + r) / (l * r)).ln().abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelVerdict {
    Contracting,
    /// Some column pair has different supports; the image diameter is infinite.
    Withheld,
    /// All columns are proportional; the image is a single point.
    DegenerateImage,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelContraction {
    pub level: usize,
    /// Minimal cross-ratio of the columns, `exp(-diameter)`; exact.
    pub phi: Exact,
    /// Projective diameter of the image of the simplex.
    pub diameter: f64,
    /// Birkhoff factor `tanh(diameter / 4)`.
    pub factor: f64,
    /// `ln(1 - factor)`, accurate when the factor rounds to 1.
    pub ln_one_minus_factor: f64,
    pub verdict: LevelVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionReport {
    pub model: String,
    pub scheme: Scheme,
    pub levels: Vec<LevelContraction>,
    /// `true` when every level has a finite image diameter (factor < 1, certified by `phi > 0`).
    pub uniformly_contracting: bool,
    pub sup_factor: Option<f64>,
    pub withheld_levels: Vec<usize>,
}

/// Contraction data for a single nonnegative matrix.
pub fn matrix_contraction(level: usize, a: &Matrix<Exact>) -> LevelContraction {
    let cols: Vec<Vec<Exact>> = (0..a.cols()).map(|j| a.column(j)).collect();
    let mut phi = Exact::one();
    for j in 0..cols.len() {
        for l in j + 1..cols.len() {
            match ratio_spread(&cols[j], &cols[l]) {
                None => phi = Exact::zero(),
                Some(s) => {
                    let p = s.recip();
                    if p < phi {
                        phi = p;
                    }
                }
            }
        }
    }
    if phi.is_zero() {
        return LevelContraction {
            level,
            phi,
            diameter: f64::INFINITY,
            factor: 1.0,
            ln_one_minus_factor: f64::NEG_INFINITY,
            verdict: LevelVerdict::Withheld,
        };
    }
    let diameter = ln_ge_one(&phi.recip());
    if diameter == 0.0 && phi == Exact::one() {
        return LevelContraction {
            level,
            phi,
            diameter: 0.0,
            factor: 0.0,
            ln_one_minus_factor: 0.0,
            verdict: LevelVerdict::DegenerateImage,
        };
    }
    // 1 - tanh(D/4) = 2 sqrt(phi) / (1 + sqrt(phi)), sqrt(phi) = exp(-D/2)
    let half = -0.5 * diameter;
    LevelContraction {
        level,
        phi,
        diameter,
        factor: (diameter / 4.0).tanh(),
        ln_one_minus_factor: std::f64::consts::LN_2 + half - half.exp().ln_1p(),
        verdict: LevelVerdict::Contracting,
    }
}

/// Per-level contraction of `A_q` for `q` in `levels`.
pub fn contraction_certificate(
    model: &Model,
    scheme: Scheme,
    levels: std::ops::RangeInclusive<usize>,
) -> Result<ContractionReport> {
    if levels.is_empty() {
        return Err(Error::domain("empty level range"));
    }
    let mut out = Vec::new();
    for q in levels {
        let a = transition_matrix(model, q, scheme)?.entries;
        out.push(matrix_contraction(q, &a));
    }
    let withheld_levels: Vec<usize> = out
        .iter()
        .filter(|l| l.verdict == LevelVerdict::Withheld)
        .map(|l| l.level)
        .collect();
    let uniformly_contracting = withheld_levels.is_empty();
    let sup_factor = uniformly_contracting.then(|| out.iter().map(|l| l.factor).fold(0.0, f64::max));
    Ok(ContractionReport {
        model: model.name(),
        scheme,
        levels: out,
        uniformly_contracting,
        sup_factor,
        withheld_levels,
    })
}
