//! Lossless scalars for matrix entries, simplex coordinates and affine maps.
//!
//! An [`Exact`] is stored in canonical form: a value whose reduced
//! denominator is a power of two is always held as a [`Dyadic`]
//! (`mantissa * 2^exp2`, mantissa odd or zero), anything else as a reduced
//! [`BigRational`]. Canonical storage makes derived `Eq`/`Hash` agree with
//! numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

const LN_2: f64 = std::f64::consts::LN_2;

/// `mantissa * 2^exp2` with an odd mantissa (or zero mantissa and `exp2 == 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exp2: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exp2: i64) -> Self {
        match mantissa.trailing_zeros() {
            None => Dyadic {
                mantissa: BigInt::zero(),
                exp2: 0,
            },
            Some(tz) => Dyadic {
                mantissa: mantissa >> tz,
                exp2: exp2 + tz as i64,
            },
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    fn to_rational(&self) -> BigRational {
        if self.exp2 >= 0 {
            BigRational::from_integer(&self.mantissa << self.exp2 as u64)
        } else {
            BigRational::new_raw(self.mantissa.clone(), BigInt::one() << (-self.exp2) as u64)
        }
    }

    fn add(&self, other: &Dyadic) -> Dyadic {
        if self.mantissa.is_zero() {
            return other.clone();
        }
        if other.mantissa.is_zero() {
            return self.clone();
        }
        let e = self.exp2.min(other.exp2);
        let a = &self.mantissa << (self.exp2 - e) as u64;
        let b = &other.mantissa << (other.exp2 - e) as u64;
        Dyadic::new(a + b, e)
    }

    fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.mantissa.is_zero() || other.mantissa.is_zero() {
            return Dyadic::new(BigInt::zero(), 0);
        }
        Dyadic {
            mantissa: &self.mantissa * &other.mantissa,
            exp2: self.exp2 + other.exp2,
        }
    }

    fn cmp(&self, other: &Dyadic) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let e = self.exp2.min(other.exp2);
        let a = &self.mantissa << (self.exp2 - e) as u64;
        let b = &other.mantissa << (other.exp2 - e) as u64;
        a.cmp(&b)
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Exact scalar: dyadic or reduced rational, always in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exact {
    Dyadic(Dyadic),
    Rational(BigRational),
}

impl Exact {
    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Exact::Dyadic(Dyadic::new(n.into(), 0))
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Exact::Dyadic(Dyadic {
            mantissa: BigInt::one(),
            exp2: e,
        })
    }

    /// `mantissa * 2^exp2`.
    pub fn dyadic(mantissa: impl Into<BigInt>, exp2: i64) -> Self {
        Exact::Dyadic(Dyadic::new(mantissa.into(), exp2))
    }

    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Exact::from_rational(BigRational::new(num.into(), den))
    }

    /// Canonicalizes: power-of-two denominators become dyadics.
    pub fn from_rational(r: BigRational) -> Self {
        let den = r.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if den.bits() == tz + 1 {
            Exact::Dyadic(Dyadic::new(r.numer().clone(), -(tz as i64)))
        } else {
            Exact::Rational(r)
        }
    }

    pub fn to_rational(&self) -> BigRational {
        match self {
            Exact::Dyadic(d) => d.to_rational(),
            Exact::Rational(r) => r.clone(),
        }
    }

    pub fn as_dyadic(&self) -> Option<&Dyadic> {
        match self {
            Exact::Dyadic(d) => Some(d),
            Exact::Rational(_) => None,
        }
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self, Exact::Dyadic(_))
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Exact::Dyadic(d) if d.exp2 >= 0 => &d.mantissa << d.exp2 as u64,
            Exact::Dyadic(d) => d.mantissa.clone(),
            Exact::Rational(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Exact::Dyadic(d) if d.exp2 >= 0 => BigInt::one(),
            Exact::Dyadic(d) => BigInt::one() << (-d.exp2) as u64,
            Exact::Rational(r) => r.denom().clone(),
        }
    }

    /// `Some(n)` when the value is an integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        match self {
            Exact::Dyadic(d) if d.exp2 >= 0 => Some(&d.mantissa << d.exp2 as u64),
            Exact::Dyadic(d) if d.mantissa.is_zero() => Some(BigInt::zero()),
            _ => None,
        }
    }

    pub fn floor(&self) -> BigInt {
        match self {
            Exact::Dyadic(d) if d.exp2 >= 0 => &d.mantissa << d.exp2 as u64,
            // arithmetic shift floors toward -inf
            Exact::Dyadic(d) => &d.mantissa >> (-d.exp2) as u64,
            Exact::Rational(r) => r.floor().to_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn signum(&self) -> i8 {
        let s = match self {
            Exact::Dyadic(d) => d.mantissa.sign(),
            Exact::Rational(r) => r.numer().sign(),
        };
        sign_rank(s)
    }

    pub fn abs(&self) -> Exact {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Exact {
        Exact::one() / self.clone()
    }

    /// Exact `floor(log2 |x|)` for nonzero `x`.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let n = self.numer().magnitude().clone();
        let d = self.denom().magnitude().clone();
        let mut k = n.bits() as i64 - d.bits() as i64;
        // 2^k <= n/d < 2^(k+1) after at most one correction
        let lhs = |k: i64| -> bool {
            if k >= 0 {
                &d << k as u64 <= n
            } else {
                d <= (&n << (-k) as u64)
            }
        };
        if !lhs(k) {
            k -= 1;
        }
        Some(k)
    }

    /// Natural logarithm as an `f64`, accurate for arbitrarily large or
    /// small magnitudes. Returns `-inf` for zero and `NaN` for negatives.
    pub fn ln(&self) -> f64 {
        match self.signum() {
            0 => f64::NEG_INFINITY,
            s if s < 0 => f64::NAN,
            _ => match self {
                Exact::Dyadic(d) => ln_big(d.mantissa.magnitude()) + d.exp2 as f64 * LN_2,
                Exact::Rational(r) => ln_big(r.numer().magnitude()) - ln_big(r.denom().magnitude()),
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exact::Dyadic(d) => {
                let bits = d.mantissa.bits() as i64;
                if bits <= 63 {
                    ldexp(d.mantissa.to_f64().unwrap_or(0.0), d.exp2)
                } else {
                    let shift = bits - 63;
                    let top = &d.mantissa >> shift as u64;
                    ldexp(top.to_f64().unwrap_or(0.0), d.exp2 + shift)
                }
            }
            Exact::Rational(r) => {
                let (n, den) = (r.numer(), r.denom());
                let k = den.bits() as i64 - n.bits() as i64 + 64;
                let q = if k >= 0 {
                    (n << k as u64) / den
                } else {
                    n / (den << (-k) as u64)
                };
                ldexp(q.to_f64().unwrap_or(0.0), -k)
            }
        }
    }

    /// Exact conversion of a finite float (every finite `f64` is dyadic).
    pub fn from_f64_exact(x: f64) -> Option<Exact> {
        if !x.is_finite() {
            return None;
        }
        let (mantissa, exp, sign) = num_traits::Float::integer_decode(x);
        let m = BigInt::from(mantissa) * BigInt::from(sign);
        Some(Exact::dyadic(m, exp as i64))
    }

    /// Human-readable dyadic form such as `5*2^-2`; rationals fall back to `n/d`.
    pub fn to_dyadic_string(&self) -> String {
        match self {
            Exact::Dyadic(d) if d.exp2 == 0 || d.mantissa.is_zero() => d.mantissa.to_string(),
            Exact::Dyadic(d) => format!("{}*2^{}", d.mantissa, d.exp2),
            Exact::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
        }
    }
}

/// `ln n` for a nonzero big integer.
pub(crate) fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().map(f64::ln).unwrap_or(f64::NEG_INFINITY)
    } else {
        let shift = bits - 64;
        let top = n >> shift;
        top.to_f64().unwrap_or(1.0).ln() + shift as f64 * LN_2
    }
}

/// `x * 2^k` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    let big = 2f64.powi(1000);
    let small = 2f64.powi(-1000);
    while k > 1000 {
        x *= big;
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= small;
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

impl Default for Exact {
    fn default() -> Self {
        Exact::zero()
    }
}

impl Zero for Exact {
    fn zero() -> Self {
        Exact::Dyadic(Dyadic::new(BigInt::zero(), 0))
    }

    fn is_zero(&self) -> bool {
        match self {
            Exact::Dyadic(d) => d.mantissa.is_zero(),
            Exact::Rational(r) => r.is_zero(),
        }
    }
}

impl One for Exact {
    fn one() -> Self {
        Exact::from_integer(1)
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        match self {
            Exact::Dyadic(d) => Exact::Dyadic(Dyadic {
                mantissa: -d.mantissa,
                exp2: d.exp2,
            }),
            Exact::Rational(r) => Exact::Rational(-r),
        }
    }
}

impl Neg for &Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        -self.clone()
    }
}

fn add_ref(a: &Exact, b: &Exact) -> Exact {
    match (a, b) {
        (Exact::Dyadic(x), Exact::Dyadic(y)) => Exact::Dyadic(x.add(y)),
        _ => Exact::from_rational(a.to_rational() + b.to_rational()),
    }
}

fn sub_ref(a: &Exact, b: &Exact) -> Exact {
    add_ref(a, &-b)
}

fn mul_ref(a: &Exact, b: &Exact) -> Exact {
    match (a, b) {
        (Exact::Dyadic(x), Exact::Dyadic(y)) => Exact::Dyadic(x.mul(y)),
        _ => Exact::from_rational(a.to_rational() * b.to_rational()),
    }
}

fn div_ref(a: &Exact, b: &Exact) -> Exact {
    assert!(!b.is_zero(), "division of an exact scalar by zero");
    if let (Exact::Dyadic(x), Exact::Dyadic(y)) = (a, b) {
        if y.mantissa.magnitude().is_one() {
            let m = if y.mantissa.is_negative() {
                -x.mantissa.clone()
            } else {
                x.mantissa.clone()
            };
            return Exact::Dyadic(Dyadic::new(m, x.exp2 - y.exp2));
        }
    }
    Exact::from_rational(a.to_rational() / b.to_rational())
}

fn rem_ref(a: &Exact, b: &Exact) -> Exact {
    let q = div_ref(a, b).to_rational().trunc();
    sub_ref(a, &mul_ref(b, &Exact::from_rational(q)))
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $f:ident) => {
        impl $tr<Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                $f(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                $f(&self, rhs)
            }
        }
        impl<'a> $tr<Exact> for &'a Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                $f(self, &rhs)
            }
        }
        impl<'a, 'b> $tr<&'b Exact> for &'a Exact {
            type Output = Exact;
            fn $method(self, rhs: &'b Exact) -> Exact {
                $f(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);
forward_binop!(Rem, rem, rem_ref);

impl AddAssign<&Exact> for Exact {
    fn add_assign(&mut self, rhs: &Exact) {
        *self = add_ref(self, rhs);
    }
}

impl AddAssign for Exact {
    fn add_assign(&mut self, rhs: Exact) {
        *self = add_ref(self, &rhs);
    }
}

impl SubAssign<&Exact> for Exact {
    fn sub_assign(&mut self, rhs: &Exact) {
        *self = sub_ref(self, rhs);
    }
}

impl MulAssign<&Exact> for Exact {
    fn mul_assign(&mut self, rhs: &Exact) {
        *self = mul_ref(self, rhs);
    }
}

impl std::iter::Sum for Exact {
    fn sum<I: Iterator<Item = Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Exact> for Exact {
    fn sum<I: Iterator<Item = &'a Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

impl Ord for Exact {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exact::Dyadic(a), Exact::Dyadic(b)) => a.cmp(b),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

impl PartialOrd for Exact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Num for Exact {
    type FromStrRadixErr = String;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n = BigInt::from_str_radix(n.trim(), radix).map_err(|e| e.to_string())?;
                let d = BigInt::from_str_radix(d.trim(), radix).map_err(|e| e.to_string())?;
                if d.is_zero() {
                    return Err("zero denominator".into());
                }
                Ok(Exact::ratio(n, d))
            }
            None => BigInt::from_str_radix(s, radix)
                .map(Exact::from_integer)
                .map_err(|e| e.to_string()),
        }
    }
}

impl FromStr for Exact {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Exact::from_str_radix(s, 10)
    }
}

impl ToPrimitive for Exact {
    fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|n| n.to_i64())
    }

    fn to_u64(&self) -> Option<u64> {
        self.to_integer().and_then(|n| n.to_u64())
    }

    fn to_f64(&self) -> Option<f64> {
        Some(Exact::to_f64(self))
    }
}

impl FromPrimitive for Exact {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Exact::from_integer(n))
    }

    fn from_u64(n: u64) -> Option<Self> {
        Some(Exact::from_integer(n))
    }

    fn from_f64(x: f64) -> Option<Self> {
        Exact::from_f64_exact(x)
    }
}

impl From<i64> for Exact {
    fn from(n: i64) -> Self {
        Exact::from_integer(n)
    }
}

impl From<BigInt> for Exact {
    fn from(n: BigInt) -> Self {
        Exact::from_integer(n)
    }
}

impl From<BigUint> for Exact {
    fn from(n: BigUint) -> Self {
        Exact::from_integer(BigInt::from(n))
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.denom();
        if d.is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), d)
        }
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Exact", 2)?;
        st.serialize_field("num", &self.numer().to_string())?;
        st.serialize_field("den", &self.denom().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            num: String,
            den: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let n = BigInt::from_str(&raw.num).map_err(de::Error::custom)?;
        let d = BigInt::from_str(&raw.den).map_err(de::Error::custom)?;
        if !d.is_positive() {
            return Err(de::Error::custom("denominator must be positive"));
        }
        if !n.gcd(&d).is_one() && !n.is_zero() {
            return Err(de::Error::custom("fraction is not reduced"));
        }
        Ok(Exact::ratio(n, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    #[test]
    fn canonical_forms() {
        assert!(q(3, 4).is_dyadic());
        assert!(!q(1, 3).is_dyadic());
        assert_eq!(q(6, 8), Exact::dyadic(3, -2));
        assert_eq!(Exact::dyadic(12, 0), Exact::dyadic(3, 2));
        assert_eq!(q(2, 6) * Exact::from_integer(3), Exact::one());
        assert!((q(2, 6) * Exact::from_integer(3)).is_dyadic());
    }

    #[test]
    fn arithmetic_mixed() {
        let a = q(1, 3) + Exact::pow2(-1);
        assert_eq!(a, q(5, 6));
        assert_eq!(a.clone() - q(1, 3), Exact::pow2(-1));
        assert_eq!(Exact::pow2(-3) / Exact::pow2(-5), Exact::from_integer(4));
        assert_eq!(q(7, 2) % Exact::from_integer(2), q(3, 2));
        assert_eq!(Exact::from_integer(-3).floor(), BigInt::from(-3));
        assert_eq!(q(-3, 2).floor(), BigInt::from(-2));
        assert_eq!(q(-4, 3).floor(), BigInt::from(-2));
    }

    #[test]
    fn ordering_is_total() {
        let mut v = vec![q(1, 3), Exact::pow2(-2), Exact::zero(), q(-5, 7), Exact::one()];
        v.sort();
        assert_eq!(v, vec![q(-5, 7), Exact::zero(), Exact::pow2(-2), q(1, 3), Exact::one()]);
        assert!(Exact::pow2(-59048) > Exact::zero());
        assert!(Exact::pow2(-59048) < Exact::pow2(-59047));
    }

    #[test]
    fn floats_and_logs() {
        assert_eq!(Exact::pow2(-2).to_f64(), 0.25);
        assert_eq!(q(1, 3).to_f64(), 1.0 / 3.0);
        assert!((Exact::pow2(-59048).ln() + 59048.0 * LN_2).abs() < 1e-9);
        assert_eq!(Exact::pow2(-59048).to_f64(), 0.0);
        let big = Exact::from_integer(BigInt::from(3u8).pow(700));
        assert!((big.ln() - 700.0 * 3f64.ln()).abs() < 1e-9);
        let x = 0.1f64;
        assert_eq!(Exact::from_f64_exact(x).unwrap().to_f64(), x);
    }

    #[test]
    fn floor_log2_exact() {
        assert_eq!(Exact::from_integer(3).floor_log2(), Some(1));
        assert_eq!(Exact::from_integer(4).floor_log2(), Some(2));
        assert_eq!(q(3, 4).floor_log2(), Some(-1));
        assert_eq!(q(1, 3).floor_log2(), Some(-2));
        assert_eq!(Exact::pow2(-7).floor_log2(), Some(-7));
        assert_eq!(Exact::zero().floor_log2(), None);
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&q(-5, 12)).unwrap();
        assert_eq!(s, r#"{"num":"-5","den":"12"}"#);
        let back: Exact = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q(-5, 12));
        assert!(serde_json::from_str::<Exact>(r#"{"num":"2","den":"4"}"#).is_err());
        assert!(serde_json::from_str::<Exact>(r#"{"num":"2","den":"-3"}"#).is_err());
    }

    #[test]
    fn dyadic_string() {
        assert_eq!((Exact::one() + Exact::pow2(-2)).to_dyadic_string(), "5*2^-2");
        assert_eq!(Exact::from_integer(7).to_dyadic_string(), "7");
    }
}
