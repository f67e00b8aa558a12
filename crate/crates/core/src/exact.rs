//! Exact rationals and the exact-or-approximate number type used throughout
//! the crate.
//!
//! Rationals travel over JSON as `["num","den"]` pairs of decimal integer
//! strings, always reduced with the sign carried by the numerator.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Builds `num/den` as a reduced big rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `p` or a plain decimal such as `15.5` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = whole.abs() * &scale + frac;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(num, scale));
    }
    BigInt::from_str(text).map(Rational::from_integer).map_err(|_| bad())
}

/// Canonical `p/q` text (or `p` for integers).
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails on overflow of both parts.
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// `q^p` for a small non-negative integer power.
pub fn pow(q: &Rational, p: u32) -> Rational {
    num_traits::pow::pow(q.clone(), p as usize)
}

/// Serde wrapper for a rational in `["num","den"]` form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalRepr(pub Rational);

impl Serialize for RationalRepr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(2))?;
        seq.serialize_element(&self.0.numer().to_string())?;
        seq.serialize_element(&self.0.denom().to_string())?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RationalRepr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [num, den] = <[String; 2]>::deserialize(deserializer)?;
        let num = BigInt::from_str(&num).map_err(de::Error::custom)?;
        let den = BigInt::from_str(&den).map_err(de::Error::custom)?;
        if den.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(RationalRepr(Rational::new(num, den)))
    }
}

pub(crate) mod rational_list {
    use super::*;

    pub fn serialize<S: Serializer>(
        values: &[Rational],
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&RationalRepr(v.clone()))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let reprs = Vec::<RationalRepr>::deserialize(deserializer)?;
        Ok(reprs.into_iter().map(|r| r.0).collect())
    }
}

/// A real number that is either an exact rational or a double, tagged by
/// provenance. Exact arithmetic stays exact; anything touching an
/// approximate operand becomes approximate.
#[derive(Debug, Clone)]
pub enum ExactReal {
    Exact(Rational),
    Approx(f64),
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal::Exact(Rational::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ExactReal::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            ExactReal::Exact(q) => Some(q),
            ExactReal::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactReal::Exact(q) => to_f64(q),
            ExactReal::Approx(x) => *x,
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            ExactReal::Exact(q) => ExactReal::Exact(q.abs()),
            ExactReal::Approx(x) => ExactReal::Approx(x.abs()),
        }
    }

    /// `self^(1/p)` for a non-negative value; always approximate unless the
    /// value is exactly zero or one.
    pub fn root(&self, p: u32) -> Self {
        match self {
            ExactReal::Exact(q) if q.is_zero() || *q == int(1) => self.clone(),
            other => ExactReal::Approx(other.to_f64().powf(1.0 / f64::from(p))),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            ExactReal::Exact(q) => q.is_positive(),
            ExactReal::Approx(x) => *x > 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExactReal::Exact(q) => q.is_zero(),
            ExactReal::Approx(x) => *x == 0.0,
        }
    }
}

impl From<Rational> for ExactReal {
    fn from(q: Rational) -> Self {
        ExactReal::Exact(q)
    }
}

impl From<f64> for ExactReal {
    fn from(x: f64) -> Self {
        ExactReal::Approx(x)
    }
}

macro_rules! exact_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: ExactReal) -> ExactReal {
                (&self) $op (&rhs)
            }
        }

        impl<'a> $trait<&'a ExactReal> for &'a ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: &'a ExactReal) -> ExactReal {
                match (self, rhs) {
                    (ExactReal::Exact(a), ExactReal::Exact(b)) => ExactReal::Exact(a $op b),
                    (a, b) => ExactReal::Approx(a.to_f64() $op b.to_f64()),
                }
            }
        }
    };
}

exact_binop!(Add, add, +);
exact_binop!(Sub, sub, -);
exact_binop!(Mul, mul, *);

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        match self {
            ExactReal::Exact(q) => ExactReal::Exact(-q),
            ExactReal::Approx(x) => ExactReal::Approx(-x),
        }
    }
}

/// Exact values compare exactly; mixed comparisons fall back to doubles.
impl PartialEq for ExactReal {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for ExactReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExactReal::Exact(a), ExactReal::Exact(b)) => Some(a.cmp(b)),
            (a, b) => a.to_f64().partial_cmp(&b.to_f64()),
        }
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactReal::Exact(q) => f.write_str(&format_rational(q)),
            ExactReal::Approx(x) => write!(f, "~{x:e}"),
        }
    }
}

/// Exact values serialize as `["num","den"]`; approximate values as
/// `{"value": x, "approx": true}`.
impl Serialize for ExactReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExactReal::Exact(q) => RationalRepr(q.clone()).serialize(serializer),
            ExactReal::Approx(x) => {
                let mut map = serializer.serialize_map(Some(2))?;
                map.serialize_entry("value", x)?;
                map.serialize_entry("approx", &true)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Approx {
            value: f64,
            #[allow(dead_code)]
            approx: bool,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Exact(RationalRepr),
            Approx(Approx),
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Exact(r) => ExactReal::Exact(r.0),
            Repr::Approx(a) => ExactReal::Approx(a.value),
        })
    }
}
