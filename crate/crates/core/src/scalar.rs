//! Scalar abstraction shared by the exact and floating-point code paths.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used wherever the math must be exact.
pub type Rat = BigRational;

/// Field scalar for the formula layer.
///
/// Implemented by [`Rat`] (exact) and by `f64`/`f32` (approximate). Exact
/// instantiations turn every identity check into an equality test; float
/// instantiations fall back to relative tolerances.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic in this scalar is exact.
    const EXACT: bool;

    fn from_rat(r: &Rat) -> Self;

    fn from_int(n: i64) -> Self;

    fn abs(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality for `EXACT` scalars, relative comparison otherwise.
    fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            let a = self.to_f64();
            let b = other.to_f64();
            (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0)
        }
    }

    /// |self - other| / max(1, |self|, |other|) as `f64`.
    fn rel_diff(&self, other: &Self) -> f64 {
        let d = (self.clone() - other.clone()).abs().to_f64();
        d / self.abs().to_f64().max(other.abs().to_f64()).max(1.0)
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn from_int(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar_float {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_rat(r: &Rat) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn from_int(n: i64) -> Self {
                n as $t
            }

            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

impl_scalar_float!(f64);
impl_scalar_float!(f32);

/// JSON form of a scalar: exact values as strings, floats as numbers.
pub fn scalar_json<S: Scalar>(v: &S) -> serde_json::Value {
    if S::EXACT {
        serde_json::Value::String(format!("{v}"))
    } else {
        serde_json::json!(v.to_f64())
    }
}

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Canonical text form: `"3"` for integers, `"3/2"` otherwise.
pub fn rat_str(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"`, `"p/q"`, or a plain decimal like `"-1.5"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.chars().any(|c| !c.is_ascii_digit()) {
            return None;
        }
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let num: BigInt = frac.parse().ok()?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = Rat::new(num, den);
        let whole = Rat::from_integer(int_part);
        return Some(if neg { whole - frac_part } else { whole + frac_part });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rat_string_round_trip() {
        assert_eq!(rat_str(&rat(3, 2)), "3/2");
        assert_eq!(rat_str(&rat_int(-4)), "-4");
        assert_eq!(parse_rat("3/2"), Some(rat(3, 2)));
        assert_eq!(parse_rat("-4"), Some(rat_int(-4)));
        assert_eq!(parse_rat("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rat("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rat("1/0"), None);
    }

    #[test]
    fn close_to_dispatch() {
        assert!(rat(1, 3).close_to(&rat(1, 3), 0.0));
        assert!(!rat(1, 3).close_to(&rat(1, 2), 1.0));
        assert!(0.1f64.close_to(&(0.1 + 1e-12), 1e-10));
        assert!(!0.1f64.close_to(&0.2, 1e-10));
    }
}
