//! Two-mode number tower: exact rationals with a float branch.
//!
//! Code construction, transformation and validation run on the exact branch
//! so that every pairing and rank decision is free of roundoff. Monte Carlo
//! simulation and circuit synthesis run on floats. Mixed arithmetic promotes
//! to float.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{sign::Signed as _, One, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Default comparison tolerance for float-mode computations.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A number that is either an exact rational or an `f64`.
///
/// Equality between two `Exact` values is exact; float comparisons should go
/// through [`Scalar::is_zero_within`] or [`Scalar::approx_eq`] with an
/// explicit tolerance.
#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact ratio `num/den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_f64(v: f64) -> Self {
        Scalar::Approx(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or_else(|| {
                // Out-of-range rationals; fall back to a sign-correct infinity.
                if r.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }),
            Scalar::Approx(v) => *v,
        }
    }

    /// True when the value is exactly zero (exact branch) or `|v| <= tol`
    /// (float branch). Exact values never consult the tolerance.
    pub fn is_zero_within(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(v) => v.abs() <= tol,
        }
    }

    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(v) => Scalar::Approx(v.abs()),
        }
    }

    /// Magnitude as `f64`, used for float pivot selection.
    pub fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.recip()),
            Scalar::Approx(v) => Scalar::Approx(1.0 / v),
        }
    }

    /// Parses an integer (`-3`), a ratio (`5/7`) or a decimal/scientific
    /// literal (`0.25`, `1e-3`, `2.5e2`). Every form parses exactly into the
    /// rational branch.
    pub fn parse(text: &str) -> Result<Scalar, String> {
        let s = text.trim();
        if s.is_empty() {
            return Err("empty number".into());
        }
        if let Some((num, den)) = s.split_once('/') {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{s}`"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in `{s}`"));
            }
            return Ok(Scalar::Exact(BigRational::new(n, d)));
        }
        // Split off an exponent, then a decimal point; both optional.
        let (mantissa, exp) = match s.split_once(['e', 'E']) {
            Some((m, e)) => {
                let exp: i32 = e.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
                (m, exp)
            }
            None => (s, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        let digits = format!("{int_part}{frac_part}");
        if digits.is_empty() || digits == "-" || digits == "+" {
            return Err(format!("bad number `{s}`"));
        }
        let n: BigInt = digits.parse().map_err(|_| format!("bad number `{s}`"))?;
        let shift = frac_part.len() as i32 - exp;
        let ten = BigInt::from(10);
        let value = if shift >= 0 {
            BigRational::new(n, ten.pow(shift as u32))
        } else {
            BigRational::from_integer(n * ten.pow((-shift) as u32))
        };
        Ok(Scalar::Exact(value))
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// Exact on the rational branch; bit-level on floats; mixed operands compare
/// through `f64`. Tests that need tolerances use [`Scalar::approx_eq`].
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Approx(a), Scalar::Approx(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}
