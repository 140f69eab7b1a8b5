//! Numeric modes. Every quantity is carried by a [`Scalar`]: either an
//! exact big rational ([`Exact`]) or an `f64`. The mode is a type parameter,
//! so mixing modes inside one computation does not compile.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Exact = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Signed
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
{
    const MODE: Mode;
    /// Comparison slack used wherever an operation compares two scalars.
    /// Zero in exact mode.
    const TOL: f64;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// "p/q" in exact mode, shortest round-trip decimal in float mode.
    fn to_repr(&self) -> String;
    fn parse_repr(s: &str) -> Result<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match Self::MODE {
            Mode::Exact => self == other,
            Mode::Float => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }

    /// `self <= other` up to `tol` (ignored in exact mode).
    fn le_tol(&self, other: &Self, tol: f64) -> bool {
        match Self::MODE {
            Mode::Exact => self <= other,
            Mode::Float => self.to_f64() <= other.to_f64() + tol,
        }
    }

    fn is_negligible(&self) -> bool {
        self.approx_eq(&Self::zero(), Self::TOL)
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for BigRational {
    const MODE: Mode = Mode::Exact;
    const TOL: f64 = 0.0;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_repr(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn parse_repr(s: &str) -> Result<Self> {
        parse_exact(s)
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;
    const TOL: f64 = 1e-12;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self {
        ToPrimitive::to_f64(&BigRational::new(num.clone(), den.clone())).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_repr(&self) -> String {
        format!("{self}")
    }

    fn parse_repr(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            return Ok(ToPrimitive::to_f64(&parse_exact(s)?).unwrap_or(f64::NAN));
        }
        f64::from_str(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
}

/// Parses "p/q", an integer, or a finite decimal ("0.25", "1e-3") into an exact rational.
pub fn parse_exact(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut num = BigInt::from_str(&all).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}
