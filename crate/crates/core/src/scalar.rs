//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Numeric code is written once against [`Scalar`]. Floats use a small
//! comparison tolerance; big rationals compare exactly.

use std::fmt::{Debug, Display};

use num::{BigInt, BigRational, Signed, Zero};
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Ordered field element with a comparison tolerance.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance used by feasibility and fairness checks.
    fn tolerance() -> Self;

    /// Magnitude below which the simplex treats a tableau entry as zero.
    fn pivot_tolerance() -> Self;

    /// `num / den` in this field.
    fn ratio(num: u64, den: u64) -> Self;

    /// Parses a plain or scientific decimal literal.
    fn parse_decimal(s: &str) -> Option<Self>;

    /// Strictly greater than zero. Unlike `Signed::is_positive`, `0.0` and
    /// `-0.0` are not positive.
    fn is_pos(&self) -> bool {
        *self > Self::zero()
    }

    /// Strictly less than zero.
    fn is_neg(&self) -> bool {
        *self < Self::zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits every supported scalar")
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
    fn pivot_tolerance() -> Self {
        1e-11
    }
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse::<f64>().ok().filter(|x| x.is_finite())
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
    fn pivot_tolerance() -> Self {
        1e-6
    }
    fn ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse::<f32>().ok().filter(|x| x.is_finite())
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        Self::zero()
    }
    fn pivot_tolerance() -> Self {
        Self::zero()
    }
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        parse_exact_decimal(s)
    }
}

/// Exact decimal parse: `[-+]digits[.digits][e[-+]digits]`.
fn parse_exact_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let mut numer: BigInt = joined.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Smaller of two partially ordered values (first wins on ties).
pub(crate) fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}
