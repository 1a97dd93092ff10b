//! Numeric scalars used by probability expressions.
//!
//! Reliability values are computed over any [`Scalar`]: exact rationals for
//! reproducible verdicts and attribute equality, or `f64`/`f32` when speed
//! matters more than exactness.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// A field-like scalar with exact or approximate arithmetic.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// Parses a plain decimal literal such as `0.97`, `-1.5e-3` or `3`.
    fn from_decimal(text: &str) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// True when the value lies in the closed unit interval.
    fn is_probability(&self) -> bool {
        *self >= Self::zero() && *self <= Self::one()
    }
}

impl Scalar for f64 {
    fn from_decimal(text: &str) -> Option<Self> {
        parse_decimal_parts(text)?;
        text.trim().parse().ok()
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_decimal(text: &str) -> Option<Self> {
        parse_decimal_parts(text)?;
        text.trim().parse().ok()
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_decimal(text: &str) -> Option<Self> {
        let parts = parse_decimal_parts(text)?;
        let mut digits = parts.integer.to_string();
        digits.push_str(parts.fraction);
        let mantissa: BigInt = digits.parse().ok()?;
        let exponent = parts.exponent - parts.fraction.len() as i64;
        let ten = BigInt::from(10u32);
        let scale = num_traits::pow(ten, exponent.unsigned_abs() as usize);
        let value = if exponent >= 0 {
            BigRational::from_integer(mantissa * scale)
        } else {
            BigRational::new(mantissa, scale)
        };
        Some(if parts.negative { -value } else { value })
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

struct DecimalParts<'a> {
    negative: bool,
    integer: &'a str,
    fraction: &'a str,
    exponent: i64,
}

fn parse_decimal_parts(text: &str) -> Option<DecimalParts<'_>> {
    let text = text.trim();
    let (negative, rest) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => (&rest[..i], rest[i + 1..].parse::<i64>().ok()?),
        None => (rest, 0),
    };
    let (integer, fraction) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if integer.is_empty() && fraction.is_empty() {
        return None;
    }
    if !integer.bytes().chain(fraction.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let integer = if integer.is_empty() { "0" } else { integer };
    Some(DecimalParts { negative, integer, fraction, exponent })
}

/// Renders a scalar with `digits` significant digits (at least one).
pub fn format_significant<S: Scalar>(value: &S, digits: usize) -> String {
    let v = value.to_f64();
    if v == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}
