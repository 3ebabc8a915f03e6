//! One scalar abstraction with an exact and a floating instantiation.
//!
//! Identity checks run over [`BigRational`]; lattice sums run over `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Relative slack used by `f64` when deciding that a residue is zero.
pub const FLOAT_ZERO_REL: f64 = 1e-11;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for the exact (rational) instantiation.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    fn to_f64(&self) -> f64;
    /// Exact image of a finite `f64` (every finite double is a dyadic rational).
    fn from_f64(v: f64) -> Self;

    /// Integer power; negative exponents invert.
    fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    /// Rational power. `None` when the result is not representable
    /// (exact mode with a fractional exponent that has no exact root).
    fn pow_ratio(&self, e: Ratio<i64>) -> Option<Self>;

    /// Principal `n`-th root of a non-negative value, when representable.
    fn nth_root(&self, n: u32) -> Option<Self>;

    /// Zero test relative to a magnitude `scale` (exact: plain zero test).
    fn is_negligible(&self, scale: f64) -> bool;

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = self.to_f64().abs().max(other.to_f64().abs());
        (self.clone() - other.clone()).is_negligible(scale)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn powi(&self, e: i64) -> Self {
        f64::powi(*self, e as i32)
    }
    fn pow_ratio(&self, e: Ratio<i64>) -> Option<Self> {
        if e.is_integer() {
            Some(f64::powi(*self, *e.numer() as i32))
        } else {
            Some(self.powf(*e.numer() as f64 / *e.denom() as f64))
        }
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        if *self < 0.0 {
            return None;
        }
        Some(self.powf(1.0 / n as f64))
    }
    fn is_negligible(&self, scale: f64) -> bool {
        f64::abs(*self) <= FLOAT_ZERO_REL * scale.max(1.0)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }
    fn pow_ratio(&self, e: Ratio<i64>) -> Option<Self> {
        let base = if *e.denom() == 1 {
            self.clone()
        } else {
            self.nth_root(u32::try_from(*e.denom()).ok()?)?
        };
        Some(Scalar::powi(&base, *e.numer()))
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let num = self.numer().nth_root(n);
        let den = self.denom().nth_root(n);
        let root = BigRational::new(num, den);
        (Scalar::powi(&root, n as i64) == *self).then_some(root)
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                // Shift both sides down until they fit.
                let bits = self.numer().bits().max(self.denom().bits());
                let shift = bits.saturating_sub(1000);
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }
}

/// Binomial coefficient `n choose 2` for signed arguments.
pub fn choose2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// Parse `"1/2"`, `"-3"` or a terminating decimal like `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp10) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let all = all / BigInt::from(10);
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut value = BigRational::from_integer(all) * Scalar::powi(&ten, scale as i64);
    if neg {
        value = -value;
    }
    Some(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_fraction_and_decimal() {
        assert_eq!(parse_rational("1/2"), Some(BigRational::from_ratio(1, 2)));
        assert_eq!(parse_rational("0.25"), Some(BigRational::from_ratio(1, 4)));
        assert_eq!(parse_rational("-1.5e1"), Some(BigRational::from_i64(-15)));
        assert_eq!(parse_rational("3"), Some(BigRational::from_i64(3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn exact_roots() {
        let x = BigRational::from_ratio(9, 4);
        assert_eq!(x.nth_root(2), Some(BigRational::from_ratio(3, 2)));
        assert_eq!(BigRational::from_i64(2).nth_root(2), None);
        assert_eq!(
            x.pow_ratio(Ratio::new(-3, 2)),
            Some(BigRational::from_ratio(8, 27))
        );
    }

    #[test]
    fn integer_powers_agree() {
        let q = BigRational::from_ratio(2, 3);
        assert_eq!(Scalar::powi(&q, -2), BigRational::from_ratio(9, 4));
        assert_eq!(Scalar::powi(&0.5f64, -3), 8.0);
    }
}
