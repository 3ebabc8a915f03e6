use std::ops::{Div, Mul};

/// A real number stored as `sign · exp(ln)`; products of q-exponentials on
/// far lattice points leave the `f64` range long before they stop mattering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub sign: f64,
    pub ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0.0,
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue { sign: 1.0, ln: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: v.signum(),
                ln: v.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    /// `self + other` without leaving log form.
    pub fn add(self, other: LogValue) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.ln >= other.ln {
            (self, other)
        } else {
            (other, self)
        };
        let rest = 1.0 + hi.sign * lo.sign * (lo.ln - hi.ln).exp();
        if rest == 0.0 {
            return Self::ZERO;
        }
        Self {
            sign: hi.sign * rest.signum(),
            ln: hi.ln + rest.abs().ln(),
        }
    }

    pub fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }

    pub fn recip(self) -> Self {
        Self {
            sign: self.sign,
            ln: -self.ln,
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue {
            sign: self.sign * rhs.sign,
            ln: self.ln + rhs.ln,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        self * rhs.recip()
    }
}
