use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{QError, Result};
use crate::scalar::{parse_rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// The deformation parameter together with the evaluation policy.
///
/// `q` is validated once here; every other module assumes `0 < q < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QContext {
    q: f64,
    q_exact: Option<BigRational>,
    mode: Mode,
    pub default_tol: f64,
    pub max_terms: usize,
}

pub const DEFAULT_TOL: f64 = 1e-16;
pub const DEFAULT_MAX_TERMS: usize = 20_000;

impl QContext {
    /// Floating context.
    pub fn float(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::InvalidQ(q.to_string()));
        }
        Ok(Self {
            q,
            q_exact: None,
            mode: Mode::Float,
            default_tol: DEFAULT_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    /// Exact context; floating routines still see `q` as the nearest `f64`.
    pub fn exact(q: BigRational) -> Result<Self> {
        if q <= BigRational::zero() || q >= BigRational::one() {
            return Err(QError::InvalidQ(q.to_string()));
        }
        Ok(Self {
            q: q.to_f64(),
            q_exact: Some(q),
            mode: Mode::Exact,
            default_tol: DEFAULT_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    /// Parse `"1/2"` or `"0.5"`. A parsable rational keeps its exact value
    /// even in float mode so that a later switch to exact is lossless.
    pub fn parse(q: &str, mode: Mode) -> Result<Self> {
        let rational = parse_rational(q).ok_or_else(|| QError::Parse(format!("bad q '{q}'")))?;
        let mut ctx = Self::exact(rational)?;
        ctx.mode = mode;
        Ok(ctx)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.default_tol = tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_exact(&self) -> Option<&BigRational> {
        self.q_exact.as_ref()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    /// A copy of this context in float mode.
    pub fn as_float(&self) -> Self {
        Self {
            mode: Mode::Float,
            ..self.clone()
        }
    }

    /// `q` in the requested scalar type.
    pub fn q_as<T: QScalar>(&self) -> Result<T> {
        T::q_from(self)
    }
}

/// Scalars that can be extracted from a [`QContext`].
pub trait QScalar: Scalar {
    fn q_from(ctx: &QContext) -> Result<Self>;
}

impl QScalar for f64 {
    fn q_from(ctx: &QContext) -> Result<Self> {
        Ok(ctx.q)
    }
}

impl QScalar for BigRational {
    fn q_from(ctx: &QContext) -> Result<Self> {
        ctx.q_exact
            .clone()
            .ok_or_else(|| QError::UnsupportedExact(format!("q = {} given as a float", ctx.q)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_q_outside_unit_interval() {
        assert!(QContext::float(1.0).is_err());
        assert!(QContext::float(0.0).is_err());
        assert!(QContext::float(-0.5).is_err());
        assert!(QContext::parse("3/2", Mode::Exact).is_err());
        assert!(QContext::parse("1", Mode::Float).is_err());
        assert!(QContext::float(0.5).is_ok());
    }

    #[test]
    fn parsed_context_keeps_exact_q() {
        let ctx = QContext::parse("2/3", Mode::Float).unwrap();
        assert_eq!(ctx.q_as::<BigRational>().unwrap(), BigRational::from_ratio(2, 3));
        assert!((ctx.q() - 2.0 / 3.0).abs() < 1e-16);
        assert!(QContext::float(0.3).unwrap().q_as::<BigRational>().is_err());
    }
}
