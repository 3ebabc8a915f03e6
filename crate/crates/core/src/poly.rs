//! Sparse bivariate polynomials with exact or floating coefficients.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;

/// Which of the two polynomial variables an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Var {
    /// First variable (`x`, or `r` on the transform side).
    First,
    /// Second variable (`y`, or `s` on the transform side).
    Second,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::First => Var::Second,
            Var::Second => Var::First,
        }
    }
}

/// Bivariate polynomial `Σ c_ij x^i y^j`. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct QPoly2<T> {
    terms: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> Default for QPoly2<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> QPoly2<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn monomial(c: T, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    /// The variable `x` (`Var::First`) or `y` (`Var::Second`).
    pub fn var(v: Var) -> Self {
        match v {
            Var::First => Self::monomial(T::one(), 1, 0),
            Var::Second => Self::monomial(T::one(), 0, 1),
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), T)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&(i, j)) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert((i, j), sum);
                }
            }
            None => {
                self.terms.insert((i, j), c);
            }
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> T {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn degree_in(&self, v: Var) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| pick(v, i, j)).max()
    }

    /// Smallest exponent of `v` over all stored monomials.
    pub fn min_degree_in(&self, v: Var) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| pick(v, i, j)).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|(i, j)| i + j);
        match degrees.next() {
            Some(d) => degrees.all(|e| e == d),
            None => true,
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, v)| (k, v.clone() * c.clone())))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, a.clone() * b.clone());
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Multiply by `x^di y^dj`.
    pub fn shift(&self, di: u32, dj: u32) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(i, j), c)| ((i + di, j + dj), c.clone())))
    }

    /// Divide by `x^di y^dj`; caller guarantees divisibility.
    pub fn unshift(&self, di: u32, dj: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(&(i, j), c)| ((i - di, j - dj), c.clone())),
        )
    }

    /// `p(αx, βy)`.
    pub fn scale_vars(&self, alpha: &T, beta: &T) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(i, j), c)| {
            (
                (i, j),
                c.clone() * alpha.powi(i as i64) * beta.powi(j as i64),
            )
        }))
    }

    /// Drop every monomial of total degree above `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(i, j), _)| i + j <= max_degree)
                .map(|(&k, c)| (k, c.clone())),
        )
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (&(i, j), c)| {
            acc + c.clone() * x.powi(i as i64) * y.powi(j as i64)
        })
    }

    /// Substitute a polynomial for one variable, keeping the other.
    pub fn compose_var(&self, v: Var, value: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            let (d, keep) = match v {
                Var::First => (i, Self::monomial(c.clone(), 0, j)),
                Var::Second => (j, Self::monomial(c.clone(), i, 0)),
            };
            out = out.add(&keep.mul(&value.pow(d)));
        }
        out
    }

    pub fn map_coeffs<U: Scalar>(&self, f: impl Fn(&T) -> U) -> QPoly2<U> {
        QPoly2::from_terms(self.terms.iter().map(|(&k, c)| (k, f(c))))
    }

    /// Largest coefficient magnitude (as `f64`), for relative zero tests.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Remove coefficients that are negligible relative to `scale`.
    pub fn prune(&self, scale: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(_, c)| !c.is_negligible(scale))
                .map(|(&k, c)| (k, c.clone())),
        )
    }

    /// Long division by `divisor`, which must be monic in `v` (its only
    /// monomial of top `v`-degree is `v^d` with coefficient one).
    /// Returns `(quotient, remainder)` with `deg_v(remainder) < d`.
    pub fn div_rem_monic(&self, v: Var, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree_in(v).unwrap_or(0);
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(top) = rem.degree_in(v) {
            if top < d {
                break;
            }
            let lead = Self::from_terms(
                rem.terms
                    .iter()
                    .filter(|(&(i, j), _)| pick(v, i, j) == top)
                    .map(|(&(i, j), c)| {
                        let k = match v {
                            Var::First => (i - d, j),
                            Var::Second => (i, j - d),
                        };
                        (k, c.clone())
                    }),
            );
            quot = quot.add(&lead);
            rem = rem.sub(&lead.mul(divisor));
            // Float round-off can leave crumbs at the eliminated degree.
            rem.terms.retain(|&(i, j), _| pick(v, i, j) != top);
        }
        (quot, rem)
    }
}

fn pick(v: Var, i: u32, j: u32) -> u32 {
    match v {
        Var::First => i,
        Var::Second => j,
    }
}

impl<T: Scalar> fmt::Debug for QPoly2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Display for QPoly2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, "x", "y")
    }
}

impl<T: Scalar> QPoly2<T> {
    pub fn fmt_with(&self, f: &mut impl fmt::Write, x: &str, y: &str) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => write!(f, "*{x}")?,
                _ => write!(f, "*{x}^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*{y}")?,
                _ => write!(f, "*{y}^{j}")?,
            }
        }
        Ok(())
    }

    pub fn to_string_with(&self, x: &str, y: &str) -> String {
        let mut s = String::new();
        let _ = self.fmt_with(&mut s, x, y);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type P = QPoly2<BigRational>;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn no_zero_coefficients_stored() {
        let mut p = P::monomial(r(1, 1), 1, 0);
        p.add_term(1, 0, r(-1, 1));
        assert!(p.is_zero());
        assert_eq!(p.len(), 0);
    }

    #[test]
    fn division_by_mixed_linear_factor() {
        // (y^2 - x^2) / (y - x) = y + x
        let n = P::from_terms([((0, 2), r(1, 1)), ((2, 0), r(-1, 1))]);
        let d = P::from_terms([((0, 1), r(1, 1)), ((1, 0), r(-1, 1))]);
        let (q, rem) = n.div_rem_monic(Var::Second, &d);
        assert!(rem.is_zero());
        assert_eq!(q, P::from_terms([((0, 1), r(1, 1)), ((1, 0), r(1, 1))]));
    }

    #[test]
    fn division_leaves_remainder() {
        // (x^2 + 1) / (x - 2) = x + 2 rem 5
        let n = P::from_terms([((2, 0), r(1, 1)), ((0, 0), r(1, 1))]);
        let d = P::from_terms([((1, 0), r(1, 1)), ((0, 0), r(-2, 1))]);
        let (q, rem) = n.div_rem_monic(Var::First, &d);
        assert_eq!(q, P::from_terms([((1, 0), r(1, 1)), ((0, 0), r(2, 1))]));
        assert_eq!(rem, P::constant(r(5, 1)));
    }

    #[test]
    fn compose_substitutes_variable() {
        // x*y with x := (x + y) -> x*y + y^2
        let p = P::monomial(r(1, 1), 1, 1);
        let sum = P::var(Var::First).add(&P::var(Var::Second));
        assert_eq!(
            p.compose_var(Var::First, &sum),
            P::from_terms([((1, 1), r(1, 1)), ((0, 2), r(1, 1))])
        );
    }
}
