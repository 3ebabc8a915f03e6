//! Closed-form transform images: sums of `N(r,s) / (r^p s^m Π factors)`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;

use crate::poly::{QPoly2, Var};
use crate::scalar::Scalar;

/// Relative size below which a float remainder counts as an exact division.
const FLOAT_CANCEL_REL: f64 = 1e-10;
/// Relative tolerance for float structural comparison.
const FLOAT_MATCH_REL: f64 = 1e-8;

/// A monic denominator factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor<T> {
    /// `v − root`
    Lin { var: Var, root: T },
    /// `v² + c`
    Quad { var: Var, c: T },
    /// `s − λ r`
    Mixed { lambda: T },
}

impl<T: Scalar> Factor<T> {
    pub fn lin(var: Var, root: T) -> Self {
        Factor::Lin { var, root }
    }

    pub fn quad(var: Var, c: T) -> Self {
        Factor::Quad { var, c }
    }

    pub fn poly(&self) -> QPoly2<T> {
        match self {
            Factor::Lin { var, root } => QPoly2::var(*var).sub(&QPoly2::constant(root.clone())),
            Factor::Quad { var, c } => QPoly2::var(*var)
                .pow(2)
                .add(&QPoly2::constant(c.clone())),
            Factor::Mixed { lambda } => QPoly2::var(Var::Second)
                .sub(&QPoly2::var(Var::First).scale(lambda)),
        }
    }

    /// Variable in which the factor is monic.
    pub fn main_var(&self) -> Var {
        match self {
            Factor::Lin { var, .. } | Factor::Quad { var, .. } => *var,
            Factor::Mixed { .. } => Var::Second,
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            Factor::Quad { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, Factor::Mixed { .. })
    }

    pub fn eval(&self, r: &T, s: &T) -> T {
        match self {
            Factor::Lin { var, root } => pick(*var, r, s).clone() - root.clone(),
            Factor::Quad { var, c } => {
                let v = pick(*var, r, s);
                v.clone() * v.clone() + c.clone()
            }
            Factor::Mixed { lambda } => s.clone() - lambda.clone() * r.clone(),
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Factor::Lin { var: a, root: x }, Factor::Lin { var: b, root: y })
            | (Factor::Quad { var: a, c: x }, Factor::Quad { var: b, c: y }) => {
                a == b && close(x, y)
            }
            (Factor::Mixed { lambda: x }, Factor::Mixed { lambda: y }) => close(x, y),
            _ => false,
        }
    }

    /// `v ↦ λ v`; returns the constant pulled out front and the new monic factor.
    fn substitute(&self, v: Var, lambda: &T) -> (T, Factor<T>) {
        match self {
            Factor::Lin { var, root } if *var == v => (
                lambda.clone(),
                Factor::Lin {
                    var: *var,
                    root: root.clone() / lambda.clone(),
                },
            ),
            Factor::Quad { var, c } if *var == v => {
                let l2 = lambda.clone() * lambda.clone();
                (
                    l2.clone(),
                    Factor::Quad {
                        var: *var,
                        c: c.clone() / l2,
                    },
                )
            }
            Factor::Mixed { lambda: mu } => match v {
                Var::First => (
                    T::one(),
                    Factor::Mixed {
                        lambda: mu.clone() * lambda.clone(),
                    },
                ),
                Var::Second => (
                    lambda.clone(),
                    Factor::Mixed {
                        lambda: mu.clone() / lambda.clone(),
                    },
                ),
            },
            other => (T::one(), other.clone()),
        }
    }

    fn sort_key(&self) -> (u8, Var, f64) {
        match self {
            Factor::Lin { var, root } => (0, *var, root.to_f64()),
            Factor::Quad { var, c } => (1, *var, c.to_f64()),
            Factor::Mixed { lambda } => (2, Var::Second, lambda.to_f64()),
        }
    }

    fn map<U: Scalar>(&self, f: &impl Fn(&T) -> U) -> Factor<U> {
        match self {
            Factor::Lin { var, root } => Factor::Lin {
                var: *var,
                root: f(root),
            },
            Factor::Quad { var, c } => Factor::Quad { var: *var, c: f(c) },
            Factor::Mixed { lambda } => Factor::Mixed { lambda: f(lambda) },
        }
    }

    fn swap_vars(&self) -> Option<Self> {
        match self {
            Factor::Lin { var, root } => Some(Factor::Lin {
                var: var.other(),
                root: root.clone(),
            }),
            Factor::Quad { var, c } => Some(Factor::Quad {
                var: var.other(),
                c: c.clone(),
            }),
            Factor::Mixed { .. } => None,
        }
    }
}

impl<T: Scalar> fmt::Display for Factor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Lin { var, root } => write!(f, "({} - ({root}))", name(*var)),
            Factor::Quad { var, c } => write!(f, "({}^2 + ({c}))", name(*var)),
            Factor::Mixed { lambda } => write!(f, "(s - ({lambda})*r)"),
        }
    }
}

fn name(v: Var) -> &'static str {
    match v {
        Var::First => "r",
        Var::Second => "s",
    }
}

fn pick<'a, T>(v: Var, r: &'a T, s: &'a T) -> &'a T {
    match v {
        Var::First => r,
        Var::Second => s,
    }
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    if T::EXACT {
        a == b
    } else {
        let (a, b) = (a.to_f64(), b.to_f64());
        (a - b).abs() <= FLOAT_MATCH_REL * a.abs().max(b.abs()).max(1.0)
    }
}

/// `num / (r^r_pow · s^s_pow · Π factors)`.
#[derive(Clone, PartialEq)]
pub struct Term<T> {
    pub num: QPoly2<T>,
    pub r_pow: Ratio<i64>,
    pub s_pow: Ratio<i64>,
    pub factors: Vec<Factor<T>>,
}

impl<T: Scalar> Term<T> {
    pub fn new(num: QPoly2<T>, r_pow: Ratio<i64>, s_pow: Ratio<i64>, factors: Vec<Factor<T>>) -> Self {
        Self {
            num,
            r_pow,
            s_pow,
            factors,
        }
    }

    /// `c / (r^p s^m)`.
    pub fn monomial(c: T, p: Ratio<i64>, m: Ratio<i64>) -> Self {
        Self::new(QPoly2::constant(c), p, m, Vec::new())
    }

    pub fn eval(&self, r: &T, s: &T) -> Option<T> {
        let mut den = r.pow_ratio(self.r_pow)? * s.pow_ratio(self.s_pow)?;
        for f in &self.factors {
            den = den * f.eval(r, s);
        }
        Some(self.num.eval(r, s) / den)
    }

    pub fn denominator(&self) -> QPoly2<T> {
        self.factors.iter().fold(QPoly2::one(), |acc, f| acc.mul(&f.poly()))
    }

    fn class(&self) -> (Ratio<i64>, Ratio<i64>) {
        (self.r_pow.fract(), self.s_pow.fract())
    }

    /// Move common powers of `r`, `s` out of the numerator and turn zero
    /// roots into powers.
    fn tidy(mut self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        let mut kept = Vec::with_capacity(self.factors.len());
        for f in self.factors.drain(..) {
            match &f {
                Factor::Lin { var, root } if root.is_zero() => match var {
                    Var::First => self.r_pow += 1,
                    Var::Second => self.s_pow += 1,
                },
                Factor::Mixed { lambda } if lambda.is_zero() => self.s_pow += 1,
                _ => kept.push(f),
            }
        }
        self.factors = kept;
        // Canonical: powers non-negative, and the numerator keeps a factor
        // `v` only when less than one power of `v` is left to cancel it.
        for v in [Var::First, Var::Second] {
            let pow = match v {
                Var::First => &mut self.r_pow,
                Var::Second => &mut self.s_pow,
            };
            if *pow < Ratio::zero() {
                let up = (-*pow).ceil().to_integer() as u32;
                self.num = match v {
                    Var::First => self.num.shift(up, 0),
                    Var::Second => self.num.shift(0, up),
                };
                *pow += up as i64;
            }
            let k = self
                .num
                .min_degree_in(v)
                .unwrap_or(0)
                .min(pow.floor().to_integer() as u32);
            if k > 0 {
                self.num = match v {
                    Var::First => self.num.unshift(k, 0),
                    Var::Second => self.num.unshift(0, k),
                };
                *pow -= k as i64;
            }
        }
        Some(self)
    }

    fn substitute(&self, v: Var, lambda: &T) -> Option<Self> {
        let (a, b) = match v {
            Var::First => (lambda.clone(), T::one()),
            Var::Second => (T::one(), lambda.clone()),
        };
        let mut num = self.num.scale_vars(&a, &b);
        let pow = match v {
            Var::First => self.r_pow,
            Var::Second => self.s_pow,
        };
        let mut front = lambda.pow_ratio(pow)?;
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let (c, g) = f.substitute(v, lambda);
            front = front * c;
            factors.push(g);
        }
        num = num.scale(&(T::one() / front));
        Some(Self::new(num, self.r_pow, self.s_pow, factors))
    }

    fn map<U: Scalar>(&self, f: &impl Fn(&T) -> U) -> Term<U> {
        Term {
            num: self.num.map_coeffs(f),
            r_pow: self.r_pow,
            s_pow: self.s_pow,
            factors: self.factors.iter().map(|g| g.map(f)).collect(),
        }
    }

    fn approx_eq(&self, other: &Self) -> bool {
        if self.r_pow != other.r_pow || self.s_pow != other.s_pow {
            return false;
        }
        if self.factors.len() != other.factors.len()
            || !self.factors.iter().zip(&other.factors).all(|(a, b)| a.approx_eq(b))
        {
            return false;
        }
        if T::EXACT {
            return self.num == other.num;
        }
        let scale = self.num.max_abs().max(other.num.max_abs());
        let diff = self.num.sub(&other.num);
        diff.max_abs() <= FLOAT_MATCH_REL * scale
    }
}

impl<T: Scalar> fmt::Display for Term<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.num.to_string_with("r", "s"))?;
        let mut den = Vec::new();
        if !self.r_pow.is_zero() {
            den.push(format!("r^({})", self.r_pow));
        }
        if !self.s_pow.is_zero() {
            den.push(format!("s^({})", self.s_pow));
        }
        den.extend(self.factors.iter().map(|g| g.to_string()));
        if !den.is_empty() {
            write!(f, " / ({})", den.join(" "))?;
        }
        Ok(())
    }
}

/// A finite sum of [`Term`]s.
#[derive(Clone, PartialEq)]
pub struct RSExpr<T> {
    pub terms: Vec<Term<T>>,
}

impl<T: Scalar> Default for RSExpr<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> RSExpr<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_term(t: Term<T>) -> Self {
        Self { terms: vec![t] }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, Ratio::zero(), Ratio::zero())
    }

    /// `c / (r^p s^m)`.
    pub fn monomial(c: T, p: Ratio<i64>, m: Ratio<i64>) -> Self {
        Self::from_term(Term::monomial(c, p, m))
    }

    /// `c / Π factors`.
    pub fn rational(c: T, factors: Vec<Factor<T>>) -> Self {
        Self::from_term(Term::new(QPoly2::constant(c), Ratio::zero(), Ratio::zero(), factors))
    }

    /// A polynomial in `(r, s)`.
    pub fn poly(p: QPoly2<T>) -> Self {
        Self::from_term(Term::new(p, Ratio::zero(), Ratio::zero(), Vec::new()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.num.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    num: t.num.scale(c),
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// Multiply by a polynomial in `(r, s)`.
    pub fn mul_poly(&self, p: &QPoly2<T>) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    num: t.num.mul(p),
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(Term::new(
                    a.num.mul(&b.num),
                    a.r_pow + b.r_pow,
                    a.s_pow + b.s_pow,
                    factors,
                ));
            }
        }
        Self { terms }
    }

    /// `v ↦ λ v`. `None` when a fractional power of `λ` is not representable.
    pub fn substitute(&self, v: Var, lambda: &T) -> Option<Self> {
        Some(Self {
            terms: self
                .terms
                .iter()
                .map(|t| t.substitute(v, lambda))
                .collect::<Option<_>>()?,
        })
    }

    /// Exchange the roles of `r` and `s`. `None` with a mixed factor present.
    pub fn swap_vars(&self) -> Option<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Some(Term {
                    num: QPoly2::from_terms(t.num.terms().map(|(&(i, j), c)| ((j, i), c.clone()))),
                    r_pow: t.s_pow,
                    s_pow: t.r_pow,
                    factors: t.factors.iter().map(Factor::swap_vars).collect::<Option<_>>()?,
                })
            })
            .collect::<Option<_>>()?;
        Some(Self { terms })
    }

    pub fn eval(&self, r: &T, s: &T) -> Option<T> {
        self.terms
            .iter()
            .try_fold(T::zero(), |acc, t| Some(acc + t.eval(r, s)?))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> RSExpr<U> {
        RSExpr {
            terms: self.terms.iter().map(|t| t.map(&f)).collect(),
        }
    }

    pub fn to_f64(&self) -> RSExpr<f64> {
        self.map(|c| c.to_f64())
    }

    pub fn eval_f64(&self, r: f64, s: f64) -> f64 {
        self.to_f64().eval(&r, &s).unwrap_or(f64::NAN)
    }

    pub fn has_mixed(&self) -> bool {
        self.terms.iter().any(|t| t.factors.iter().any(Factor::is_mixed))
    }

    /// Canonical form: one term per fractional power class, common
    /// factors cancelled, conjugate linear pairs merged into quadratics.
    /// Evaluation is preserved exactly (exact scalars) or to rounding.
    pub fn normalize(&self) -> Self {
        let mut groups: BTreeMap<(Ratio<i64>, Ratio<i64>), Vec<Term<T>>> = BTreeMap::new();
        for t in &self.terms {
            if let Some(t) = t.clone().tidy() {
                let t = split_quads(t);
                groups.entry(t.class()).or_default().push(t);
            }
        }
        let mut terms = Vec::new();
        for (_, group) in groups {
            if let Some(t) = combine(group) {
                terms.push(t);
            }
        }
        Self { terms }
    }

    /// Structural equality after normalization (tolerant in float mode).
    pub fn same_as(&self, other: &Self) -> bool {
        let (a, b) = (self.normalize(), other.normalize());
        a.terms.len() == b.terms.len() && a.terms.iter().zip(&b.terms).all(|(x, y)| x.approx_eq(y))
    }
}

/// Replace `(v² − a²)` by `(v − a)(v + a)` when `a` is representable.
fn split_quads<T: Scalar>(mut t: Term<T>) -> Term<T> {
    let mut out = Vec::with_capacity(t.factors.len());
    for f in t.factors.drain(..) {
        match &f {
            Factor::Quad { var, c } if *c < T::zero() => match (-c.clone()).nth_root(2) {
                Some(a) => {
                    out.push(Factor::lin(*var, a.clone()));
                    out.push(Factor::lin(*var, -a));
                }
                None => out.push(f),
            },
            _ => out.push(f),
        }
    }
    t.factors = out;
    t
}

fn rem_is_zero<T: Scalar>(rem: &QPoly2<T>, num: &QPoly2<T>) -> bool {
    if T::EXACT {
        rem.is_zero()
    } else {
        rem.max_abs() <= FLOAT_CANCEL_REL * num.max_abs()
    }
}

fn combine<T: Scalar>(group: Vec<Term<T>>) -> Option<Term<T>> {
    let r_pow = group.iter().map(|t| t.r_pow).max()?;
    let s_pow = group.iter().map(|t| t.s_pow).max()?;
    // Least common denominator: each factor at its largest multiplicity.
    let mut lcd: Vec<Factor<T>> = Vec::new();
    for t in &group {
        let mut avail: Vec<bool> = vec![true; lcd.len()];
        for f in &t.factors {
            match lcd
                .iter()
                .enumerate()
                .position(|(i, g)| avail[i] && g.approx_eq(f))
            {
                Some(i) => avail[i] = false,
                None => {
                    lcd.push(f.clone());
                    avail.push(false);
                }
            }
        }
    }
    let mut num = QPoly2::zero();
    for t in &group {
        let mut missing: Vec<bool> = vec![true; lcd.len()];
        for f in &t.factors {
            if let Some(i) = lcd
                .iter()
                .enumerate()
                .position(|(i, g)| missing[i] && g.approx_eq(f))
            {
                missing[i] = false;
            }
        }
        let mut part = t.num.shift(
            (r_pow - t.r_pow).to_integer() as u32,
            (s_pow - t.s_pow).to_integer() as u32,
        );
        for (g, m) in lcd.iter().zip(missing) {
            if m {
                part = part.mul(&g.poly());
            }
        }
        num = num.add(&part);
    }
    if !T::EXACT {
        let scale = group.iter().map(|t| t.num.max_abs()).fold(0.0, f64::max);
        num = QPoly2::from_terms(
            num.terms()
                .filter(|(_, c)| c.to_f64().abs() > 1e-13 * scale)
                .map(|(&k, c)| (k, c.clone())),
        );
    }
    if num.is_zero() {
        return None;
    }
    // Cancel factors that divide the numerator.
    let mut factors = Vec::new();
    for f in lcd {
        let (quot, rem) = num.div_rem_monic(f.main_var(), &f.poly());
        if rem_is_zero(&rem, &num) {
            num = quot;
        } else {
            factors.push(f);
        }
    }
    let t = Term::new(num, r_pow, s_pow, factors).tidy()?;
    Some(canonical_factors(t))
}

/// Merge conjugate linear pairs and sort.
fn canonical_factors<T: Scalar>(mut t: Term<T>) -> Term<T> {
    let mut lins: Vec<Factor<T>> = Vec::new();
    let mut rest: Vec<Factor<T>> = Vec::new();
    for f in t.factors.drain(..) {
        match f {
            Factor::Lin { .. } => lins.push(f),
            other => rest.push(other),
        }
    }
    let mut used = vec![false; lins.len()];
    for i in 0..lins.len() {
        if used[i] {
            continue;
        }
        let Factor::Lin { var, root } = &lins[i] else { unreachable!() };
        let partner = (i + 1..lins.len()).find(|&j| {
            !used[j]
                && matches!(&lins[j], Factor::Lin { var: v2, root: r2 }
                    if v2 == var && close(&(r2.clone() + root.clone()), &T::zero()))
        });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
                rest.push(Factor::quad(*var, -(root.clone() * root.clone())));
            }
            None => {
                used[i] = true;
                rest.push(lins[i].clone());
            }
        }
    }
    rest.sort_by(|a, b| {
        let (ka, kb) = (a.sort_key(), b.sort_key());
        (ka.0, ka.1)
            .cmp(&(kb.0, kb.1))
            .then(ka.2.partial_cmp(&kb.2).unwrap_or(std::cmp::Ordering::Equal))
    });
    t.factors = rest;
    t
}

impl<T: Scalar> fmt::Display for RSExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A one-variable image in `s`: an [`RSExpr`] that never mentions `r`.
#[derive(Clone, PartialEq)]
pub struct SExpr<T>(pub RSExpr<T>);

impl<T: Scalar> SExpr<T> {
    pub fn zero() -> Self {
        Self(RSExpr::zero())
    }

    /// `c / s^p`.
    pub fn power(c: T, p: Ratio<i64>) -> Self {
        Self(RSExpr::monomial(c, Ratio::zero(), p))
    }

    /// `c / (s − a)`.
    pub fn pole(c: T, a: T) -> Self {
        Self(RSExpr::rational(c, vec![Factor::lin(Var::Second, a)]))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self(self.0.scale(c))
    }

    pub fn normalize(&self) -> Self {
        Self(self.0.normalize())
    }

    pub fn eval(&self, s: &T) -> Option<T> {
        self.0.eval(&T::one(), s)
    }

    /// The same expression written in `r` (`Var::First`) or `s`.
    pub fn in_var(&self, v: Var) -> RSExpr<T> {
        match v {
            Var::Second => self.0.clone(),
            Var::First => self.0.swap_vars().expect("one-variable images have no mixed factors"),
        }
    }

    /// `F(r) G(s)`.
    pub fn tensor(&self, other: &Self) -> RSExpr<T> {
        self.in_var(Var::First).mul(&other.0)
    }
}

impl<T: Scalar> fmt::Display for SExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<T: Scalar> fmt::Debug for Term<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Debug for RSExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Debug for SExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Integer exponent.
pub fn ratio(n: i64) -> Ratio<i64> {
    Ratio::from_integer(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type E = RSExpr<BigRational>;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn points() -> Vec<(BigRational, BigRational)> {
        vec![
            (q(7, 3), q(5, 2)),
            (q(11, 4), q(13, 5)),
            (q(17, 6), q(9, 7)),
            (q(3, 1), q(23, 8)),
            (q(29, 9), q(31, 10)),
        ]
    }

    #[test]
    fn monomial_numerator_cancels() {
        // rs / (r^2 s^2) = 1/(rs)
        let e = E::from_term(Term::new(
            QPoly2::monomial(q(1, 1), 1, 1),
            ratio(2),
            ratio(2),
            vec![],
        ));
        let n = e.normalize();
        assert_eq!(n, E::monomial(q(1, 1), ratio(1), ratio(1)));
        for (r, s) in points() {
            assert_eq!(e.eval(&r, &s), n.eval(&r, &s));
        }
    }

    #[test]
    fn conjugate_poles_merge() {
        let b = q(3, 2);
        let c = q(5, 1);
        let e = E::rational(c.clone(), vec![Factor::lin(Var::Second, b.clone())]).add(&E::rational(
            c.clone(),
            vec![Factor::lin(Var::Second, -b.clone())],
        ));
        let n = e.normalize();
        let want = E::from_term(Term::new(
            QPoly2::monomial(q(10, 1), 0, 1),
            ratio(0),
            ratio(0),
            vec![Factor::quad(Var::Second, -(b.clone() * b))],
        ));
        assert_eq!(n, want);
        for (r, s) in points() {
            assert_eq!(e.eval(&r, &s), n.eval(&r, &s));
        }
    }

    #[test]
    fn zero_terms_vanish() {
        let e = E::monomial(q(1, 1), ratio(1), ratio(1)).add(&E::monomial(q(0, 1), ratio(2), ratio(1)));
        assert_eq!(e.normalize(), E::monomial(q(1, 1), ratio(1), ratio(1)));
        let z = E::monomial(q(2, 1), ratio(1), ratio(0)).sub(&E::monomial(q(2, 1), ratio(1), ratio(0)));
        assert!(z.normalize().terms.is_empty());
    }

    #[test]
    fn mixed_factor_cancels_against_difference() {
        // (1/r - 1/s) / (s - r) = 1/(rs)
        let diff = E::monomial(q(1, 1), ratio(1), ratio(0)).sub(&E::monomial(q(1, 1), ratio(0), ratio(1)));
        let e = diff.mul(&E::rational(q(1, 1), vec![Factor::Mixed { lambda: q(1, 1) }]));
        assert_eq!(e.normalize(), E::monomial(q(1, 1), ratio(1), ratio(1)));
    }

    #[test]
    fn substitution_is_exact() {
        let e = E::rational(q(1, 1), vec![Factor::lin(Var::First, q(1, 3)), Factor::quad(Var::Second, q(4, 1))])
            .mul(&E::monomial(q(2, 1), ratio(2), ratio(1)));
        let lam = q(2, 1);
        let sub = e.substitute(Var::First, &lam).unwrap();
        for (r, s) in points() {
            assert_eq!(sub.eval(&r, &s), e.eval(&(r.clone() * lam.clone()), &s));
        }
    }

    #[test]
    fn float_comparison_tolerates_rounding() {
        let a = RSExpr::<f64>::rational(1.0, vec![Factor::lin(Var::First, 0.1 + 0.2)]);
        let b = RSExpr::<f64>::rational(1.0, vec![Factor::lin(Var::First, 0.3)]);
        assert!(a.same_as(&b));
        assert!(!a.same_as(&RSExpr::rational(1.0, vec![Factor::lin(Var::First, 0.31)])));
    }
}
