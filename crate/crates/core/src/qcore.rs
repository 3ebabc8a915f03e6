//! Exact q-combinatorics and the q-addition laws as bivariate polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::context::QContext;
use crate::error::{QError, Result};
use crate::logval::LogValue;
use crate::poly::QPoly2;
use crate::scalar::{choose2, Scalar};

/// A value produced in either scalar mode.
#[derive(Debug, Clone, PartialEq)]
pub enum QValue {
    Exact(BigRational),
    Float(f64),
}

impl QValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            QValue::Exact(v) => v.to_f64(),
            QValue::Float(v) => *v,
        }
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QValue::Exact(v) => write!(f, "{v}"),
            QValue::Float(v) => write!(f, "{v}"),
        }
    }
}

/// `[n]_q = (1 - q^n)/(1 - q)`; for `n ≥ 1` the finite sum `1 + q + … + q^{n-1}`.
pub fn q_int<T: Scalar>(n: i64, q: &T) -> T {
    if n >= 0 {
        let mut acc = T::zero();
        let mut p = T::one();
        for _ in 0..n {
            acc = acc + p.clone();
            p = p * q.clone();
        }
        acc
    } else {
        (T::one() - q.powi(n)) / (T::one() - q.clone())
    }
}

/// `[a]_q` for a real exponent.
pub fn q_real(a: f64, q: f64) -> f64 {
    (1.0 - q.powf(a)) / (1.0 - q)
}

/// `[n]_q! = Π_{k=1}^n [k]_q`, with `[0]_q! = 1`.
pub fn q_fact<T: Scalar>(n: u32, q: &T) -> T {
    (1..=n as i64).fold(T::one(), |acc, k| acc * q_int(k, q))
}

/// Gaussian binomial from factorials; zero outside `0 ≤ k ≤ n`.
pub fn q_binom<T: Scalar>(n: u32, k: i64, q: &T) -> T {
    if k < 0 || k > n as i64 {
        return T::zero();
    }
    let k = k as u32;
    q_fact(n, q) / (q_fact(k, q) * q_fact(n - k, q))
}

/// Integer coefficients of the Gaussian polynomial `[n choose k]` in `q`,
/// built by the q-Pascal rule `[n,k] = [n-1,k-1] + q^k [n-1,k]`.
pub fn gaussian_polynomial(n: u32, k: u32) -> Vec<BigInt> {
    if k > n {
        return vec![];
    }
    // rows[k] holds the coefficient vector of [m choose k] for the current m.
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for m in 1..=n {
        let mut next: Vec<Vec<BigInt>> = Vec::with_capacity(m as usize + 1);
        for j in 0..=m {
            let mut coeffs: Vec<BigInt> = Vec::new();
            let add_at = |coeffs: &mut Vec<BigInt>, shift: usize, src: &[BigInt]| {
                if coeffs.len() < shift + src.len() {
                    coeffs.resize(shift + src.len(), BigInt::zero());
                }
                for (i, c) in src.iter().enumerate() {
                    coeffs[shift + i] += c;
                }
            };
            if j >= 1 {
                add_at(&mut coeffs, 0, &rows[j as usize - 1]);
            }
            if j < m {
                add_at(&mut coeffs, j as usize, &rows[j as usize]);
            }
            next.push(coeffs);
        }
        rows = next;
    }
    rows.swap_remove(k as usize)
}

/// Evaluate the Gaussian polynomial at `q`.
pub fn q_binom_gaussian<T: Scalar>(n: u32, k: u32, q: &T) -> T {
    gaussian_polynomial(n, k)
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, c)| {
            let c = T::from_i64(i64::try_from(c).expect("gaussian coefficient fits i64"));
            acc + c * q.powi(i as i64)
        })
}

/// Finite Pochhammer `(a;q)_n = Π_{k<n} (1 - a q^k)`.
pub fn pochhammer<T: Scalar>(a: &T, q: &T, n: u32) -> T {
    let mut acc = T::one();
    let mut aq = a.clone();
    for _ in 0..n {
        acc = acc * (T::one() - aq.clone());
        aq = aq * q.clone();
    }
    acc
}

/// `(a;q)_∞`, truncated once `|a q^k| < tol`.
pub fn pochhammer_inf(a: f64, q: f64, tol: f64, max_terms: usize) -> Result<f64> {
    let mut acc = 1.0;
    let mut aq = a;
    for _ in 0..max_terms {
        if aq.abs() < tol {
            return Ok(acc);
        }
        acc *= 1.0 - aq;
        if acc == 0.0 {
            return Ok(0.0);
        }
        aq *= q;
    }
    Err(QError::Convergence {
        what: format!("({a};{q})_inf"),
        terms: max_terms,
    })
}

/// `(a;q)_∞` in log form. Factors within a few ulps of zero are snapped to an
/// exact zero so that lattice-adapted kernels vanish identically.
pub fn ln_pochhammer_inf(a: f64, q: f64, tol: f64, max_terms: usize) -> Result<LogValue> {
    let mut sign = 1.0;
    let mut ln = 0.0;
    let mut aq = a;
    for _ in 0..max_terms {
        if aq.abs() < tol {
            return Ok(LogValue { sign, ln });
        }
        let factor = 1.0 - aq;
        if factor.abs() <= 16.0 * f64::EPSILON * aq.abs().max(1.0) {
            return Ok(LogValue::ZERO);
        }
        if factor < 0.0 {
            sign = -sign;
        }
        ln += factor.abs().ln();
        aq *= q;
    }
    Err(QError::Convergence {
        what: format!("({a};{q})_inf"),
        terms: max_terms,
    })
}

/// Length argument of a Pochhammer symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PochCount {
    Finite(u32),
    Infinite,
    Real(f64),
}

pub fn q_number(a: f64, ctx: &QContext) -> Result<QValue> {
    if ctx.is_exact() {
        if a.fract() != 0.0 || !a.is_finite() {
            return Err(QError::UnsupportedExact(format!("[{a}]_q with non-integer a")));
        }
        Ok(QValue::Exact(q_int(a as i64, &ctx.q_as::<BigRational>()?)))
    } else {
        Ok(QValue::Float(q_real(a, ctx.q())))
    }
}

pub fn q_factorial(n: i64, ctx: &QContext) -> Result<QValue> {
    let n = u32::try_from(n).map_err(|_| QError::Domain(format!("[{n}]_q! needs n >= 0")))?;
    Ok(if ctx.is_exact() {
        QValue::Exact(q_fact(n, &ctx.q_as::<BigRational>()?))
    } else {
        QValue::Float(q_fact(n, &ctx.q()))
    })
}

pub fn q_binomial(n: i64, k: i64, ctx: &QContext) -> Result<QValue> {
    if n < 0 || k < 0 || k > n {
        return Err(QError::Domain(format!(
            "q-binomial [{n} choose {k}] needs 0 <= k <= n"
        )));
    }
    let n = n as u32;
    Ok(if ctx.is_exact() {
        QValue::Exact(q_binom(n, k, &ctx.q_as::<BigRational>()?))
    } else {
        QValue::Float(q_binom(n, k, &ctx.q()))
    })
}

pub fn q_pochhammer(a: &QValue, n: PochCount, ctx: &QContext) -> Result<QValue> {
    match (n, ctx.is_exact()) {
        (PochCount::Finite(n), true) => {
            let a = match a {
                QValue::Exact(a) => a.clone(),
                QValue::Float(f) => {
                    return Err(QError::UnsupportedExact(format!("float argument {f}")))
                }
            };
            Ok(QValue::Exact(pochhammer(&a, &ctx.q_as::<BigRational>()?, n)))
        }
        (PochCount::Finite(n), false) => Ok(QValue::Float(pochhammer(&a.to_f64(), &ctx.q(), n))),
        (_, true) => Err(QError::UnsupportedExact(
            "infinite or real-order Pochhammer".into(),
        )),
        (PochCount::Infinite, false) => Ok(QValue::Float(pochhammer_inf(
            a.to_f64(),
            ctx.q(),
            ctx.default_tol,
            ctx.max_terms,
        )?)),
        (PochCount::Real(alpha), false) => {
            let a = a.to_f64();
            let q = ctx.q();
            let num = pochhammer_inf(a, q, ctx.default_tol, ctx.max_terms)?;
            let den = pochhammer_inf(a * q.powf(alpha), q, ctx.default_tol, ctx.max_terms)?;
            if den == 0.0 {
                return Err(QError::Pole(format!("(a q^{alpha};q)_inf vanishes")));
            }
            Ok(QValue::Float(num / den))
        }
    }
}

/// The q-addition laws and q-power bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditionKind {
    /// Ward q-addition `x ⊕_q y`.
    WardAdd,
    /// `x ⊖_q y = x ⊕_q (−y)`.
    WardSub,
    /// Al-Salam q-coaddition `x ⊞_q y`.
    Coadd,
    /// `x ⊟_q y = x ⊞_q (−y)`.
    Cosub,
    /// q-power basis `(x ⊕ y)_q^n = Π (x + y q^i)`.
    QpowAdd,
    /// q-power basis `(x ⊖ y)_q^n = Π (x − y q^i)`.
    QpowSub,
}

impl AdditionKind {
    pub const ALL: [AdditionKind; 6] = [
        AdditionKind::WardAdd,
        AdditionKind::WardSub,
        AdditionKind::Coadd,
        AdditionKind::Cosub,
        AdditionKind::QpowAdd,
        AdditionKind::QpowSub,
    ];

    pub fn is_subtraction(self) -> bool {
        matches!(
            self,
            AdditionKind::WardSub | AdditionKind::Cosub | AdditionKind::QpowSub
        )
    }

    /// The additive law a subtraction is built from.
    pub fn additive(self) -> AdditionKind {
        match self {
            AdditionKind::WardSub => AdditionKind::WardAdd,
            AdditionKind::Cosub => AdditionKind::Coadd,
            AdditionKind::QpowSub => AdditionKind::QpowAdd,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdditionKind::WardAdd => "ward_add",
            AdditionKind::WardSub => "ward_sub",
            AdditionKind::Coadd => "coadd",
            AdditionKind::Cosub => "cosub",
            AdditionKind::QpowAdd => "qpow_add",
            AdditionKind::QpowSub => "qpow_sub",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == text)
    }

    /// Coefficient of `x^k y^{n−k}` in the degree-`n` expansion.
    pub fn coefficient<T: Scalar>(self, n: u32, k: u32, q: &T) -> T {
        let base = q_binom(n, k as i64, q);
        let (n_i, k_i) = (n as i64, k as i64);
        let weight = match self.additive() {
            AdditionKind::WardAdd => T::one(),
            AdditionKind::Coadd => q.powi(k_i * (k_i - n_i)),
            _ => q.powi(choose2(n_i - k_i)),
        };
        let sign = if self.is_subtraction() && (n - k) % 2 == 1 {
            -T::one()
        } else {
            T::one()
        };
        sign * base * weight
    }
}

/// Degree-`n` homogeneous polynomial of the selected q-addition law.
pub fn expand_q_addition<T: Scalar>(kind: AdditionKind, n: u32, q: &T) -> QPoly2<T> {
    QPoly2::from_terms((0..=n).map(|k| ((k, n - k), kind.coefficient(n, k, q))))
}

/// Literal product `Π_{i<n} (x ± y q^i)`.
pub fn q_power_basis_product<T: Scalar>(subtract: bool, n: u32, q: &T) -> QPoly2<T> {
    let mut acc = QPoly2::one();
    for i in 0..n {
        let c = if subtract {
            -q.powi(i as i64)
        } else {
            q.powi(i as i64)
        };
        let factor = QPoly2::from_terms([((1, 0), T::one()), ((0, 1), c)]);
        acc = acc.mul(&factor);
    }
    acc
}

/// `Σ_{n≤N} a_n w_n (αx ⋆ βy)^n` with `w_n = 1/[n]!` for Ward addition and
/// `q^{C(n,2)}/[n]!` for the coaddition. This is how a q-Taylor series is
/// applied to a q-sum.
pub fn series_q_compose<T: Scalar>(
    coeffs: &[T],
    kind: AdditionKind,
    alpha: &T,
    beta: &T,
    q: &T,
) -> Result<QPoly2<T>> {
    let coadd = match kind {
        AdditionKind::WardAdd => false,
        AdditionKind::Coadd => true,
        other => {
            return Err(QError::Domain(format!(
                "series composition is defined for ward_add and coadd, not {}",
                other.name()
            )))
        }
    };
    let mut out = QPoly2::zero();
    for (n, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let n = n as u32;
        let mut w = T::one() / q_fact(n, q);
        if coadd {
            w = w * q.powi(choose2(n as i64));
        }
        let term = expand_q_addition(kind, n, q).scale_vars(alpha, beta);
        out = out.add(&term.scale(&(a.clone() * w)));
    }
    Ok(out)
}

/// Truncated univariate series `Σ_{n≤N} c_n x^n` as a polynomial in `x`
/// (`Var::First`) or `y` (`Var::Second`).
pub fn univariate<T: Scalar>(coeffs: &[T], in_y: bool) -> QPoly2<T> {
    QPoly2::from_terms(coeffs.iter().enumerate().map(|(n, c)| {
        let n = n as u32;
        (if in_y { (0, n) } else { (n, 0) }, c.clone())
    }))
}

/// Power-series coefficients `1/[n]!` of `e_q`, up to degree `n_max`.
pub fn e_small_coeffs<T: Scalar>(n_max: u32, q: &T) -> Vec<T> {
    (0..=n_max).map(|n| T::one() / q_fact(n, q)).collect()
}

/// Power-series coefficients `q^{C(n,2)}/[n]!` of `E_q`.
pub fn e_big_coeffs<T: Scalar>(n_max: u32, q: &T) -> Vec<T> {
    (0..=n_max)
        .map(|n| q.powi(choose2(n as i64)) / q_fact(n, q))
        .collect()
}
