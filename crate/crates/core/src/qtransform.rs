//! One-variable q-Laplace transforms: first kind (kernel `E_q(−q s t)`)
//! and second kind (kernel `e_q(−s t)`).

use std::fmt;

use num_rational::{BigRational, Ratio};
use num_traits::Zero;

use crate::context::{QContext, QScalar};
use crate::error::{QError, Result, Tail};
use crate::logval::LogValue;
use crate::poly::Var;
use crate::qcalc::{improper_sum, LatticeFunction1D, LatticeSumPlan};
use crate::qcore::{q_fact, q_real};
use crate::qspecial::{
    gamma_product, gamma_second_lattice, ln_exp_big, ln_exp_small, ln_q_trig, TrigSelector,
};
use crate::rsexpr::{Factor, RSExpr, SExpr};
use crate::scalar::{choose2, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind1D {
    /// Kernel `E_q(−q s t)`.
    First,
    /// Kernel `e_q(−s t)`.
    Second,
}

impl Kind1D {
    /// Default lattice scale for frequency `s`.
    ///
    /// First kind: `(1−q)s`, where the kernel vanishes on every `k < 0`.
    /// Second kind: `s`, so that `t^α` images are `γ_q(α+1)/s^{α+1}`
    /// with `γ_q` taken on the unit lattice.
    pub fn default_scale(self, s: f64, q: f64) -> f64 {
        match self {
            Kind1D::First => (1.0 - q) * s,
            Kind1D::Second => s,
        }
    }

    pub fn kernel(self, s: f64, t: f64, ctx: &QContext) -> Result<LogValue> {
        match self {
            Kind1D::First => ln_exp_big(-ctx.q() * s * t, ctx),
            Kind1D::Second => ln_exp_small(-s * t, ctx),
        }
    }
}

/// A one-variable integrand the catalog knows.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom1D {
    Constant,
    /// `t^α`, `α > −1`.
    Monomial(Ratio<i64>),
    /// `e_q(a t)`.
    ExpSmall(f64),
    /// `E_q(a t)`.
    ExpBig(f64),
    /// `cos_q(a t)`, `Sinh_q(a t)`, ...
    Trig(TrigSelector, f64),
}

impl fmt::Display for Atom1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom1D::Constant => write!(f, "1"),
            Atom1D::Monomial(a) => write!(f, "t^({a})"),
            Atom1D::ExpSmall(a) => write!(f, "e_q({a}*t)"),
            Atom1D::ExpBig(a) => write!(f, "E_q({a}*t)"),
            Atom1D::Trig(sel, a) => write!(f, "{sel}({a}*t)"),
        }
    }
}

impl Atom1D {
    pub fn monomial(n: i64) -> Self {
        Atom1D::Monomial(Ratio::from_integer(n))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Atom1D::Monomial(a) if *a <= Ratio::from_integer(-1) => {
                Err(QError::Domain(format!("t^({a}) needs exponent > -1")))
            }
            Atom1D::ExpSmall(a) | Atom1D::ExpBig(a) | Atom1D::Trig(_, a) if !a.is_finite() => {
                Err(QError::Domain(format!("non-finite parameter {a}")))
            }
            _ => Ok(()),
        }
    }

    /// Pointwise value in log form (product forms throughout).
    pub fn eval_log(&self, t: f64, ctx: &QContext) -> Result<LogValue> {
        match self {
            Atom1D::Constant => Ok(LogValue::ONE),
            Atom1D::Monomial(a) => {
                if a.is_zero() {
                    return Ok(LogValue::ONE);
                }
                if t == 0.0 {
                    return Ok(LogValue::ZERO);
                }
                let e = *a.numer() as f64 / *a.denom() as f64;
                Ok(LogValue {
                    sign: if t < 0.0 && a.is_integer() && a.numer() % 2 != 0 {
                        -1.0
                    } else {
                        1.0
                    },
                    ln: e * t.abs().ln(),
                })
            }
            Atom1D::ExpSmall(a) => ln_exp_small(a * t, ctx),
            Atom1D::ExpBig(a) => ln_exp_big(a * t, ctx),
            Atom1D::Trig(sel, a) => ln_q_trig(a * t, *sel, ctx),
        }
    }

    pub fn eval(&self, t: f64, ctx: &QContext) -> Result<f64> {
        Ok(self.eval_log(t, ctx)?.to_f64())
    }

    pub fn to_lattice(&self, ctx: &QContext) -> LatticeFunction1D {
        let atom = self.clone();
        let ctx = ctx.clone();
        LatticeFunction1D::from_log(move |t| atom.eval_log(t, &ctx)).with_descriptor(self.clone())
    }

    /// Value at `t = 0`.
    pub fn at_zero(&self) -> f64 {
        match self {
            Atom1D::Monomial(a) if !a.is_zero() => 0.0,
            Atom1D::Trig(sel, _) if sel.is_odd() => 0.0,
            _ => 1.0,
        }
    }

    /// `D_q` of the atom as `c · atom'`; `None` when the derivative is zero.
    pub fn q_derivative(&self, q: f64) -> Option<(f64, Atom1D)> {
        match self {
            Atom1D::Constant => None,
            Atom1D::Monomial(a) => {
                if a.is_zero() {
                    return None;
                }
                let e = *a.numer() as f64 / *a.denom() as f64;
                Some((q_real(e, q), Atom1D::Monomial(a - 1)))
            }
            Atom1D::ExpSmall(a) => Some((*a, Atom1D::ExpSmall(*a))),
            Atom1D::ExpBig(a) => Some((*a, Atom1D::ExpBig(a * q))),
            Atom1D::Trig(sel, a) => {
                let partner = TrigSelector::build(sel.is_big(), !sel.is_odd(), sel.is_hyperbolic());
                let sign = if !sel.is_hyperbolic() && !sel.is_odd() {
                    -1.0
                } else {
                    1.0
                };
                let arg = if sel.is_big() { a * q } else { *a };
                Some((sign * a, Atom1D::Trig(partner, arg)))
            }
        }
    }

    /// Whether the parameters lie where the transform integral converges.
    pub fn in_region(&self, kind: Kind1D, s: f64, q: f64) -> bool {
        match (self, kind) {
            (Atom1D::Monomial(a), _) => *a > Ratio::from_integer(-1),
            (Atom1D::ExpSmall(a), Kind1D::First) => *a < s,
            (Atom1D::Trig(sel, a), Kind1D::First) if !sel.is_big() => a.abs() < s,
            (Atom1D::ExpBig(a), Kind1D::Second) => a.abs() < q * s,
            (Atom1D::Trig(sel, a), Kind1D::Second) if sel.is_big() => a.abs() < q * s,
            _ => true,
        }
    }
}

/// Numeric transform `∫_0^∞ f(t) K(s t) d_q t` on the kind's lattice.
pub fn qlap1d_numeric(
    f: &LatticeFunction1D,
    s: f64,
    kind: Kind1D,
    plan: Option<&LatticeSumPlan>,
    ctx: &QContext,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(QError::Domain(format!("transform variable {s} must be positive")));
    }
    if let Some(atom) = f.descriptor() {
        atom.validate()?;
        if !atom.in_region(kind, s, ctx.q()) {
            return Err(QError::Divergence {
                tail: Tail::LargeX,
                axis: None,
                detail: format!("{atom} lies outside the convergence region at s = {s}"),
            });
        }
    }
    let plan = match plan {
        Some(p) => p.clone(),
        None => LatticeSumPlan {
            tol: ctx.default_tol,
            ..LatticeSumPlan::with_scale(kind.default_scale(s, ctx.q()))
        },
    };
    improper_sum(&plan, ctx.q(), &|t| {
        let k = kind.kernel(s, t, ctx)?;
        if k.is_zero() {
            return Ok(LogValue::ZERO);
        }
        Ok(k * f.eval_log(t)?)
    })
}

fn gamma_first<T: QScalar>(alpha: Ratio<i64>, ctx: &QContext) -> Result<T> {
    if alpha.is_integer() {
        let n = u32::try_from(alpha.to_integer())
            .map_err(|_| QError::Domain(format!("t^({alpha})")))?;
        return Ok(q_fact(n, &ctx.q_as::<T>()?));
    }
    if T::EXACT {
        return Err(QError::UnsupportedExact(format!("Gamma_q({} + 1)", alpha)));
    }
    let t = *alpha.numer() as f64 / *alpha.denom() as f64 + 1.0;
    Ok(T::from_f64(gamma_product(t, ctx)?))
}

fn gamma_second<T: QScalar>(alpha: Ratio<i64>, ctx: &QContext) -> Result<T> {
    if alpha.is_integer() {
        let n = alpha.to_integer();
        let q = ctx.q_as::<T>()?;
        return Ok(q_fact(n as u32, &q) * q.powi(-choose2(n + 1)));
    }
    if T::EXACT {
        return Err(QError::UnsupportedExact(format!("gamma_q({} + 1)", alpha)));
    }
    let t = *alpha.numer() as f64 / *alpha.denom() as f64 + 1.0;
    Ok(T::from_f64(gamma_second_lattice(t, 1.0, &ctx.as_float())?))
}

/// Closed-form image of an atom, in the variable `s`.
pub fn qlap1d_catalog<T: QScalar>(atom: &Atom1D, kind: Kind1D, ctx: &QContext) -> Result<SExpr<T>> {
    atom.validate()?;
    let q = ctx.q_as::<T>()?;
    let miss = || QError::CatalogMiss(format!("{atom} under the {kind:?} kind"));
    let s = Var::Second;
    Ok(match (atom, kind) {
        (Atom1D::Constant, _) => SExpr::power(T::one(), Ratio::from_integer(1)),
        (Atom1D::Monomial(a), Kind1D::First) => SExpr::power(gamma_first(*a, ctx)?, a + 1),
        (Atom1D::Monomial(a), Kind1D::Second) => SExpr::power(gamma_second(*a, ctx)?, a + 1),
        (Atom1D::ExpSmall(a), Kind1D::First) => SExpr::pole(T::one(), T::from_f64(*a)),
        (Atom1D::ExpBig(a), Kind1D::Second) => SExpr::pole(T::one(), T::from_f64(*a) / q),
        (Atom1D::Trig(sel, a), _) => {
            if sel.is_big() != (kind == Kind1D::Second) {
                return Err(miss());
            }
            // Second-kind images are first-kind ones with `a` replaced by `a/q`.
            let a = match kind {
                Kind1D::First => T::from_f64(*a),
                Kind1D::Second => T::from_f64(*a) / q,
            };
            if sel.is_hyperbolic() {
                let half = T::from_ratio(1, 2);
                let sign = if sel.is_odd() { -T::one() } else { T::one() };
                SExpr::pole(half.clone(), a.clone())
                    .add(&SExpr::pole(half * sign, -a))
                    .normalize()
            } else {
                let num = if sel.is_odd() {
                    crate::poly::QPoly2::constant(a.clone())
                } else {
                    crate::poly::QPoly2::var(s)
                };
                SExpr(RSExpr::from_term(crate::rsexpr::Term::new(
                    num,
                    Ratio::zero(),
                    Ratio::zero(),
                    vec![Factor::quad(s, a.clone() * a)],
                )))
                .normalize()
            }
        }
        _ => return Err(miss()),
    })
}

/// Exact catalog image, for exact-mode callers.
pub fn qlap1d_catalog_exact(atom: &Atom1D, kind: Kind1D, ctx: &QContext) -> Result<SExpr<BigRational>> {
    qlap1d_catalog(atom, kind, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: f64) -> QContext {
        QContext::float(q).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn constant_first_kind() {
        for &q in &[0.3, 0.5, 0.7] {
            let c = ctx(q);
            for &s in &[0.5, 1.0, 2.0, 5.0] {
                let v = qlap1d_numeric(&Atom1D::Constant.to_lattice(&c), s, Kind1D::First, None, &c).unwrap();
                assert!(rel(v, 1.0 / s) < 1e-12, "q={q} s={s} v={v}");
            }
        }
    }

    #[test]
    fn cube_first_kind() {
        let c = ctx(0.5);
        let v = qlap1d_numeric(&Atom1D::monomial(3).to_lattice(&c), 2.0, Kind1D::First, None, &c).unwrap();
        assert!(rel(v, 21.0 / 8.0 / 16.0) < 1e-11);
    }

    #[test]
    fn big_exponential_with_zero_rate() {
        let c = ctx(0.5);
        let v = qlap1d_numeric(&Atom1D::ExpBig(0.0).to_lattice(&c), 1.0, Kind1D::Second, None, &c).unwrap();
        assert!(rel(v, 1.0) < 1e-12);
    }

    #[test]
    fn catalog_examples() {
        let e = QContext::exact(BigRational::from_ratio(1, 2)).unwrap();
        let one = qlap1d_catalog_exact(&Atom1D::Constant, Kind1D::First, &e).unwrap();
        assert_eq!(one, SExpr::power(BigRational::from_i64(1), Ratio::from_integer(1)));
        let m = qlap1d_catalog_exact(&Atom1D::monomial(3), Kind1D::First, &e).unwrap();
        assert_eq!(m, SExpr::power(BigRational::from_ratio(21, 8), Ratio::from_integer(4)));
        let b = qlap1d_catalog_exact(&Atom1D::ExpBig(0.25), Kind1D::Second, &e).unwrap();
        // q/(qs − a) = 1/(s − a/q)
        assert_eq!(b, SExpr::pole(BigRational::from_i64(1), BigRational::from_ratio(1, 2)));
        assert!(matches!(
            qlap1d_catalog_exact(&Atom1D::ExpBig(0.25), Kind1D::First, &e),
            Err(QError::CatalogMiss(_))
        ));
    }

    #[test]
    fn out_of_region_is_divergence() {
        let c = ctx(0.5);
        let err = qlap1d_numeric(&Atom1D::ExpSmall(3.0).to_lattice(&c), 2.0, Kind1D::First, None, &c)
            .unwrap_err();
        assert!(matches!(err, QError::Divergence { .. }));
    }

    #[test]
    fn derivative_image_first_kind() {
        // L[D_q f](s) = s L[f](s) − f(0) for f = 1 + 2t + t^3
        let c = ctx(0.6);
        let q = 0.6;
        let f = LatticeFunction1D::new(|t| 1.0 + 2.0 * t + t * t * t);
        let df = LatticeFunction1D::new(move |t| 2.0 + q_real(3.0, q) * t * t);
        for &s in &[0.5, 1.0, 2.0] {
            let lhs = qlap1d_numeric(&df, s, Kind1D::First, None, &c).unwrap();
            let rhs = s * qlap1d_numeric(&f, s, Kind1D::First, None, &c).unwrap() - 1.0;
            assert!(rel(lhs, rhs) < 1e-9);
        }
    }
}
