//! Basic hypergeometric series, the two q-exponentials, the eight
//! q-trigonometric functions and the two q-Gamma functions.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::context::QContext;
use crate::error::{QError, Result};
use crate::logval::LogValue;
use crate::qcalc::{improper_sum, LatticeSumPlan};
use crate::qcore::{ln_pochhammer_inf, pochhammer_inf, q_fact, q_real, QValue};
use crate::scalar::{choose2, Scalar};

/// Factors of a product closer to zero than this are treated as poles.
const POLE_EPS: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigSelector {
    CosSmall,
    SinSmall,
    CosBig,
    SinBig,
    CoshSmall,
    SinhSmall,
    CoshBig,
    SinhBig,
}

impl TrigSelector {
    pub const ALL: [TrigSelector; 8] = [
        TrigSelector::CosSmall,
        TrigSelector::SinSmall,
        TrigSelector::CosBig,
        TrigSelector::SinBig,
        TrigSelector::CoshSmall,
        TrigSelector::SinhSmall,
        TrigSelector::CoshBig,
        TrigSelector::SinhBig,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrigSelector::CosSmall => "cos_small",
            TrigSelector::SinSmall => "sin_small",
            TrigSelector::CosBig => "cos_big",
            TrigSelector::SinBig => "sin_big",
            TrigSelector::CoshSmall => "cosh_small",
            TrigSelector::SinhSmall => "sinh_small",
            TrigSelector::CoshBig => "cosh_big",
            TrigSelector::SinhBig => "sinh_big",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == text)
    }

    /// E_q family (`Cos_q`, `Sin_q`, ...).
    pub fn is_big(self) -> bool {
        matches!(
            self,
            TrigSelector::CosBig | TrigSelector::SinBig | TrigSelector::CoshBig | TrigSelector::SinhBig
        )
    }

    pub fn is_odd(self) -> bool {
        matches!(
            self,
            TrigSelector::SinSmall | TrigSelector::SinBig | TrigSelector::SinhSmall | TrigSelector::SinhBig
        )
    }

    pub fn is_hyperbolic(self) -> bool {
        matches!(
            self,
            TrigSelector::CoshSmall
                | TrigSelector::SinhSmall
                | TrigSelector::CoshBig
                | TrigSelector::SinhBig
        )
    }

    /// The selector with the same parity and family, other trig/hyperbolic type.
    pub fn build(big: bool, odd: bool, hyperbolic: bool) -> Self {
        match (big, odd, hyperbolic) {
            (false, false, false) => TrigSelector::CosSmall,
            (false, true, false) => TrigSelector::SinSmall,
            (true, false, false) => TrigSelector::CosBig,
            (true, true, false) => TrigSelector::SinBig,
            (false, false, true) => TrigSelector::CoshSmall,
            (false, true, true) => TrigSelector::SinhSmall,
            (true, false, true) => TrigSelector::CoshBig,
            (true, true, true) => TrigSelector::SinhBig,
        }
    }
}

impl fmt::Display for TrigSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `_rφ_s(upper; lower; q, z)`.
pub fn q_hypergeom(upper: &[f64], lower: &[f64], z: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let tol = ctx.default_tol;
    let power = 1 + lower.len() as i32 - upper.len() as i32;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    let mut qk = 1.0;
    for k in 0..ctx.max_terms {
        let mut ratio = z / (1.0 - qk * q);
        for a in upper {
            ratio *= 1.0 - a * qk;
        }
        for b in lower {
            let den = 1.0 - b * qk;
            if den.abs() <= POLE_EPS {
                return Err(QError::Pole(format!("lower parameter {b} hits q^-{k}")));
            }
            ratio /= den;
        }
        ratio *= (-qk).powi(power);
        term *= ratio;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        if !sum.is_finite() {
            break;
        }
        if term.abs() <= tol * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        qk *= q;
    }
    Err(QError::Convergence {
        what: format!("{}phi{} series at z = {z}", upper.len(), lower.len()),
        terms: ctx.max_terms,
    })
}

/// `e_q(z) = 1/((1−q)z; q)_∞`.
pub fn q_exp_small(z: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let mut a = (1.0 - q) * z;
    let mut prod = 1.0;
    for j in 0..ctx.max_terms {
        if a.abs() < ctx.default_tol {
            return Ok(1.0 / prod);
        }
        let factor = 1.0 - a;
        if factor.abs() <= POLE_EPS {
            return Err(QError::Pole(format!("e_q({z}) has a pole (factor {j})")));
        }
        prod *= factor;
        a *= q;
    }
    Err(QError::Convergence {
        what: format!("e_q({z})"),
        terms: ctx.max_terms,
    })
}

/// `E_q(z) = (−(1−q)z; q)_∞`.
pub fn q_exp_big(z: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    pochhammer_inf(-(1.0 - q) * z, q, ctx.default_tol, ctx.max_terms)
}

/// `e_q(z)` in log form; an exact zero of the reciprocal product is a pole.
pub fn ln_exp_small(z: f64, ctx: &QContext) -> Result<LogValue> {
    let q = ctx.q();
    let p = ln_pochhammer_inf((1.0 - q) * z, q, ctx.default_tol, ctx.max_terms)?;
    if p.is_zero() {
        return Err(QError::Pole(format!("e_q({z})")));
    }
    Ok(p.recip())
}

/// `E_q(z)` in log form. Vanishing factors give an exact zero.
pub fn ln_exp_big(z: f64, ctx: &QContext) -> Result<LogValue> {
    let q = ctx.q();
    ln_pochhammer_inf(-(1.0 - q) * z, q, ctx.default_tol, ctx.max_terms)
}

/// `ln |Π (1 + i t_j)|` and `arg Π (1 + i t_j)` for `t_j = (1−q) z q^j`.
fn imaginary_product(z: f64, ctx: &QContext) -> Result<(f64, f64)> {
    let q = ctx.q();
    let mut t = (1.0 - q) * z;
    let (mut ln, mut arg) = (0.0, 0.0);
    for _ in 0..ctx.max_terms {
        if t.abs() < ctx.default_tol {
            return Ok((ln, arg));
        }
        ln += t.hypot(1.0).ln();
        arg += t.atan();
        t *= q;
    }
    Err(QError::Convergence {
        what: format!("product for E_q(i*{z})"),
        terms: ctx.max_terms,
    })
}

/// `e_q(iz)`.
pub fn q_exp_small_imag(z: f64, ctx: &QContext) -> Result<Complex64> {
    // 1/(1 − it) = (1 + it)/(1 + t²): modulus inverts, argument is shared.
    let (ln, arg) = imaginary_product(z, ctx)?;
    Ok(Complex64::from_polar((-ln).exp(), arg))
}

/// `E_q(iz)`.
pub fn q_exp_big_imag(z: f64, ctx: &QContext) -> Result<Complex64> {
    let (ln, arg) = imaginary_product(z, ctx)?;
    Ok(Complex64::from_polar(ln.exp(), arg))
}

/// Product-form evaluation of a q-trigonometric function, in log form.
/// Valid on the whole real line; used for transform integrands.
pub fn ln_q_trig(z: f64, which: TrigSelector, ctx: &QContext) -> Result<LogValue> {
    if which.is_hyperbolic() {
        let (plus, minus) = if which.is_big() {
            (ln_exp_big(z, ctx)?, ln_exp_big(-z, ctx)?)
        } else {
            (ln_exp_small(z, ctx)?, ln_exp_small(-z, ctx)?)
        };
        let minus = if which.is_odd() {
            LogValue {
                sign: -minus.sign,
                ..minus
            }
        } else {
            minus
        };
        return Ok(plus.add(minus).scale(0.5));
    }
    let (ln, arg) = imaginary_product(z, ctx)?;
    let ln = if which.is_big() { ln } else { -ln };
    let part = if which.is_odd() { arg.sin() } else { arg.cos() };
    Ok(LogValue::from_f64(part) * LogValue { sign: 1.0, ln })
}

/// Power-series evaluation of a q-trigonometric function.
pub fn q_trig(z: f64, which: TrigSelector, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let tol = ctx.default_tol;
    let odd = which.is_odd();
    // term = c_m z^m with c_m = 1/[m]! or q^{C(m,2)}/[m]!
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut small = 0;
    let mut growth = 0;
    let mut last = 0.0f64;
    for m in 0..ctx.max_terms {
        if m > 0 {
            term *= z / q_real(m as f64, q);
            if which.is_big() {
                term *= q.powi(m as i32 - 1);
            }
        }
        if term.abs() > last && m > 0 {
            growth += 1;
        } else {
            growth = 0;
        }
        last = term.abs();
        if growth >= 10 && m >= 20 {
            return Err(QError::Convergence {
                what: format!("{which}({z}) series grows; |z|(1-q) = {}", z.abs() * (1.0 - q)),
                terms: m,
            });
        }
        if (m % 2 == 1) != odd {
            continue;
        }
        let sign = if !which.is_hyperbolic() && (m / 2) % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        let t = sign * term;
        sum += t;
        if t.abs() <= tol * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(QError::Convergence {
        what: format!("{which}({z}) series"),
        terms: ctx.max_terms,
    })
}

fn integer_arg(t: f64) -> Option<u32> {
    (t.fract() == 0.0 && t >= 1.0 && t <= 1_000.0).then_some(t as u32)
}

/// `Γ_q(t)`: exactly `[t−1]_q!` at integers, the product formula otherwise.
pub fn q_gamma_first(t: f64, ctx: &QContext) -> Result<QValue> {
    if !(t > 0.0) {
        return Err(QError::Domain(format!("Gamma_q({t}) needs t > 0")));
    }
    match (integer_arg(t), ctx.is_exact()) {
        (Some(n), true) => Ok(QValue::Exact(q_fact(n - 1, &ctx.q_as::<BigRational>()?))),
        (Some(n), false) => Ok(QValue::Float(q_fact(n - 1, &ctx.q()))),
        (None, true) => Err(QError::UnsupportedExact(format!("Gamma_q({t})"))),
        (None, false) => Ok(QValue::Float(gamma_product(t, ctx)?)),
    }
}

/// `(q;q)_∞ (1−q)^{1−t} / (q^t;q)_∞`.
pub fn gamma_product(t: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let num = pochhammer_inf(q, q, ctx.default_tol, ctx.max_terms)?;
    let den = pochhammer_inf(q.powf(t), q, ctx.default_tol, ctx.max_terms)?;
    Ok(num * (1.0 - q).powf(1.0 - t) / den)
}

/// `γ_q(t)`: `q^{−C(n,2)} Γ_q(n)` at integers, the lattice sum of
/// `x^{t−1} e_q(−x)` over `{q^k}` otherwise.
pub fn q_gamma_second(t: f64, ctx: &QContext) -> Result<QValue> {
    if !(t > 0.0) {
        return Err(QError::Domain(format!("gamma_q({t}) needs t > 0")));
    }
    match (integer_arg(t), ctx.is_exact()) {
        (Some(n), true) => {
            let q = ctx.q_as::<BigRational>()?;
            Ok(QValue::Exact(
                q_fact(n - 1, &q) * q.powi(-choose2(n as i64)),
            ))
        }
        (Some(n), false) => {
            let q = ctx.q();
            Ok(QValue::Float(q_fact(n - 1, &q) * q.powi(-choose2(n as i64) as i32)))
        }
        (None, true) => Err(QError::UnsupportedExact(format!("gamma_q({t})"))),
        (None, false) => Ok(QValue::Float(gamma_second_lattice(t, 1.0, ctx)?)),
    }
}

/// `(1−q) Σ_k x_k^t e_q(−x_k)` on the lattice `{q^k / scale}`.
pub fn gamma_second_lattice(t: f64, scale: f64, ctx: &QContext) -> Result<f64> {
    let plan = LatticeSumPlan {
        tol: ctx.default_tol,
        ..LatticeSumPlan::with_scale(scale)
    };
    improper_sum(&plan, ctx.q(), &|x| {
        Ok(ln_exp_small(-x, ctx)? * LogValue {
            sign: 1.0,
            ln: (t - 1.0) * x.ln(),
        })
    })
}
