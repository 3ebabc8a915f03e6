//! q-derivatives and Jackson integrals.

use std::sync::Arc;

use crate::context::QContext;
use crate::error::{Axis, QError, Result, Tail};
use crate::logval::LogValue;
use crate::qtransform::Atom1D;
use crate::qtransform2::FunctionDescriptor;

type Eval1 = Arc<dyn Fn(f64) -> Result<LogValue> + Send + Sync>;
type Eval2 = Arc<dyn Fn(f64, f64) -> Result<LogValue> + Send + Sync>;

/// A function sampled on q-lattices.
///
/// Values are carried in log form so that integrands whose factors
/// separately overflow (a growing q-exponential against a decaying
/// kernel) still multiply correctly.
#[derive(Clone)]
pub struct LatticeFunction1D {
    eval: Eval1,
    descriptor: Option<Atom1D>,
}

impl LatticeFunction1D {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_log(move |x| Ok(LogValue::from_f64(f(x))))
    }

    pub fn fallible(f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self::from_log(move |x| f(x).map(LogValue::from_f64))
    }

    pub fn from_log(f: impl Fn(f64) -> Result<LogValue> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            descriptor: None,
        }
    }

    /// Tag the function with the catalog atom it evaluates.
    pub fn with_descriptor(mut self, atom: Atom1D) -> Self {
        self.descriptor = Some(atom);
        self
    }

    pub fn descriptor(&self) -> Option<&Atom1D> {
        self.descriptor.as_ref()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok((self.eval)(x)?.to_f64())
    }

    pub fn eval_log(&self, x: f64) -> Result<LogValue> {
        (self.eval)(x)
    }

    /// Pointwise product, kept in log form.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::from_log(move |x| {
            let fa = a(x)?;
            if fa.is_zero() {
                return Ok(LogValue::ZERO);
            }
            Ok(fa * b(x)?)
        })
    }
}

#[derive(Clone)]
pub struct LatticeFunction2D {
    eval: Eval2,
    descriptor: Option<FunctionDescriptor>,
}

impl LatticeFunction2D {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_log(move |x, y| Ok(LogValue::from_f64(f(x, y))))
    }

    pub fn fallible(f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self::from_log(move |x, y| f(x, y).map(LogValue::from_f64))
    }

    pub fn from_log(f: impl Fn(f64, f64) -> Result<LogValue> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            descriptor: None,
        }
    }

    pub fn with_descriptor(mut self, d: FunctionDescriptor) -> Self {
        self.descriptor = Some(d);
        self
    }

    pub fn descriptor(&self) -> Option<&FunctionDescriptor> {
        self.descriptor.as_ref()
    }

    /// `g(x) h(y)`.
    pub fn separable(g: &LatticeFunction1D, h: &LatticeFunction1D) -> Self {
        let (g, h) = (g.eval.clone(), h.eval.clone());
        Self::from_log(move |x, y| {
            let gx = g(x)?;
            if gx.is_zero() {
                return Ok(LogValue::ZERO);
            }
            Ok(gx * h(y)?)
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.eval)(x, y)?.to_f64())
    }

    pub fn eval_log(&self, x: f64, y: f64) -> Result<LogValue> {
        (self.eval)(x, y)
    }

    /// The section `x ↦ f(x, y)`.
    pub fn at_y(&self, y: f64) -> LatticeFunction1D {
        let f = self.eval.clone();
        LatticeFunction1D::from_log(move |x| f(x, y))
    }

    /// The section `y ↦ f(x, y)`.
    pub fn at_x(&self, x: f64) -> LatticeFunction1D {
        let f = self.eval.clone();
        LatticeFunction1D::from_log(move |y| f(x, y))
    }
}

/// Lattice `{q^k / scale : k_min ≤ k ≤ k_max}` with its stopping policy.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LatticeSumPlan {
    pub scale: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub tol: f64,
    pub consecutive_small: usize,
    pub divergence_guard: usize,
}

impl Default for LatticeSumPlan {
    fn default() -> Self {
        Self {
            scale: 1.0,
            k_min: -2_000,
            k_max: 20_000,
            tol: 1e-16,
            consecutive_small: 3,
            divergence_guard: 5,
        }
    }
}

impl LatticeSumPlan {
    pub fn with_scale(scale: f64) -> Self {
        Self {
            scale,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(QError::Domain(format!("lattice scale {} must be positive", self.scale)));
        }
        if self.k_min > 0 || self.k_max < 0 {
            return Err(QError::Domain(format!(
                "index window [{}, {}] must contain 0",
                self.k_min, self.k_max
            )));
        }
        if !(self.tol > 0.0) {
            return Err(QError::Domain("tolerance must be positive".into()));
        }
        if self.consecutive_small == 0 || self.divergence_guard == 0 {
            return Err(QError::Domain("stopping counts must be positive".into()));
        }
        Ok(())
    }

    pub fn point(&self, k: i64, q: f64) -> f64 {
        (k as f64 * q.ln() - self.scale.ln()).exp()
    }
}

/// `D_q^n f(x)`. At `x = 0` the value is the limit along `x = q^k`.
pub fn q_derivative(f: &LatticeFunction1D, x: f64, order: u32, ctx: &QContext) -> Result<f64> {
    if order == 0 {
        return f.eval(x);
    }
    let q = ctx.q();
    if x == 0.0 {
        return lattice_limit(|t| quotient(&|u| f.eval(u), t, order, q));
    }
    quotient(&|u| f.eval(u), x, order, q)
}

/// Iterated difference quotient from the samples `f(x q^j)`, `j ≤ n`.
fn quotient(f: &dyn Fn(f64) -> Result<f64>, x: f64, n: u32, q: f64) -> Result<f64> {
    let mut vals = (0..=n)
        .map(|j| f(x * q.powi(j as i32)))
        .collect::<Result<Vec<_>>>()?;
    for level in 0..n as usize {
        for j in 0..vals.len() - 1 - level {
            let xj = x * q.powi(j as i32);
            vals[j] = (vals[j] - vals[j + 1]) / ((1.0 - q) * xj);
        }
    }
    Ok(vals[0])
}

const LIMIT_TOL: f64 = 1e-9;
const LIMIT_ACCEPT: f64 = 1e-6;

/// Limit of `g(q^k)` as `k → ∞`, stopping when successive values settle or
/// when rounding noise starts to dominate the differences.
fn lattice_limit(g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let q_probe = 0.5f64;
    let mut prev = g(1.0)?;
    let mut prev_diff = f64::INFINITY;
    for k in 1..200 {
        let cur = g(q_probe.powi(k))?;
        let diff = (cur - prev).abs();
        let scale = cur.abs().max(1.0);
        if diff < LIMIT_TOL * scale {
            return Ok(cur);
        }
        if k > 3 && diff > prev_diff {
            if prev_diff < LIMIT_ACCEPT * scale {
                return Ok(prev);
            }
            return Err(QError::Limit(format!(
                "differences grew from {prev_diff:e} to {diff:e} at x = 2^-{k}"
            )));
        }
        prev = cur;
        prev_diff = diff;
    }
    Err(QError::Limit(format!("last difference {prev_diff:e}")))
}

/// `∂_x^{nx} ∂_y^{ny} f` at `point`, x-differences applied first.
pub fn q_partial(
    f: &LatticeFunction2D,
    point: (f64, f64),
    orders: (u32, u32),
    ctx: &QContext,
) -> Result<f64> {
    q_partial_ordered(f, point, orders, true, ctx)
}

/// As [`q_partial`], choosing which variable is differenced first.
pub fn q_partial_ordered(
    f: &LatticeFunction2D,
    point: (f64, f64),
    orders: (u32, u32),
    x_first: bool,
    ctx: &QContext,
) -> Result<f64> {
    let q = ctx.q();
    let (x, y) = point;
    let (nx, ny) = orders;
    if x == 0.0 && nx > 0 {
        return lattice_limit(|t| q_partial_ordered(f, (t, y), orders, x_first, ctx));
    }
    if y == 0.0 && ny > 0 {
        return lattice_limit(|t| q_partial_ordered(f, (x, t), orders, x_first, ctx));
    }
    if x_first {
        quotient(
            &|v| quotient(&|u| f.eval(u, v), x, nx, q),
            y,
            ny,
            q,
        )
    } else {
        quotient(
            &|u| quotient(&|v| f.eval(u, v), y, ny, q),
            x,
            nx,
            q,
        )
    }
}

/// `∫_a^b f d_q x` for `a, b ≥ 0`.
pub fn jackson_integral_finite(
    f: &LatticeFunction1D,
    a: f64,
    b: f64,
    ctx: &QContext,
    tol: f64,
) -> Result<f64> {
    if a < 0.0 || b < 0.0 {
        return Err(QError::Domain(format!("bounds [{a}, {b}] must be non-negative")));
    }
    if a == b {
        return Ok(0.0);
    }
    Ok(from_zero(f, b, ctx, tol)? - from_zero(f, a, ctx, tol)?)
}

fn from_zero(f: &LatticeFunction1D, z: f64, ctx: &QContext, tol: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let q = ctx.q();
    let mut sum = 0.0;
    let mut small = 0;
    let mut x = z;
    for _ in 0..ctx.max_terms {
        let term = (1.0 - q) * x * f.eval(x)?;
        if !term.is_finite() {
            return Err(QError::Divergence {
                tail: Tail::SmallX,
                axis: None,
                detail: format!("non-finite term at x = {x:e}"),
            });
        }
        sum += term;
        if term.abs() <= tol * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        x *= q;
        if x == 0.0 {
            return Ok(sum);
        }
    }
    Err(QError::Convergence {
        what: format!("Jackson sum on [0, {z}]"),
        terms: ctx.max_terms,
    })
}

/// `∫_0^∞ f d_q x` as `(1−q) Σ_k x_k f(x_k)` over the plan's lattice.
pub fn jackson_integral_improper(
    f: &LatticeFunction1D,
    plan: &LatticeSumPlan,
    ctx: &QContext,
) -> Result<f64> {
    improper_sum(plan, ctx.q(), &|x| f.eval_log(x))
}

/// Iterated double improper integral over the tensor lattice.
pub fn jackson_integral_improper_2d(
    f: &LatticeFunction2D,
    plan_x: &LatticeSumPlan,
    plan_y: &LatticeSumPlan,
    ctx: &QContext,
) -> Result<f64> {
    improper_sum_2d(plan_x, plan_y, ctx.q(), &|x, y| f.eval_log(x, y))
}

pub(crate) fn improper_sum_2d(
    plan_x: &LatticeSumPlan,
    plan_y: &LatticeSumPlan,
    q: f64,
    f: &dyn Fn(f64, f64) -> Result<LogValue>,
) -> Result<f64> {
    improper_sum(plan_y, q, &|y| {
        improper_sum(plan_x, q, &|x| f(x, y))
            .map(LogValue::from_f64)
            .map_err(|e| e.on_axis(Axis::X))
    })
    .map_err(|e| e.on_axis(Axis::Y))
}

/// Exact zeros end a tail only after this many in a row; isolated zeros of
/// the integrand must not pass for convergence.
const ZERO_RUN_STOP: usize = 12;

/// Tracks one tail of a bilateral sum: the stopping rule and growth guard.
struct TailWatch {
    tail: Tail,
    small_run: usize,
    zero_run: usize,
    growth_run: usize,
    last_ln: Option<f64>,
    last_step: Option<f64>,
}

enum Verdict {
    Continue,
    Stop,
}

impl TailWatch {
    fn new(tail: Tail) -> Self {
        Self {
            tail,
            small_run: 0,
            zero_run: 0,
            growth_run: 0,
            last_ln: None,
            last_step: None,
        }
    }

    fn observe(&mut self, plan: &LatticeSumPlan, term: f64, ln: f64, total: f64, x: f64) -> Result<Verdict> {
        if term.is_nan() || ln == f64::INFINITY || term.is_infinite() {
            return Err(QError::Divergence {
                tail: self.tail,
                axis: None,
                detail: format!("non-finite term at x = {x:e}"),
            });
        }
        if term == 0.0 {
            self.growth_run = 0;
            self.last_ln = None;
            self.last_step = None;
            self.zero_run += 1;
            return Ok(if self.zero_run >= ZERO_RUN_STOP {
                Verdict::Stop
            } else {
                Verdict::Continue
            });
        } else {
            self.zero_run = 0;
            if let Some(prev) = self.last_ln {
                let step = ln - prev;
                let accelerating = self.last_step.map_or(true, |s| step >= s - 1e-12);
                if step > 0.0 && accelerating {
                    self.growth_run += 1;
                } else {
                    self.growth_run = 0;
                }
                self.last_step = Some(step);
            }
            self.last_ln = Some(ln);
            if self.growth_run >= plan.divergence_guard {
                return Err(QError::Divergence {
                    tail: self.tail,
                    axis: None,
                    detail: format!(
                        "terms grew for {} consecutive lattice points with non-decreasing ratio; |term| = {:e} at x = {x:e}",
                        self.growth_run,
                        ln.exp()
                    ),
                });
            }
        }
        if term.abs() <= plan.tol * total.abs() {
            self.small_run += 1;
            if self.small_run >= plan.consecutive_small {
                return Ok(Verdict::Stop);
            }
        } else {
            self.small_run = 0;
        }
        Ok(Verdict::Continue)
    }
}

pub(crate) fn improper_sum(
    plan: &LatticeSumPlan,
    q: f64,
    f: &dyn Fn(f64) -> Result<LogValue>,
) -> Result<f64> {
    plan.validate()?;
    let weight = |x: f64| -> Result<(f64, f64)> {
        let v = f(x)?;
        if v.is_zero() {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        let t = v * LogValue::from_f64((1.0 - q) * x);
        Ok((t.to_f64(), t.ln))
    };

    let mut small_terms = Vec::new();
    let mut total = 0.0;
    let mut watch = TailWatch::new(Tail::SmallX);
    let mut done = false;
    for k in 0..=plan.k_max {
        let x = plan.point(k, q);
        if x == 0.0 {
            done = true;
            break;
        }
        let (term, ln) = weight(x)?;
        total += term;
        small_terms.push(term);
        if let Verdict::Stop = watch.observe(plan, term, ln, total, x)? {
            done = true;
            break;
        }
    }
    if !done {
        return Err(QError::Convergence {
            what: format!("{} not settled at k = {}", Tail::SmallX, plan.k_max),
            terms: small_terms.len(),
        });
    }

    let mut large_terms = Vec::new();
    let mut watch = TailWatch::new(Tail::LargeX);
    done = false;
    for k in (plan.k_min..0).rev() {
        let x = plan.point(k, q);
        let (term, ln) = weight(x)?;
        total += term;
        large_terms.push(term);
        if let Verdict::Stop = watch.observe(plan, term, ln, total, x)? {
            done = true;
            break;
        }
    }
    if !done && plan.k_min < 0 {
        return Err(QError::Convergence {
            what: format!("{} not settled at k = {}", Tail::LargeX, plan.k_min),
            terms: large_terms.len(),
        });
    }

    // Fixed order: far small-x terms first, then outwards.
    let sum = small_terms
        .iter()
        .rev()
        .chain(large_terms.iter())
        .fold(0.0, |acc, t| acc + t);
    if !sum.is_finite() {
        return Err(QError::Divergence {
            tail: Tail::LargeX,
            axis: None,
            detail: "sum overflowed".into(),
        });
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: f64) -> QContext {
        QContext::float(q).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn derivative_of_square() {
        let f = LatticeFunction1D::new(|x| x * x);
        for &(x, q) in &[(0.7, 0.5), (2.0, 0.3), (1.3, 0.9)] {
            let d = q_derivative(&f, x, 1, &ctx(q)).unwrap();
            assert!(close(d, (1.0 + q) * x, 1e-13));
        }
        let c = LatticeFunction1D::new(|_| 4.0);
        assert_eq!(q_derivative(&c, 0.4, 2, &ctx(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn second_derivative_of_cube() {
        let q: f64 = 0.6;
        let f = LatticeFunction1D::new(|x| x * x * x);
        let d = q_derivative(&f, 1.5, 2, &ctx(q)).unwrap();
        let want = (1.0 + q + q * q) * (1.0 + q) * 1.5;
        assert!(close(d, want, 1e-12));
    }

    #[test]
    fn derivative_limit_at_origin() {
        let f = LatticeFunction1D::new(|x| 3.0 * x + x * x);
        let d = q_derivative(&f, 0.0, 1, &ctx(0.5)).unwrap();
        assert!(close(d, 3.0, 1e-8));
    }

    #[test]
    fn partials_of_simple_products() {
        let c = ctx(0.5);
        let f = LatticeFunction2D::new(|x, y| x * y);
        assert!(close(q_partial(&f, (2.0, 3.0), (1, 0), &c).unwrap(), 3.0, 1e-14));
        let g = LatticeFunction2D::new(|x, y| x * x * y);
        assert!(close(q_partial(&g, (1.0, 1.0), (1, 1), &c).unwrap(), 1.5, 1e-13));
        let k = LatticeFunction2D::new(|_, _| 2.0);
        assert_eq!(q_partial(&k, (0.3, 0.4), (2, 1), &c).unwrap(), 0.0);
    }

    #[test]
    fn finite_integrals() {
        let c = ctx(0.5);
        let one = LatticeFunction1D::new(|_| 1.0);
        assert!(close(jackson_integral_finite(&one, 0.0, 2.5, &c, 1e-16).unwrap(), 2.5, 1e-15));
        let id = LatticeFunction1D::new(|x| x);
        let v = jackson_integral_finite(&id, 0.0, 1.0, &c, 1e-16).unwrap();
        assert!(close(v, 2.0 / 3.0, 1e-15));
        assert_eq!(jackson_integral_finite(&id, 0.7, 0.7, &c, 1e-16).unwrap(), 0.0);
        assert!(jackson_integral_finite(&id, -1.0, 0.7, &c, 1e-16).is_err());
    }

    #[test]
    fn improper_zero_function() {
        let z = LatticeFunction1D::new(|_| 0.0);
        let v = jackson_integral_improper(&z, &LatticeSumPlan::default(), &ctx(0.5)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn small_x_blowup_is_reported() {
        let f = LatticeFunction1D::new(|x| 1.0 / (x * x));
        let err = jackson_integral_improper(&f, &LatticeSumPlan::default(), &ctx(0.5)).unwrap_err();
        assert!(matches!(err, QError::Divergence { tail: Tail::SmallX, .. }), "{err}");
    }

    #[test]
    fn plan_validation() {
        let bad = LatticeSumPlan {
            k_min: 1,
            ..LatticeSumPlan::default()
        };
        assert!(bad.validate().is_err());
        assert!(LatticeSumPlan::with_scale(-1.0).validate().is_err());
    }
}
