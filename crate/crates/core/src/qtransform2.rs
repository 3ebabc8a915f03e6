//! The four double q-Laplace transforms.
//!
//! | kind | x-kernel        | y-kernel        |
//! |------|-----------------|-----------------|
//! | K1   | `E_q(−q r x)`   | `E_q(−q s y)`   |
//! | K2   | `e_q(−r x)`     | `e_q(−s y)`     |
//! | K3   | `e_q(−r x)`     | `E_q(−q s y)`   |
//! | K4   | `E_q(−q r x)`   | `e_q(−s y)`     |

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::Zero;

use crate::context::{QContext, QScalar};
use crate::error::{Axis, QError, Result, Tail};
use crate::logval::LogValue;
use crate::poly::{QPoly2, Var};
use crate::qcalc::{improper_sum_2d, q_partial, LatticeFunction2D, LatticeSumPlan};
use crate::qcore::{expand_q_addition, q_fact, series_q_compose, AdditionKind};
use crate::qspecial::TrigSelector;
use crate::qtransform::{qlap1d_catalog, qlap1d_numeric, Atom1D, Kind1D};
use crate::rsexpr::{Factor, RSExpr, SExpr, Term};
use crate::scalar::{choose2, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum TransformKind {
    K1,
    K2,
    K3,
    K4,
}

impl TransformKind {
    pub const ALL: [TransformKind; 4] = [
        TransformKind::K1,
        TransformKind::K2,
        TransformKind::K3,
        TransformKind::K4,
    ];

    /// One-variable kernels on the x and y axes.
    pub fn axes(self) -> (Kind1D, Kind1D) {
        match self {
            TransformKind::K1 => (Kind1D::First, Kind1D::First),
            TransformKind::K2 => (Kind1D::Second, Kind1D::Second),
            TransformKind::K3 => (Kind1D::Second, Kind1D::First),
            TransformKind::K4 => (Kind1D::First, Kind1D::Second),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().trim_start_matches('k') {
            "1" => Some(TransformKind::K1),
            "2" => Some(TransformKind::K2),
            "3" => Some(TransformKind::K3),
            "4" => Some(TransformKind::K4),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K{}", self.number())
    }
}

/// Which q-exponential and q-addition a descriptor is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `e_q` with Ward addition `⊕_q`.
    Small,
    /// `E_q` with coaddition `⊞_q`.
    Big,
}

impl Family {
    pub fn addition(self) -> AdditionKind {
        match self {
            Family::Small => AdditionKind::WardAdd,
            Family::Big => AdditionKind::Coadd,
        }
    }

    pub fn exp(self, a: f64) -> Atom1D {
        match self {
            Family::Small => Atom1D::ExpSmall(a),
            Family::Big => Atom1D::ExpBig(a),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "small" => Some(Family::Small),
            "big" => Some(Family::Big),
            _ => None,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Family::Small => "(+)",
            Family::Big => "[+]",
        }
    }
}

/// A symbolic integrand of two variables.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionDescriptor {
    /// `x^α y^β`.
    Monomial(Ratio<i64>, Ratio<i64>),
    /// `g(x) h(y)`.
    Separable(Atom1D, Atom1D),
    /// `(a x ∘ b y)^n` for the given addition law.
    QAddPower { a: f64, b: f64, n: u32, kind: AdditionKind },
    /// `e_q(a x ⊕_q b y)` or `E_q(a x ⊞_q b y)`.
    ExpQAdd { a: f64, b: f64, family: Family },
    /// `cos_q(a x ⊕_q b y)` and relatives.
    TrigQAdd {
        a: f64,
        b: f64,
        selector: TrigSelector,
        family: Family,
    },
    /// `f(α x ∘ β y)` with `f(t) = Σ c_n w_n t^n`, `w_n = 1/[n]_q!` (small)
    /// or `q^{C(n,2)}/[n]_q!` (big).
    SeriesQAdd {
        coeffs: Vec<f64>,
        alpha: f64,
        beta: f64,
        family: Family,
    },
    LinearCombo(Vec<(f64, FunctionDescriptor)>),
}

impl fmt::Display for FunctionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionDescriptor::Monomial(a, b) => write!(f, "x^({a}) y^({b})"),
            FunctionDescriptor::Separable(g, h) => {
                write!(f, "[{}] [{}]", g.to_string().replace('t', "x"), h.to_string().replace('t', "y"))
            }
            FunctionDescriptor::QAddPower { a, b, n, kind } => {
                write!(f, "({a}x {} {b}y)^{n}", kind.name())
            }
            FunctionDescriptor::ExpQAdd { a, b, family } => {
                let e = if *family == Family::Small { "e_q" } else { "E_q" };
                write!(f, "{e}({a}x {} {b}y)", family.symbol())
            }
            FunctionDescriptor::TrigQAdd {
                a,
                b,
                selector,
                family,
            } => write!(f, "{selector}({a}x {} {b}y)", family.symbol()),
            FunctionDescriptor::SeriesQAdd {
                coeffs,
                alpha,
                beta,
                family,
            } => write!(f, "series{coeffs:?}({alpha}x {} {beta}y)", family.symbol()),
            FunctionDescriptor::LinearCombo(parts) => {
                if parts.is_empty() {
                    return write!(f, "0");
                }
                for (i, (c, d)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{c}*{{{d}}}")?;
                }
                Ok(())
            }
        }
    }
}

/// Coefficient of `t^k` in the Maclaurin expansion of an atom.
pub fn atom_series_coeff<T: Scalar>(atom: &Atom1D, k: u32, q: &T) -> Result<T> {
    let fact = q_fact(k, q);
    Ok(match atom {
        Atom1D::Constant => {
            if k == 0 {
                T::one()
            } else {
                T::zero()
            }
        }
        Atom1D::Monomial(a) => {
            if !a.is_integer() {
                return Err(QError::Domain(format!("t^({a}) has no Maclaurin expansion")));
            }
            if a.to_integer() == k as i64 {
                T::one()
            } else {
                T::zero()
            }
        }
        Atom1D::ExpSmall(a) => T::from_f64(*a).powi(k as i64) / fact,
        Atom1D::ExpBig(a) => T::from_f64(*a).powi(k as i64) * q.powi(choose2(k as i64)) / fact,
        Atom1D::Trig(sel, a) => {
            if (k % 2 == 1) != sel.is_odd() {
                return Ok(T::zero());
            }
            let mut c = T::from_f64(*a).powi(k as i64) / fact;
            if !sel.is_hyperbolic() && (k / 2) % 2 == 1 {
                c = -c;
            }
            if sel.is_big() {
                c = c * q.powi(choose2(k as i64));
            }
            c
        }
    })
}

/// `D_q^k g(0)`.
pub fn atom_derivative_at_zero<T: Scalar>(atom: &Atom1D, k: u32, q: &T) -> Result<T> {
    Ok(atom_series_coeff(atom, k, q)? * q_fact(k, q))
}

/// One summand `c · g(x) · h(y)`.
pub type SeparablePart<T> = (T, Atom1D, Atom1D);

impl FunctionDescriptor {
    pub fn monomial(a: i64, b: i64) -> Self {
        FunctionDescriptor::Monomial(Ratio::from_integer(a), Ratio::from_integer(b))
    }

    pub fn constant() -> Self {
        Self::monomial(0, 0)
    }

    pub fn zero() -> Self {
        FunctionDescriptor::LinearCombo(Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionDescriptor::Monomial(a, b) => {
                Atom1D::Monomial(*a).validate()?;
                Atom1D::Monomial(*b).validate()
            }
            FunctionDescriptor::Separable(g, h) => {
                g.validate()?;
                h.validate()
            }
            FunctionDescriptor::TrigQAdd { selector, family, .. } => {
                if selector.is_big() != (*family == Family::Big) {
                    return Err(QError::Domain(format!(
                        "{selector} does not belong to the {family:?} family"
                    )));
                }
                Ok(())
            }
            FunctionDescriptor::SeriesQAdd { coeffs, .. } if coeffs.is_empty() => {
                Err(QError::Domain("series needs at least one coefficient".into()))
            }
            FunctionDescriptor::LinearCombo(parts) => parts.iter().try_for_each(|(_, d)| d.validate()),
            _ => Ok(()),
        }
    }

    /// Write the function as `Σ c · g(x) h(y)`. Polynomial descriptors
    /// expand into monomials; trig ones use the addition formulas that
    /// follow from the exponential homomorphisms.
    pub fn separable_parts<T: QScalar>(&self, ctx: &QContext) -> Result<Vec<SeparablePart<T>>> {
        let q = ctx.q_as::<T>()?;
        Ok(match self {
            FunctionDescriptor::Monomial(a, b) => {
                vec![(T::one(), Atom1D::Monomial(*a), Atom1D::Monomial(*b))]
            }
            FunctionDescriptor::Separable(g, h) => vec![(T::one(), g.clone(), h.clone())],
            FunctionDescriptor::QAddPower { a, b, n, kind } => {
                let p = expand_q_addition(*kind, *n, &q).scale_vars(&T::from_f64(*a), &T::from_f64(*b));
                poly_parts(&p)
            }
            FunctionDescriptor::ExpQAdd { a, b, family } => {
                vec![(T::one(), family.exp(*a), family.exp(*b))]
            }
            FunctionDescriptor::TrigQAdd { a, b, selector, .. } => {
                let big = selector.is_big();
                let hyp = selector.is_hyperbolic();
                let even = TrigSelector::build(big, false, hyp);
                let odd = TrigSelector::build(big, true, hyp);
                let t = |s: TrigSelector, v: f64| Atom1D::Trig(s, v);
                if selector.is_odd() {
                    vec![
                        (T::one(), t(odd, *a), t(even, *b)),
                        (T::one(), t(even, *a), t(odd, *b)),
                    ]
                } else {
                    let sign = if hyp { T::one() } else { -T::one() };
                    vec![
                        (T::one(), t(even, *a), t(even, *b)),
                        (sign, t(odd, *a), t(odd, *b)),
                    ]
                }
            }
            FunctionDescriptor::SeriesQAdd {
                coeffs,
                alpha,
                beta,
                family,
            } => {
                let c: Vec<T> = coeffs.iter().map(|v| T::from_f64(*v)).collect();
                let p = series_q_compose(
                    &c,
                    family.addition(),
                    &T::from_f64(*alpha),
                    &T::from_f64(*beta),
                    &q,
                )?;
                poly_parts(&p)
            }
            FunctionDescriptor::LinearCombo(parts) => {
                let mut out = Vec::new();
                for (c, d) in parts {
                    let c = T::from_f64(*c);
                    for (k, g, h) in d.separable_parts::<T>(ctx)? {
                        out.push((c.clone() * k, g, h));
                    }
                }
                out
            }
        })
    }

    /// Pointwise evaluator.
    pub fn to_lattice(&self, ctx: &QContext) -> Result<LatticeFunction2D> {
        self.validate()?;
        let ctx = ctx.as_float();
        if let FunctionDescriptor::QAddPower { a, b, n, kind } = *self {
            if matches!(kind, AdditionKind::QpowAdd | AdditionKind::QpowSub) {
                // Product form, so zeros on the lattice come out exact.
                let (q, sign) = (ctx.q(), if kind == AdditionKind::QpowSub { -1.0 } else { 1.0 });
                return Ok(LatticeFunction2D::from_log(move |x, y| {
                    let mut acc = LogValue::ONE;
                    for i in 0..n {
                        acc = acc * LogValue::from_f64(a * x + sign * b * q.powi(i as i32) * y);
                    }
                    Ok(acc)
                })
                .with_descriptor(self.clone()));
            }
        }
        let parts = self.separable_parts::<f64>(&ctx)?;
        Ok(LatticeFunction2D::from_log(move |x, y| {
            let mut acc = LogValue::ZERO;
            for (c, g, h) in &parts {
                let gx = g.eval_log(x, &ctx)?;
                if gx.is_zero() {
                    continue;
                }
                acc = acc.add(LogValue::from_f64(*c) * gx * h.eval_log(y, &ctx)?);
            }
            Ok(acc)
        })
        .with_descriptor(self.clone()))
    }

    pub fn eval(&self, x: f64, y: f64, ctx: &QContext) -> Result<f64> {
        self.to_lattice(ctx)?.eval(x, y)
    }

    /// `∂_x^{nx} ∂_y^{ny}` of the function, built from the atom rules.
    pub fn q_partial_descriptor(&self, nx: u32, ny: u32, ctx: &QContext) -> Result<FunctionDescriptor> {
        let q = ctx.q();
        let mut out = Vec::new();
        for (c, g, h) in self.separable_parts::<f64>(&ctx.as_float())? {
            let (cg, g) = match iterate_derivative(&g, nx, q) {
                Some(v) => v,
                None => continue,
            };
            let (ch, h) = match iterate_derivative(&h, ny, q) {
                Some(v) => v,
                None => continue,
            };
            out.push((c * cg * ch, FunctionDescriptor::Separable(g, h)));
        }
        Ok(FunctionDescriptor::LinearCombo(out))
    }

    /// `x^m y^n f(x, y)` as a pointwise evaluator.
    pub fn times_monomial(&self, m: u32, n: u32, ctx: &QContext) -> Result<LatticeFunction2D> {
        let f = self.to_lattice(ctx)?;
        Ok(LatticeFunction2D::from_log(move |x, y| {
            Ok(LogValue::from_f64(x.powi(m as i32) * y.powi(n as i32)) * f.eval_log(x, y)?)
        }))
    }

    /// `f(a x, b y)` as a pointwise evaluator.
    pub fn scaled(&self, a: f64, b: f64, ctx: &QContext) -> Result<LatticeFunction2D> {
        let f = self.to_lattice(ctx)?;
        Ok(LatticeFunction2D::from_log(move |x, y| f.eval_log(a * x, b * y)))
    }
}

fn poly_parts<T: Scalar>(p: &QPoly2<T>) -> Vec<SeparablePart<T>> {
    p.terms()
        .map(|(&(i, j), c)| (c.clone(), Atom1D::monomial(i as i64), Atom1D::monomial(j as i64)))
        .collect()
}

fn iterate_derivative(atom: &Atom1D, n: u32, q: f64) -> Option<(f64, Atom1D)> {
    let mut c = 1.0;
    let mut a = atom.clone();
    for _ in 0..n {
        let (k, next) = a.q_derivative(q)?;
        c *= k;
        a = next;
    }
    Some((c, a))
}

/// Check the parameters against the convergence region of each axis.
pub fn check_region(d: &FunctionDescriptor, kind: TransformKind, r: f64, s: f64, q: f64) -> Result<()> {
    let (kx, ky) = kind.axes();
    let check = |g: &Atom1D, h: &Atom1D| -> Result<()> {
        for (atom, k, v, axis) in [(g, kx, r, Axis::X), (h, ky, s, Axis::Y)] {
            if !atom.in_region(k, v, q) {
                return Err(QError::Divergence {
                    tail: Tail::LargeX,
                    axis: Some(axis),
                    detail: format!("{atom} lies outside the convergence region at {v}"),
                });
            }
        }
        Ok(())
    };
    match d {
        FunctionDescriptor::Monomial(a, b) => check(&Atom1D::Monomial(*a), &Atom1D::Monomial(*b)),
        FunctionDescriptor::Separable(g, h) => check(g, h),
        FunctionDescriptor::ExpQAdd { a, b, family } => check(&family.exp(*a), &family.exp(*b)),
        FunctionDescriptor::TrigQAdd { a, b, selector, .. } => {
            check(&Atom1D::Trig(*selector, *a), &Atom1D::Trig(*selector, *b))
        }
        FunctionDescriptor::LinearCombo(parts) => parts
            .iter()
            .try_for_each(|(_, d)| check_region(d, kind, r, s, q)),
        _ => Ok(()),
    }
}

/// Optional per-axis lattice overrides.
#[derive(Debug, Clone, Default)]
pub struct Plans2D {
    pub x: Option<LatticeSumPlan>,
    pub y: Option<LatticeSumPlan>,
}

fn axis_plan(given: &Option<LatticeSumPlan>, k: Kind1D, v: f64, ctx: &QContext) -> LatticeSumPlan {
    given.clone().unwrap_or_else(|| LatticeSumPlan {
        tol: ctx.default_tol,
        ..LatticeSumPlan::with_scale(k.default_scale(v, ctx.q()))
    })
}

/// Numeric double transform of a descriptor. Monomials and separable
/// products factor into two one-variable transforms.
pub fn qlap2d_numeric(
    d: &FunctionDescriptor,
    r: f64,
    s: f64,
    kind: TransformKind,
    plans: &Plans2D,
    ctx: &QContext,
) -> Result<f64> {
    check_point(r, s)?;
    d.validate()?;
    check_region(d, kind, r, s, ctx.q())?;
    let ctx = &ctx.as_float();
    let (kx, ky) = kind.axes();
    let factor = |g: &Atom1D, h: &Atom1D| -> Result<f64> {
        let gx = qlap1d_numeric(&g.to_lattice(ctx), r, kx, plans.x.as_ref(), ctx)
            .map_err(|e| e.on_axis(Axis::X))?;
        let hy = qlap1d_numeric(&h.to_lattice(ctx), s, ky, plans.y.as_ref(), ctx)
            .map_err(|e| e.on_axis(Axis::Y))?;
        Ok(gx * hy)
    };
    match d {
        FunctionDescriptor::Monomial(a, b) => factor(&Atom1D::Monomial(*a), &Atom1D::Monomial(*b)),
        FunctionDescriptor::Separable(g, h) => factor(g, h),
        _ => tensor_sum(&d.to_lattice(ctx)?, r, s, kind, plans, ctx),
    }
}

/// Numeric double transform of an arbitrary lattice function.
pub fn qlap2d_numeric_fn(
    f: &LatticeFunction2D,
    r: f64,
    s: f64,
    kind: TransformKind,
    plans: &Plans2D,
    ctx: &QContext,
) -> Result<f64> {
    check_point(r, s)?;
    if let Some(d) = f.descriptor() {
        check_region(d, kind, r, s, ctx.q())?;
    }
    tensor_sum(f, r, s, kind, plans, &ctx.as_float())
}

fn check_point(r: f64, s: f64) -> Result<()> {
    if !(r > 0.0 && s > 0.0) {
        return Err(QError::Domain(format!("transform point ({r}, {s}) must be positive")));
    }
    Ok(())
}

fn tensor_sum(
    f: &LatticeFunction2D,
    r: f64,
    s: f64,
    kind: TransformKind,
    plans: &Plans2D,
    ctx: &QContext,
) -> Result<f64> {
    let (kx, ky) = kind.axes();
    let px = axis_plan(&plans.x, kx, r, ctx);
    let py = axis_plan(&plans.y, ky, s, ctx);
    let cache_x: RefCell<HashMap<u64, LogValue>> = RefCell::default();
    let cache_y: RefCell<HashMap<u64, LogValue>> = RefCell::default();
    let kernel = |cache: &RefCell<HashMap<u64, LogValue>>, k: Kind1D, v: f64, t: f64| -> Result<LogValue> {
        if let Some(val) = cache.borrow().get(&t.to_bits()) {
            return Ok(*val);
        }
        let val = k.kernel(v, t, ctx)?;
        cache.borrow_mut().insert(t.to_bits(), val);
        Ok(val)
    };
    improper_sum_2d(&px, &py, ctx.q(), &|x, y| {
        let ky_val = kernel(&cache_y, ky, s, y)?;
        if ky_val.is_zero() {
            return Ok(LogValue::ZERO);
        }
        let kx_val = kernel(&cache_x, kx, r, x)?;
        if kx_val.is_zero() {
            return Ok(LogValue::ZERO);
        }
        Ok(kx_val * ky_val * f.eval_log(x, y)?)
    })
}

fn image_1d<T: QScalar>(atom: &Atom1D, k: Kind1D, ctx: &QContext) -> Result<SExpr<T>> {
    qlap1d_catalog::<T>(atom, k, ctx)
}

/// `pref · (u^{n+1} s^{n+1} − v^{n+1} r^{n+1}) / ((rs)^{n+1} (u s − v r))`,
/// the common shape of every q-addition power image.
fn power_image<T: Scalar>(pref: T, u: T, v: T, n: u32) -> RSExpr<T> {
    let p = Ratio::from_integer(n as i64 + 1);
    if n == 0 {
        return RSExpr::monomial(pref, p, p);
    }
    if u.is_zero() && v.is_zero() {
        return RSExpr::zero();
    }
    let num = QPoly2::monomial(u.powi(n as i64 + 1), 0, n + 1)
        .sub(&QPoly2::monomial(v.powi(n as i64 + 1), n + 1, 0));
    let term = if !u.is_zero() {
        Term::new(num.scale(&(pref / u.clone())), p, p, vec![Factor::Mixed { lambda: v / u }])
    } else {
        Term::new(num.scale(&(-pref / v)), p + 1, p, Vec::new())
    };
    RSExpr::from_term(term)
}

/// Closed-form image of a descriptor, normalized.
pub fn qlap2d_catalog<T: QScalar>(d: &FunctionDescriptor, kind: TransformKind, ctx: &QContext) -> Result<RSExpr<T>> {
    d.validate()?;
    let q = ctx.q_as::<T>()?;
    let (kx, ky) = kind.axes();
    let miss = || QError::CatalogMiss(format!("{d} under {kind}"));
    let tensor = |g: &Atom1D, h: &Atom1D| -> Result<RSExpr<T>> {
        Ok(image_1d::<T>(g, kx, ctx)?.tensor(&image_1d::<T>(h, ky, ctx)?))
    };
    let out = match d {
        FunctionDescriptor::Monomial(a, b) => tensor(&Atom1D::Monomial(*a), &Atom1D::Monomial(*b))?,
        FunctionDescriptor::Separable(g, h) => tensor(g, h)?,
        FunctionDescriptor::QAddPower { a, b, n, kind: add } => {
            let a_t = T::from_f64(*a);
            let b_t = if add.is_subtraction() {
                -T::from_f64(*b)
            } else {
                T::from_f64(*b)
            };
            let fact = q_fact(*n, &q);
            let shift = q.powi(-choose2(*n as i64 + 1));
            match (kind, add.additive()) {
                (TransformKind::K1, AdditionKind::WardAdd) => power_image(fact, a_t, b_t, *n),
                (TransformKind::K2, AdditionKind::Coadd) => power_image(fact * shift, a_t, b_t, *n),
                (TransformKind::K3, AdditionKind::QpowAdd) => {
                    let v = b_t * q.powi(*n as i64);
                    power_image(fact * shift, a_t, v, *n)
                }
                (TransformKind::K4, AdditionKind::QpowAdd) => {
                    let pref = fact * q.powi(-(*n as i64));
                    power_image(pref, q.clone() * a_t, b_t, *n)
                }
                _ => return Err(miss()),
            }
        }
        FunctionDescriptor::ExpQAdd { a, b, family } => match (kind, family) {
            (TransformKind::K1, Family::Small) | (TransformKind::K2, Family::Big) => {
                tensor(&family.exp(*a), &family.exp(*b))?
            }
            _ => return Err(miss()),
        },
        FunctionDescriptor::TrigQAdd { family, .. } => match (kind, family) {
            (TransformKind::K1, Family::Small) | (TransformKind::K2, Family::Big) => {
                let mut acc = RSExpr::zero();
                for (c, g, h) in d.separable_parts::<T>(ctx)? {
                    acc = acc.add(&tensor(&g, &h)?.scale(&c));
                }
                acc
            }
            _ => return Err(miss()),
        },
        FunctionDescriptor::SeriesQAdd {
            coeffs,
            alpha,
            beta,
            family,
        } => {
            let axis = match (kind, family) {
                (TransformKind::K1, Family::Small) => Kind1D::First,
                (TransformKind::K2, Family::Big) => Kind1D::Second,
                _ => return Err(miss()),
            };
            // w_n times the image of t^n collapses to c_n (first) or c_n q^{-n} (second),
            // which keeps long float series finite.
            let mut one = SExpr::<T>::zero();
            for (n, c) in coeffs.iter().enumerate() {
                let mut w = T::from_f64(*c);
                if axis == Kind1D::Second {
                    w = w / q.powi(n as i64);
                }
                if w.is_zero() {
                    continue;
                }
                one = one.add(&SExpr::power(w, Ratio::from_integer(n as i64 + 1)));
            }
            let (al, be) = (T::from_f64(*alpha), T::from_f64(*beta));
            let sub = |e: RSExpr<T>, v: Var, c: &T| {
                e.substitute(v, &(T::one() / c.clone()))
                    .ok_or_else(|| QError::UnsupportedExact("fractional power of a scale".into()))
            };
            // (F(r/α) − F(s/β)) / (α s − β r)
            let diff = sub(one.in_var(Var::First), Var::First, &al)?
                .sub(&sub(one.0.clone(), Var::Second, &be)?);
            let den = if !al.is_zero() {
                RSExpr::rational(T::one() / al.clone(), vec![Factor::Mixed { lambda: be / al }])
            } else if !be.is_zero() {
                RSExpr::monomial(-T::one() / be, Ratio::from_integer(1), Ratio::zero())
            } else {
                return Err(QError::Domain("series scales are both zero".into()));
            };
            diff.mul(&den)
        }
        FunctionDescriptor::LinearCombo(parts) => {
            let mut acc = RSExpr::zero();
            for (c, p) in parts {
                acc = acc.add(&qlap2d_catalog::<T>(p, kind, ctx)?.scale(&T::from_f64(*c)));
            }
            acc
        }
    };
    Ok(out.normalize())
}

/// Image of `f(a x, b y)`: `(1/(ab)) F(r/a, s/b)`.
pub fn scaling_image<T: QScalar>(
    d: &FunctionDescriptor,
    a: f64,
    b: f64,
    kind: TransformKind,
    ctx: &QContext,
) -> Result<RSExpr<T>> {
    if a == 0.0 || b == 0.0 {
        return Err(QError::Domain("scaling factors must be nonzero".into()));
    }
    let (a, b) = (T::from_f64(a), T::from_f64(b));
    let f = qlap2d_catalog::<T>(d, kind, ctx)?;
    let g = f
        .substitute(Var::First, &(T::one() / a.clone()))
        .and_then(|g| g.substitute(Var::Second, &(T::one() / b.clone())))
        .ok_or_else(|| QError::UnsupportedExact("fractional power of a scale".into()))?;
    Ok(g.scale(&(T::one() / (a * b))).normalize())
}

/// Which partial q-derivative the derivative theorem is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivSpec {
    Dx,
    Dy,
    DxDy,
    Dxx,
    Dyy,
    DxN(u32),
    DyN(u32),
    /// `∂_x^m ∂_y^n`.
    Mixed(u32, u32),
}

impl DerivSpec {
    pub fn orders(self) -> (u32, u32) {
        match self {
            DerivSpec::Dx => (1, 0),
            DerivSpec::Dy => (0, 1),
            DerivSpec::DxDy => (1, 1),
            DerivSpec::Dxx => (2, 0),
            DerivSpec::Dyy => (0, 2),
            DerivSpec::DxN(n) => (n, 0),
            DerivSpec::DyN(n) => (0, n),
            DerivSpec::Mixed(m, n) => (m, n),
        }
    }
}

/// Boundary traces entering the derivative theorems.
#[derive(Clone, PartialEq)]
pub struct BoundaryData<T> {
    /// `x_traces[k]`: image in `s` of `∂_x^k f(0, y)`.
    pub x_traces: Vec<SExpr<T>>,
    /// `y_traces[j]`: image (written in `s`) of `∂_y^j f(x, 0)`; used in `r`.
    pub y_traces: Vec<SExpr<T>>,
    /// `corners[(k, j)] = ∂_x^k ∂_y^j f(0, 0)`.
    pub corners: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> fmt::Debug for BoundaryData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData")
            .field("x_traces", &self.x_traces)
            .field("y_traces", &self.y_traces)
            .field("corners", &self.corners.len())
            .finish()
    }
}

impl<T: QScalar> BoundaryData<T> {
    /// Exact traces of a descriptor for the given derivative orders.
    pub fn from_descriptor(
        d: &FunctionDescriptor,
        kind: TransformKind,
        orders: (u32, u32),
        ctx: &QContext,
    ) -> Result<Self> {
        let q = ctx.q_as::<T>()?;
        let (kx, ky) = kind.axes();
        let parts = d.separable_parts::<T>(ctx)?;
        let (nx, ny) = orders;
        let mut x_traces = Vec::new();
        for k in 0..nx {
            let mut acc = SExpr::zero();
            for (c, g, h) in &parts {
                let w = c.clone() * atom_derivative_at_zero(g, k, &q)?;
                if !w.is_zero() {
                    acc = acc.add(&image_1d::<T>(h, ky, ctx)?.scale(&w));
                }
            }
            x_traces.push(acc.normalize());
        }
        let mut y_traces = Vec::new();
        for j in 0..ny {
            let mut acc = SExpr::zero();
            for (c, g, h) in &parts {
                let w = c.clone() * atom_derivative_at_zero(h, j, &q)?;
                if !w.is_zero() {
                    acc = acc.add(&image_1d::<T>(g, kx, ctx)?.scale(&w));
                }
            }
            y_traces.push(acc.normalize());
        }
        let mut corners = BTreeMap::new();
        for k in 0..nx {
            for j in 0..ny {
                let mut acc = T::zero();
                for (c, g, h) in &parts {
                    acc = acc
                        + c.clone()
                            * atom_derivative_at_zero(g, k, &q)?
                            * atom_derivative_at_zero(h, j, &q)?;
                }
                corners.insert((k, j), acc);
            }
        }
        Ok(Self {
            x_traces,
            y_traces,
            corners,
        })
    }
}

/// One application of an axis rule:
/// first kind `v·G − trace`, second kind `(v/q)·G(v/q) − trace`.
fn axis_rule<T: Scalar>(g: &RSExpr<T>, v: Var, k: Kind1D, trace: &RSExpr<T>, q: &T) -> Result<RSExpr<T>> {
    let lifted = match k {
        Kind1D::First => g.mul_poly(&QPoly2::var(v)),
        Kind1D::Second => g
            .substitute(v, &(T::one() / q.clone()))
            .ok_or_else(|| QError::UnsupportedExact("fractional power of q".into()))?
            .mul_poly(&QPoly2::var(v))
            .scale(&(T::one() / q.clone())),
    };
    Ok(lifted.sub(trace))
}

/// Image of a partial q-derivative of `f` from its image `F` and traces.
pub fn derivative_image<T: QScalar>(
    kind: TransformKind,
    spec: DerivSpec,
    f_image: &RSExpr<T>,
    boundary: &BoundaryData<T>,
    ctx: &QContext,
) -> Result<RSExpr<T>> {
    let q = ctx.q_as::<T>()?;
    let (kx, ky) = kind.axes();
    let (nx, ny) = spec.orders();
    let missing = |what: String| QError::IncompleteData(what);
    let mut h = f_image.clone();
    for j in 0..ny {
        let tr = boundary
            .y_traces
            .get(j as usize)
            .ok_or_else(|| missing(format!("image of d_y^{j} f(x, 0)")))?
            .in_var(Var::First);
        h = axis_rule(&h, Var::Second, ky, &tr, &q)?;
    }
    for k in 0..nx {
        let mut t = boundary
            .x_traces
            .get(k as usize)
            .ok_or_else(|| missing(format!("image of d_x^{k} f(0, y)")))?
            .0
            .clone();
        for j in 0..ny {
            let c = boundary
                .corners
                .get(&(k, j))
                .ok_or_else(|| missing(format!("corner value d_x^{k} d_y^{j} f(0, 0)")))?;
            t = axis_rule(&t, Var::Second, ky, &RSExpr::constant(c.clone()), &q)?;
        }
        h = axis_rule(&h, Var::First, kx, &t, &q)?;
    }
    Ok(h.normalize())
}

/// Pointwise evaluator of a transform image.
pub type Evaluator = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// Image of `x^m y^n f(x, y)` from the image `F` of `f`.
///
/// On a first-kind axis the q-derivative acts on `F` with its argument
/// pre-scaled by `q^{−m}` and carries `q^{C(m,2)}`; on a second-kind axis
/// it acts on `F` directly.
pub fn multiplication_image(
    kind: TransformKind,
    m: u32,
    n: u32,
    f_image: Evaluator,
    ctx: &QContext,
) -> Result<Evaluator> {
    if m == 0 && n == 0 {
        return Ok(f_image);
    }
    let q = ctx.q();
    let (kx, ky) = kind.axes();
    let (sx, px) = match kx {
        Kind1D::First => (q.powi(-(m as i32)), q.powi(choose2(m as i64) as i32)),
        Kind1D::Second => (1.0, 1.0),
    };
    let (sy, py) = match ky {
        Kind1D::First => (q.powi(-(n as i32)), q.powi(choose2(n as i64) as i32)),
        Kind1D::Second => (1.0, 1.0),
    };
    let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
    let inner = f_image.clone();
    let g = LatticeFunction2D::fallible(move |r, s| inner(sx * r, sy * s));
    let ctx = ctx.as_float();
    Ok(Arc::new(move |r, s| {
        Ok(sign * px * py * q_partial(&g, (r, s), (m, n), &ctx)?)
    }))
}

/// Evaluator for a closed-form image.
pub fn rsexpr_evaluator(e: &RSExpr<f64>) -> Evaluator {
    let e = e.clone();
    Arc::new(move |r, s| {
        e.eval(&r, &s)
            .ok_or_else(|| QError::Domain(format!("cannot evaluate image at ({r}, {s})")))
    })
}
