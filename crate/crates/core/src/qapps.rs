//! Functional equations and q-partial differential equations solved through
//! the double transforms, each with an independent residual check.
//!
//! Applying a function to a q-sum always means the coefficient-wise series
//! composition of [`series_q_compose`]: `f(x ⊕_q y) = Σ a_n (x ⊕_q y)^n / [n]!`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::context::{QContext, QScalar};
use crate::error::{QError, Result};
use crate::poly::{QPoly2, Var};
use crate::qcalc::q_partial;
use crate::qcore::{series_q_compose, univariate, AdditionKind};
use crate::qspecial::q_exp_small;
use crate::qsymbolic::{assemble, inverse_catalog, inverse_catalog_1d, partial_fractions_mixed, recombine_mixed};
use crate::qtransform::{qlap1d_catalog, Atom1D, Kind1D};
use crate::qtransform2::{
    derivative_image, qlap2d_numeric, BoundaryData, DerivSpec, Family, FunctionDescriptor,
    Plans2D, TransformKind,
};
use crate::rsexpr::{Factor, RSExpr, SExpr};
use crate::scalar::{choose2, Scalar};

/// Residuals of returned solutions must stay below this.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Total degree of the coefficient-wise functional-equation check.
pub const SERIES_DEGREE: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationId {
    CauchyWard,
    CauchyCoadd,
    AbelWard,
    AbelCoadd,
    Transport,
    Telegraph,
    Wave,
}

impl EquationId {
    pub const ALL: [EquationId; 7] = [
        EquationId::CauchyWard,
        EquationId::CauchyCoadd,
        EquationId::AbelWard,
        EquationId::AbelCoadd,
        EquationId::Transport,
        EquationId::Telegraph,
        EquationId::Wave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EquationId::CauchyWard => "cauchy_ward",
            EquationId::CauchyCoadd => "cauchy_coadd",
            EquationId::AbelWard => "abel_ward",
            EquationId::AbelCoadd => "abel_coadd",
            EquationId::Transport => "transport",
            EquationId::Telegraph => "telegraph",
            EquationId::Wave => "wave",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == text)
    }

    pub fn is_functional(self) -> bool {
        matches!(
            self,
            EquationId::CauchyWard | EquationId::CauchyCoadd | EquationId::AbelWard | EquationId::AbelCoadd
        )
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One-variable data `Σ c_i · atom_i`; empty means the zero function.
pub type Data1D = Vec<(f64, Atom1D)>;

#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub id: EquationId,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Free constant of the functional equations.
    pub k: f64,
    pub f: Data1D,
    pub g: Data1D,
}

impl EquationSpec {
    pub fn new(id: EquationId) -> Self {
        Self {
            id,
            c: 1.0,
            alpha: 0.0,
            beta: 0.0,
            k: 1.0,
            f: Vec::new(),
            g: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SolutionReport {
    pub equation: EquationId,
    /// Solution as a function of `(x, y)`, with `y` playing `t`.
    pub descriptor: Option<FunctionDescriptor>,
    pub formula: String,
    pub transform_domain: String,
    #[serde(skip)]
    pub transform_expr: Option<RSExpr<f64>>,
    pub partial_fractions: Option<String>,
    pub residual_max: Option<f64>,
    pub lattice_points_checked: usize,
    pub inversion_incomplete: bool,
}

pub fn solve(spec: &EquationSpec, ctx: &QContext) -> Result<SolutionReport> {
    match spec.id {
        id if id.is_functional() => solve_functional(id, spec.k, ctx),
        EquationId::Transport => solve_transport(spec.c, &spec.f, &spec.g, ctx),
        EquationId::Telegraph => verify_telegraph(spec.c, spec.alpha, spec.beta, ctx),
        _ => solve_wave(spec.c, &spec.f, &spec.g, ctx),
    }
}

/// Exact twin of a context, so symbolic steps never round.
fn exact_ctx(ctx: &QContext) -> Result<QContext> {
    let q = match ctx.q_exact() {
        Some(q) => q.clone(),
        None => BigRational::from_float(ctx.q()).ok_or_else(|| QError::InvalidQ(ctx.q().to_string()))?,
    };
    QContext::exact(q)
}

fn br(v: f64) -> BigRational {
    BigRational::from_f64(v)
}

fn enforce(what: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value <= RESIDUAL_TOL {
        Ok(value)
    } else {
        Err(QError::Residual {
            what: what.to_string(),
            value,
            tol: RESIDUAL_TOL,
        })
    }
}

/// `(q^i·0.9, q^j·0.9)` for `i, j < 5`.
fn lattice_points(q: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(25);
    for i in 0..5 {
        for j in 0..5 {
            out.push((0.9 * q.powi(i), 0.9 * q.powi(j)));
        }
    }
    out
}

/// Transform-domain statement of the separated equation, `Φ(r) F(r) = k`.
fn separated_image(id: EquationId, k: &BigRational) -> SExpr<BigRational> {
    match id {
        EquationId::CauchyWard | EquationId::CauchyCoadd => SExpr::power(k.clone(), 2.into()),
        _ => SExpr::pole(BigRational::from_i64(1), -k.clone()),
    }
}

/// Check `T[f(x ∘ y)] = T[rhs]` with the q-sum image
/// `(F(r) − F(s))/(s − r)` and the right side built from `F` and `1/v`.
fn separation_holds(id: EquationId, f_img: &SExpr<BigRational>) -> bool {
    let one = BigRational::from_i64(1);
    let f_r = f_img.in_var(Var::First);
    let f_s = f_img.0.clone();
    let lhs = f_r
        .sub(&f_s)
        .mul(&RSExpr::rational(one.clone(), vec![Factor::Mixed { lambda: one.clone() }]));
    let inv_r = RSExpr::monomial(one.clone(), 1.into(), 0.into());
    let inv_s = RSExpr::monomial(one, 0.into(), 1.into());
    let rhs = match id {
        EquationId::CauchyWard | EquationId::CauchyCoadd => f_r.mul(&inv_s).add(&f_s.mul(&inv_r)),
        _ => f_r.mul(&f_s),
    };
    lhs.sub(&rhs).normalize().is_zero()
}

/// Solve one of the four functional equations by transform, separation of
/// variables and inversion; verify the answer coefficient-wise.
pub fn solve_functional(id: EquationId, k: f64, ctx: &QContext) -> Result<SolutionReport> {
    if !id.is_functional() {
        return Err(QError::Domain(format!("{id} is not a functional equation")));
    }
    if k == 0.0 || !k.is_finite() {
        return Err(QError::Domain("the free constant must be a nonzero number".into()));
    }
    let ex = exact_ctx(ctx)?;
    let q = ex.q_as::<BigRational>()?;
    let (axis, add) = match id {
        EquationId::CauchyWard | EquationId::AbelWard => (Kind1D::First, AdditionKind::WardAdd),
        _ => (Kind1D::Second, AdditionKind::Coadd),
    };
    let kq = br(k);
    let f_img = separated_image(id, &kq);
    if !separation_holds(id, &f_img) {
        return Err(QError::NoMatch(format!("{id}: separated image {f_img} does not satisfy the transformed equation")));
    }
    let atoms = inverse_catalog_1d(&f_img, axis, &ex)?;
    // The answer must depend on k the way the closed form says; check at 2k.
    let twice = inverse_catalog_1d(&separated_image(id, &(kq.clone() * BigRational::from_i64(2))), axis, &ex)?;
    let (coef, atom) = match atoms.as_slice() {
        [one] => one.clone(),
        _ => return Err(QError::NoMatch(format!("{id}: inverse has {} atoms", atoms.len()))),
    };
    let (formula, expected): (&str, (BigRational, Atom1D)) = match id {
        EquationId::CauchyWard => ("f(x) = k x", (kq.clone(), Atom1D::monomial(1))),
        EquationId::CauchyCoadd => ("f(x) = k q x", (kq.clone() * q.clone(), Atom1D::monomial(1))),
        EquationId::AbelWard => ("f(x) = e_q(-k x)", (BigRational::from_i64(1), Atom1D::ExpSmall(-k))),
        _ => (
            "f(x) = E_q(-q k x)",
            (BigRational::from_i64(1), Atom1D::ExpBig((-(q.clone() * kq.clone())).to_f64())),
        ),
    };
    let linear_in_k = match (&atom, twice.as_slice()) {
        (Atom1D::Monomial(_), [(c2, _)]) => *c2 == coef.clone() * BigRational::from_i64(2),
        (Atom1D::ExpSmall(a) | Atom1D::ExpBig(a), [(_, Atom1D::ExpSmall(b) | Atom1D::ExpBig(b))]) => {
            f64::abs(b - 2.0 * a) <= 1e-12 * f64::abs(*a)
        }
        _ => false,
    };
    let matches_form = coef == expected.0 && crate::qsymbolic::atoms_match(&atom, &expected.1);
    if !(linear_in_k && matches_form) {
        return Err(QError::NoMatch(format!("{id}: inverse {coef}·{atom} is not of the form {formula}")));
    }

    // Exact Taylor data of the solution, straight from the closed form.
    let n_max = SERIES_DEGREE as usize;
    let taylor: Vec<BigRational> = (0..=n_max)
        .map(|n| -> Result<BigRational> {
            let n32 = n as u32;
            Ok(match id {
                EquationId::CauchyWard | EquationId::CauchyCoadd => {
                    if n == 1 {
                        expected.0.clone()
                    } else {
                        BigRational::zero()
                    }
                }
                EquationId::AbelWard => (-kq.clone()).powi(n as i64) / crate::qcore::q_fact(n32, &q),
                _ => {
                    let a = -(q.clone() * kq.clone());
                    a.powi(n as i64) * q.powi(choose2(n as i64)) / crate::qcore::q_fact(n32, &q)
                }
            })
        })
        .collect::<Result<_>>()?;
    // a_n in the weighted basis of the addition law.
    let weighted: Vec<BigRational> = taylor
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let mut w = c.clone() * crate::qcore::q_fact(n as u32, &q);
            if add == AdditionKind::Coadd {
                w = w / q.powi(choose2(n as i64));
            }
            w
        })
        .collect();
    let lhs = series_q_compose(&weighted, add, &BigRational::from_i64(1), &BigRational::from_i64(1), &q)?;
    let fx = univariate(&taylor, false);
    let fy = univariate(&taylor, true);
    let rhs = match id {
        EquationId::CauchyWard | EquationId::CauchyCoadd => fx.add(&fy),
        _ => fx.mul(&fy).truncate(SERIES_DEGREE),
    };
    let residual = lhs.sub(&rhs);
    let residual_max = residual.terms().map(|(_, c)| Signed::abs(c)).fold(BigRational::zero(), |a, b| a.max(b));
    if !residual_max.is_zero() {
        return Err(QError::Residual {
            what: format!("{id} coefficient check"),
            value: residual_max.to_f64(),
            tol: 0.0,
        });
    }
    let descriptor = assemble(vec![(
        coef.to_f64(),
        match &atom {
            Atom1D::Monomial(e) => FunctionDescriptor::Monomial(*e, 0.into()),
            other => FunctionDescriptor::Separable(other.clone(), Atom1D::Constant),
        },
    )]);
    let points = ((SERIES_DEGREE + 1) * (SERIES_DEGREE + 2) / 2) as usize;
    Ok(SolutionReport {
        equation: id,
        descriptor: Some(descriptor),
        formula: formula.to_string(),
        transform_domain: format!("F(r) = {}", f_img.in_var(Var::First)),
        transform_expr: Some(f_img.in_var(Var::First).to_f64()),
        partial_fractions: None,
        residual_max: Some(residual_max.to_f64()),
        lattice_points_checked: points,
        inversion_incomplete: false,
    })
}

fn data_image<T: QScalar>(data: &Data1D, kind: Kind1D, var: Var, ctx: &QContext) -> Result<RSExpr<T>> {
    let mut acc = SExpr::zero();
    for (c, atom) in data {
        acc = acc.add(&qlap1d_catalog::<T>(atom, kind, ctx)?.scale(&T::from_f64(*c)));
    }
    Ok(acc.in_var(var))
}

fn max_residual(
    u: &FunctionDescriptor,
    ctx: &QContext,
    lhs: impl Fn(&dyn Fn((u32, u32)) -> Result<f64>, f64, f64) -> Result<f64>,
) -> Result<(f64, usize)> {
    let f = u.to_lattice(ctx)?;
    let ctx = ctx.as_float();
    let points = lattice_points(ctx.q());
    let mut worst: f64 = 0.0;
    for &(x, t) in &points {
        let d = |o: (u32, u32)| q_partial(&f, (x, t), o, &ctx);
        worst = worst.max(lhs(&d, x, t)?.abs());
    }
    Ok((worst, points.len()))
}

/// `u_t + c u_x = 0`, `u(x,0) = f(x)`, `u(0,t) = g(t)`, under K1.
pub fn solve_transport(c: f64, f: &Data1D, g: &Data1D, ctx: &QContext) -> Result<SolutionReport> {
    if c == 0.0 || !c.is_finite() {
        return Err(QError::Domain("transport speed c must be nonzero".into()));
    }
    let ex = exact_ctx(ctx)?;
    let lf = data_image::<BigRational>(f, Kind1D::First, Var::First, &ex)?;
    let lg = data_image::<BigRational>(g, Kind1D::First, Var::Second, &ex)?;
    let den = RSExpr::rational(BigRational::from_i64(1), vec![Factor::Mixed { lambda: -br(c) }]);
    let u_img = lf.add(&lg.scale(&br(c))).mul(&den).normalize();
    finish_pde(EquationId::Transport, u_img, None, ctx, |d, _, _| {
        Ok(d((0, 1))? + c * d((1, 0))?)
    })
}

fn finish_pde(
    id: EquationId,
    u_img: RSExpr<BigRational>,
    partial: Option<String>,
    ctx: &QContext,
    lhs: impl Fn(&dyn Fn((u32, u32)) -> Result<f64>, f64, f64) -> Result<f64>,
) -> Result<SolutionReport> {
    let ex = exact_ctx(ctx)?;
    let transform_domain = u_img.to_string();
    let (descriptor, residual, points, incomplete) = match inverse_catalog(&u_img, TransformKind::K1, &ex) {
        Ok(d) => {
            let (res, n) = max_residual(&d, ctx, lhs)?;
            enforce(&format!("{id} equation"), res)?;
            (Some(d), Some(res), n, false)
        }
        Err(QError::NoMatch(_)) | Err(QError::UnsupportedMultiplicity(_)) => (None, None, 0, true),
        Err(e) => return Err(e),
    };
    let formula = match &descriptor {
        Some(d) => format!("u(x, t) = {}", d.to_string().replace('y', "t")),
        None => format!("u = inverse K1 transform of {transform_domain}"),
    };
    Ok(SolutionReport {
        equation: id,
        descriptor,
        formula,
        transform_domain,
        transform_expr: Some(u_img.to_f64()),
        partial_fractions: partial,
        residual_max: residual,
        lattice_points_checked: points,
        inversion_incomplete: incomplete,
    })
}

/// The telegraph equation
/// `c² u_xx − u_tt − (α+β) u_t − αβ u = [c² − (α+1)(β+1)] e_q(x ⊕_q t)`
/// with solution `u = e_q(x ⊕_q t)`.
pub fn verify_telegraph(c: f64, alpha: f64, beta: f64, ctx: &QContext) -> Result<SolutionReport> {
    let u = FunctionDescriptor::ExpQAdd {
        a: 1.0,
        b: 1.0,
        family: Family::Small,
    };
    let rhs_factor = c * c - (alpha + 1.0) * (beta + 1.0);
    let fctx = ctx.as_float();
    let (residual, points) = max_residual(&u, ctx, |d, x, t| {
        let lhs = c * c * d((2, 0))? - d((0, 2))? - (alpha + beta) * d((0, 1))? - alpha * beta * d((0, 0))?;
        let rhs = rhs_factor * q_exp_small(x, &fctx)? * q_exp_small(t, &fctx)?;
        Ok(lhs - rhs)
    })?;
    enforce("telegraph equation", residual)?;

    // Transformed equation with U = 1/((r−1)(s−1)) and exact traces.
    let ex = exact_ctx(ctx)?;
    let one = BigRational::from_i64(1);
    let u_img = RSExpr::rational(
        one.clone(),
        vec![Factor::lin(Var::First, one.clone()), Factor::lin(Var::Second, one)],
    );
    let bd = BoundaryData::<BigRational>::from_descriptor(&u, TransformKind::K1, (2, 2), &ex)?;
    let di = |spec: DerivSpec| derivative_image(TransformKind::K1, spec, &u_img, &bd, &ex);
    let (c2, ab, apb) = (br(c * c), br(alpha * beta), br(alpha + beta));
    let lhs = di(DerivSpec::Dxx)?
        .scale(&c2)
        .sub(&di(DerivSpec::Dyy)?)
        .sub(&di(DerivSpec::Dy)?.scale(&apb))
        .sub(&u_img.scale(&ab));
    let rhs = u_img.scale(&br(rhs_factor));
    if !lhs.sub(&rhs).normalize().is_zero() {
        return Err(QError::Residual {
            what: "telegraph transform-domain identity".into(),
            value: f64::NAN,
            tol: 0.0,
        });
    }
    let numeric = qlap2d_numeric(&u, 2.0, 2.0, TransformKind::K1, &Plans2D::default(), ctx)?;
    enforce("telegraph transform value at (2, 2)", (numeric - 1.0).abs())?;
    Ok(SolutionReport {
        equation: EquationId::Telegraph,
        descriptor: Some(u),
        formula: "u(x, t) = e_q(x (+)_q t)".into(),
        transform_domain: u_img.to_string(),
        transform_expr: Some(u_img.to_f64()),
        partial_fractions: None,
        residual_max: Some(residual),
        lattice_points_checked: points,
        inversion_incomplete: false,
    })
}

/// `u_tt − c² u_xx = 0` with `u(x,0) = f`, `u_t(x,0) = g` and zero traces
/// at `x = 0`; the image is `(s F(r) + G(r)) / (s² − c² r²)`.
pub fn solve_wave(c: f64, f: &Data1D, g: &Data1D, ctx: &QContext) -> Result<SolutionReport> {
    if c == 0.0 || !c.is_finite() {
        return Err(QError::Domain("wave speed c must be nonzero".into()));
    }
    let ex = exact_ctx(ctx)?;
    let lf = data_image::<BigRational>(f, Kind1D::First, Var::First, &ex)?;
    let lg = data_image::<BigRational>(g, Kind1D::First, Var::First, &ex)?;
    let cc = br(c);
    let den = RSExpr::rational(
        BigRational::from_i64(1),
        vec![Factor::Mixed { lambda: cc.clone() }, Factor::Mixed { lambda: -cc.clone() }],
    );
    let u_img = lf.mul_poly(&QPoly2::var(Var::Second)).add(&lg).mul(&den).normalize();
    let parts = partial_fractions_mixed(&[lg, lf], &[cc.clone(), -cc])?;
    let recombined = recombine_mixed(&parts);
    if !recombined.sub(&u_img).normalize().is_zero() {
        return Err(QError::Residual {
            what: "wave partial-fraction recombination".into(),
            value: f64::NAN,
            tol: 0.0,
        });
    }
    let shown: Vec<String> = parts
        .iter()
        .filter(|(rho, _)| !rho.is_zero())
        .map(|(rho, l)| format!("({rho}) / (s - {l}*r)"))
        .collect();
    let partial = Some(if shown.is_empty() { "0".into() } else { shown.join(" + ") });
    finish_pde(EquationId::Wave, u_img, partial, ctx, |d, _, _| {
        Ok(d((0, 2))? - c * c * d((2, 0))?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtransform2::qlap2d_numeric;

    fn half() -> QContext {
        QContext::exact(BigRational::new(1.into(), 2.into())).unwrap()
    }

    #[test]
    fn cauchy_ward_gives_linear() {
        let r = solve_functional(EquationId::CauchyWard, 1.0, &half()).unwrap();
        assert_eq!(r.descriptor, Some(FunctionDescriptor::monomial(1, 0)));
        assert_eq!(r.residual_max, Some(0.0));
    }

    #[test]
    fn cauchy_coadd_gives_kqx() {
        let r = solve_functional(EquationId::CauchyCoadd, 3.0, &half()).unwrap();
        assert_eq!(
            r.descriptor,
            Some(FunctionDescriptor::LinearCombo(vec![(1.5, FunctionDescriptor::monomial(1, 0))]))
        );
    }

    #[test]
    fn abel_equations() {
        let r = solve_functional(EquationId::AbelWard, 2.0, &half()).unwrap();
        assert_eq!(
            r.descriptor,
            Some(FunctionDescriptor::Separable(Atom1D::ExpSmall(-2.0), Atom1D::Constant))
        );
        let r = solve_functional(EquationId::AbelCoadd, 2.0, &half()).unwrap();
        assert_eq!(
            r.descriptor,
            Some(FunctionDescriptor::Separable(Atom1D::ExpBig(-1.0), Atom1D::Constant))
        );
        assert_eq!(r.residual_max, Some(0.0));
    }

    #[test]
    fn transport_constant_data() {
        let one = vec![(1.0, Atom1D::Constant)];
        for c in [1.0, -2.0, 0.5] {
            let r = solve_transport(c, &one, &one, &half()).unwrap();
            assert_eq!(r.descriptor, Some(FunctionDescriptor::constant()));
            assert!(r.residual_max.unwrap() < 1e-12);
            assert_eq!(r.lattice_points_checked, 25);
        }
    }

    #[test]
    fn transport_powers_give_q_sum() {
        let ctx = half();
        for n in 1..=3 {
            let d = vec![(1.0, Atom1D::monomial(n))];
            let r = solve_transport(-1.0, &d, &d, &ctx).unwrap();
            let want = FunctionDescriptor::QAddPower {
                a: 1.0,
                b: 1.0,
                n: n as u32,
                kind: AdditionKind::WardAdd,
            };
            assert_eq!(r.descriptor.as_ref(), Some(&want));
            assert!(r.residual_max.unwrap() < 1e-10);
            let img = r.transform_expr.unwrap();
            let num = qlap2d_numeric(&want, 1.5, 2.0, TransformKind::K1, &Plans2D::default(), &ctx).unwrap();
            assert!((img.eval_f64(1.5, 2.0) - num).abs() < 1e-8 * num.abs());
        }
    }

    #[test]
    fn transport_without_catalog_match_is_incomplete() {
        let d = vec![(1.0, Atom1D::monomial(1))];
        let r = solve_transport(2.0, &d, &Vec::new(), &half()).unwrap();
        assert!(r.inversion_incomplete);
        assert!(r.descriptor.is_none());
    }

    #[test]
    fn telegraph_cases() {
        let ctx = QContext::float(0.5).unwrap();
        for (c, a, b) in [(1.0, 0.0, 0.0), (2.0, 1.0, 3.0)] {
            let r = verify_telegraph(c, a, b, &ctx).unwrap();
            assert!(r.residual_max.unwrap() < 1e-8, "{:?}", r.residual_max);
        }
    }

    #[test]
    fn wave_cases() {
        let ctx = half();
        let zero = Vec::new();
        let one = vec![(1.0, Atom1D::Constant)];
        let r = solve_wave(1.0, &zero, &zero, &ctx).unwrap();
        assert_eq!(r.descriptor, Some(FunctionDescriptor::zero()));
        assert_eq!(r.residual_max, Some(0.0));
        let r = solve_wave(1.0, &one, &zero, &ctx).unwrap();
        assert!(r.inversion_incomplete);
        let img = r.transform_expr.unwrap();
        let (x, y) = (3.0, 2.0);
        assert!((img.eval_f64(x, y) - y / (x * (y * y - x * x))).abs() < 1e-14);
        assert!(r.partial_fractions.unwrap().contains("1/2"));
        let r = solve_wave(1.0, &zero, &one, &ctx).unwrap();
        let img = r.transform_expr.unwrap();
        assert!((img.eval_f64(x, y) - 1.0 / (x * (y * y - x * x))).abs() < 1e-14);
    }
}
