//! Property suites behind `qlab verify`: exact identities, catalog against
//! numeric transforms, and the operator theorems as two-path agreements.

use std::fmt;

use num_rational::BigRational;

use crate::context::{QContext, QScalar};
use crate::error::{QError, Result};
use crate::poly::QPoly2;
use crate::qcore::{
    e_big_coeffs, e_small_coeffs, expand_q_addition, q_fact, q_power_basis_product, series_q_compose, univariate,
    AdditionKind,
};
use crate::qspecial::TrigSelector;
use crate::qtransform::Atom1D;
use crate::qtransform2::{
    atom_series_coeff, check_region, derivative_image, multiplication_image, qlap2d_catalog, qlap2d_numeric,
    qlap2d_numeric_fn, rsexpr_evaluator, BoundaryData, DerivSpec, Family, FunctionDescriptor, Plans2D,
    TransformKind,
};
use crate::scalar::{choose2, Scalar};

/// Degree of the coefficient-wise series identities.
pub const SERIES_DEGREE: u32 = 12;
/// Largest degree of the q-addition expansions.
pub const EXPANSION_DEGREE: u32 = 8;
pub const GRID: [f64; 3] = [0.8, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Outside the convergence region; nothing to compare.
    Skip,
}

/// One flat row of a verification report.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VerifyRecord {
    pub op: String,
    pub kind: String,
    pub q: String,
    pub params: String,
    pub value_numeric: Option<f64>,
    pub value_catalog: Option<f64>,
    pub rel_diff: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Transforms,
    Derivatives,
    All,
}

impl Suite {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "identities" => Some(Suite::Identities),
            "transforms" => Some(Suite::Transforms),
            "derivatives" => Some(Suite::Derivatives),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Identities => "identities",
            Suite::Transforms => "transforms",
            Suite::Derivatives => "derivatives",
            Suite::All => "all",
        })
    }
}

pub fn q_label(ctx: &QContext) -> String {
    match ctx.q_exact() {
        Some(q) => q.to_string(),
        None => ctx.q().to_string(),
    }
}

pub fn all_pass(rows: &[VerifyRecord]) -> bool {
    rows.iter().all(|r| r.status != Status::Fail)
}

pub fn run(suite: Suite, ctx: &QContext, tol: f64) -> Result<Vec<VerifyRecord>> {
    let mut rows = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        rows.extend(identity_suite(ctx, tol)?);
    }
    if matches!(suite, Suite::Transforms | Suite::All) {
        for kind in TransformKind::ALL {
            rows.extend(transform_rows(kind, &table_descriptors(kind), ctx, tol)?);
        }
    }
    if matches!(suite, Suite::Derivatives | Suite::All) {
        rows.extend(derivative_suite(ctx, tol)?);
    }
    Ok(rows)
}

/// Values below this magnitude are compared absolutely.
pub const ABS_FLOOR: f64 = 1e-12;

/// Relative difference, absolute when both sides vanish to `ABS_FLOOR`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < ABS_FLOOR {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Prefix a divergence or convergence failure with the row it came from.
fn context(e: QError, kind: TransformKind, what: &str) -> QError {
    match e {
        QError::Divergence { tail, axis, detail } => QError::Divergence {
            tail,
            axis,
            detail: format!("{kind} {what}: {detail}"),
        },
        QError::Convergence { what: w, terms } => QError::Convergence {
            what: format!("{kind} {what}: {w}"),
            terms,
        },
        other => other,
    }
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

// ---------------------------------------------------------------- identities

fn homogeneous_part<T: Scalar>(p: &QPoly2<T>, n: u32) -> QPoly2<T> {
    QPoly2::from_terms(p.terms().filter(|((i, j), _)| i + j == n).map(|(k, c)| (*k, c.clone())))
}

/// Maclaurin coefficients of a unit-argument atom.
fn atom_coeffs<T: Scalar>(atom: &Atom1D, q: &T) -> Result<Vec<T>> {
    (0..=SERIES_DEGREE).map(|k| atom_series_coeff(atom, k, q)).collect()
}

/// `f(x ∘ y)` for Maclaurin coefficients `c_n`, composed in the law of the family.
fn compose<T: Scalar>(c: &[T], family: Family, q: &T) -> Result<QPoly2<T>> {
    let a: Vec<T> = c
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let w = c.clone() * q_fact(n as u32, q);
            match family {
                Family::Small => w,
                Family::Big => w / q.powi(choose2(n as i64)),
            }
        })
        .collect();
    series_q_compose(&a, family.addition(), &T::one(), &T::one(), q)
}

fn identity_rows<T: QScalar>(ctx: &QContext, tol: f64) -> Result<Vec<VerifyRecord>> {
    let q = ctx.q_as::<T>()?;
    let ql = q_label(ctx);
    let mut rows = Vec::new();
    let mut push = |op: &str, params: String, residual: f64| {
        let ok = if T::EXACT { residual == 0.0 } else { residual <= tol };
        rows.push(VerifyRecord {
            op: op.to_string(),
            kind: String::new(),
            q: ql.clone(),
            params,
            value_numeric: None,
            value_catalog: None,
            rel_diff: Some(residual),
            status: status(ok),
        });
    };
    let resid = |a: &QPoly2<T>, b: &QPoly2<T>| {
        let r = a.sub(b).max_abs();
        if T::EXACT { r } else { r / a.max_abs().max(b.max_abs()).max(1.0) }
    };
    let minus = -T::one();

    let small = univariate(&e_small_coeffs(SERIES_DEGREE, &q), false)
        .mul(&univariate(&e_small_coeffs(SERIES_DEGREE, &q), true));
    let big = univariate(&e_big_coeffs(SERIES_DEGREE, &q), false)
        .mul(&univariate(&e_big_coeffs(SERIES_DEGREE, &q), true));
    for n in 0..=EXPANSION_DEGREE {
        for sub in [false, true] {
            let kind = if sub { AdditionKind::QpowSub } else { AdditionKind::QpowAdd };
            let r = resid(&expand_q_addition(kind, n, &q), &q_power_basis_product(sub, n, &q));
            push("q_power_basis_vs_product", format!("{} n={n}", kind.name()), r);
        }
        // Definitions: [n]! times the degree-n part of e_q(x)e_q(y), resp.
        // [n]!/q^{C(n,2)} times that of E_q(x)E_q(y); subtraction flips y.
        let ward = homogeneous_part(&small, n).scale(&q_fact(n, &q));
        let coadd = homogeneous_part(&big, n).scale(&(q_fact(n, &q) / q.powi(choose2(n as i64))));
        for (kind, def) in [
            (AdditionKind::WardAdd, ward.clone()),
            (AdditionKind::WardSub, ward.scale_vars(&T::one(), &minus)),
            (AdditionKind::Coadd, coadd.clone()),
            (AdditionKind::Cosub, coadd.scale_vars(&T::one(), &minus)),
        ] {
            let r = resid(&expand_q_addition(kind, n, &q), &def);
            push("q_addition_expansion", format!("{} n={n}", kind.name()), r);
        }
    }

    let deg = SERIES_DEGREE;
    let e_small = e_small_coeffs(deg, &q);
    let e_big = e_big_coeffs(deg, &q);
    let r = resid(&compose(&e_small, Family::Small, &q)?, &small.truncate(deg));
    push("e_q_homomorphism", format!("degree={deg}"), r);
    let r = resid(&compose(&e_big, Family::Big, &q)?, &big.truncate(deg));
    push("big_e_q_homomorphism", format!("degree={deg}"), r);
    let flipped: Vec<T> = e_big
        .iter()
        .enumerate()
        .map(|(n, c)| if n % 2 == 1 { -c.clone() } else { c.clone() })
        .collect();
    let r = resid(
        &univariate(&e_small, false).mul(&univariate(&flipped, false)).truncate(deg),
        &QPoly2::one(),
    );
    push("e_q_reciprocal", format!("degree={deg}"), r);

    for (fam, big) in [(Family::Small, false), (Family::Big, true)] {
        for hyp in [true, false] {
            let even = atom_coeffs(&Atom1D::Trig(TrigSelector::build(big, false, hyp), 1.0), &q)?;
            let odd = atom_coeffs(&Atom1D::Trig(TrigSelector::build(big, true, hyp), 1.0), &q)?;
            let (cx, cy) = (univariate(&even, false), univariate(&even, true));
            let (sx, sy) = (univariate(&odd, false), univariate(&odd, true));
            let ss = sx.mul(&sy);
            let even_rhs = if hyp { cx.mul(&cy).add(&ss) } else { cx.mul(&cy).sub(&ss) };
            let odd_rhs = sx.mul(&cy).add(&cx.mul(&sy));
            for (odd_sel, c, rhs) in [(false, &even, even_rhs), (true, &odd, odd_rhs)] {
                let sel = TrigSelector::build(big, odd_sel, hyp);
                let r = resid(&compose(c, fam, &q)?, &rhs.truncate(deg));
                push("trig_addition", format!("{sel} degree={deg}"), r);
            }
        }
    }
    Ok(rows)
}

/// Exact residuals in exact mode, `tol`-bounded residuals in float mode.
pub fn identity_suite(ctx: &QContext, tol: f64) -> Result<Vec<VerifyRecord>> {
    if ctx.is_exact() {
        identity_rows::<BigRational>(ctx, tol)
    } else {
        identity_rows::<f64>(ctx, tol)
    }
}

// ---------------------------------------------------------------- transforms

/// Parameters inside every convergence region of the grid for `q ≥ 0.3`;
/// the tightest is `|b| < q s` on a second-kind axis.
pub const TABLE_A: f64 = 0.125;
pub const TABLE_B: f64 = -0.2;

/// The catalog table of a kind.
pub fn table_descriptors(kind: TransformKind) -> Vec<FunctionDescriptor> {
    use FunctionDescriptor as D;
    let (a, b) = (TABLE_A, TABLE_B);
    let half = num_rational::Ratio::new(1, 2);
    let mut out = vec![
        D::constant(),
        D::monomial(1, 1),
        D::LinearCombo(vec![(1.0, D::constant()), (4.0, D::monomial(1, 1))]),
    ];
    for n in 0..=4 {
        for m in 0..=4 {
            if (n, m) != (0, 0) && (n, m) != (1, 1) {
                out.push(D::monomial(n, m));
            }
        }
    }
    for (p, r) in [(half, half), (half, -half), (-half, half), (-half, -half)] {
        out.push(D::Monomial(p, r));
    }
    let add = match kind {
        TransformKind::K1 => AdditionKind::WardAdd,
        TransformKind::K2 => AdditionKind::Coadd,
        _ => AdditionKind::QpowAdd,
    };
    for n in 1..=3 {
        out.push(D::QAddPower { a, b, n, kind: add });
    }
    match kind {
        TransformKind::K1 | TransformKind::K2 => {
            let (family, big) = if kind == TransformKind::K1 {
                (Family::Small, false)
            } else {
                (Family::Big, true)
            };
            out.push(D::ExpQAdd { a, b, family });
            for hyp in [false, true] {
                for odd in [false, true] {
                    out.push(D::TrigQAdd {
                        a,
                        b,
                        selector: TrigSelector::build(big, odd, hyp),
                        family,
                    });
                }
            }
        }
        TransformKind::K3 => out.push(D::Separable(Atom1D::ExpBig(a), Atom1D::ExpSmall(b))),
        TransformKind::K4 => out.push(D::Separable(Atom1D::ExpSmall(a), Atom1D::ExpBig(b))),
    }
    out
}

/// Catalog against numeric on the `GRID × GRID` points.
pub fn transform_rows(
    kind: TransformKind,
    descriptors: &[FunctionDescriptor],
    ctx: &QContext,
    tol: f64,
) -> Result<Vec<VerifyRecord>> {
    let fctx = ctx.as_float();
    let ql = q_label(ctx);
    let mut rows = Vec::new();
    for d in descriptors {
        let image = qlap2d_catalog::<f64>(d, kind, &fctx)?;
        for r in GRID {
            for s in GRID {
                let mut row = VerifyRecord {
                    op: "transform".into(),
                    kind: kind.to_string(),
                    q: ql.clone(),
                    params: format!("f={d} r={r} s={s}"),
                    value_numeric: None,
                    value_catalog: None,
                    rel_diff: None,
                    status: Status::Skip,
                };
                if check_region(d, kind, r, s, fctx.q()).is_ok() {
                    let num = qlap2d_numeric(d, r, s, kind, &Plans2D::default(), &fctx)
                        .map_err(|e| context(e, kind, &format!("{d} at ({r}, {s})")))?;
                    let cat = image.eval_f64(r, s);
                    let diff = rel_diff(num, cat);
                    row.value_numeric = Some(num);
                    row.value_catalog = Some(cat);
                    row.rel_diff = Some(diff);
                    row.status = status(diff < tol);
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

// --------------------------------------------------------------- derivatives

pub const DERIV_POINTS: [(f64, f64); 2] = [(1.0, 1.0), (2.0, 1.5)];

pub fn derivative_specs() -> Vec<DerivSpec> {
    let mut v = vec![DerivSpec::Dx, DerivSpec::Dy, DerivSpec::DxDy, DerivSpec::Dxx, DerivSpec::Dyy];
    for n in 1..=3 {
        v.push(DerivSpec::DxN(n));
        v.push(DerivSpec::DyN(n));
    }
    v.push(DerivSpec::Mixed(2, 1));
    v.push(DerivSpec::Mixed(1, 2));
    v
}

/// Polynomial and exponential test functions of a kind.
pub fn derivative_test_functions(kind: TransformKind) -> Vec<FunctionDescriptor> {
    let (a, b) = (TABLE_A, TABLE_B);
    let mut v = vec![FunctionDescriptor::monomial(2, 3)];
    let (gx, gy) = match kind {
        TransformKind::K1 => (Atom1D::ExpSmall(a), Atom1D::ExpSmall(b)),
        TransformKind::K2 => (Atom1D::ExpBig(a), Atom1D::ExpBig(b)),
        TransformKind::K3 => (Atom1D::ExpBig(a), Atom1D::ExpSmall(b)),
        TransformKind::K4 => (Atom1D::ExpSmall(a), Atom1D::ExpBig(b)),
    };
    v.push(FunctionDescriptor::Separable(gx, gy));
    match kind {
        TransformKind::K1 => {
            v.push(FunctionDescriptor::QAddPower {
                a,
                b,
                n: 3,
                kind: AdditionKind::WardAdd,
            });
            v.push(FunctionDescriptor::ExpQAdd {
                a,
                b,
                family: Family::Small,
            });
        }
        TransformKind::K2 => v.push(FunctionDescriptor::ExpQAdd {
            a,
            b,
            family: Family::Big,
        }),
        _ => {}
    }
    v
}

/// Derivative theorem (image from `F` and traces) against the numeric
/// transform of the derivative.
pub fn derivative_rows(kind: TransformKind, ctx: &QContext, tol: f64) -> Result<Vec<VerifyRecord>> {
    let fctx = ctx.as_float();
    let ql = q_label(ctx);
    let mut rows = Vec::new();
    for d in derivative_test_functions(kind) {
        let f_img = qlap2d_catalog::<f64>(&d, kind, &fctx)?;
        for spec in derivative_specs() {
            let bd = BoundaryData::<f64>::from_descriptor(&d, kind, spec.orders(), &fctx)?;
            let img = derivative_image(kind, spec, &f_img, &bd, &fctx)?;
            let (nx, ny) = spec.orders();
            let dd = d.q_partial_descriptor(nx, ny, &fctx)?;
            for (r, s) in DERIV_POINTS {
                let num = qlap2d_numeric(&dd, r, s, kind, &Plans2D::default(), &fctx)
                    .map_err(|e| context(e, kind, &format!("{dd} at ({r}, {s})")))?;
                let cat = img.eval_f64(r, s);
                let diff = rel_diff(num, cat);
                rows.push(VerifyRecord {
                    op: "derivative".into(),
                    kind: kind.to_string(),
                    q: ql.clone(),
                    params: format!("f={d} spec={spec:?} r={r} s={s}"),
                    value_numeric: Some(num),
                    value_catalog: Some(cat),
                    rel_diff: Some(diff),
                    status: status(diff < tol),
                });
            }
        }
    }
    Ok(rows)
}

/// Far enough out that `t^2 E_q(−t)` converges against a second-kind
/// kernel, which needs `s > q^{−3}`.
pub fn multiplication_points(q: f64) -> [(f64, f64); 2] {
    let base = q.powi(-3);
    [(1.5 * base, 1.5 * base), (3.0 * base, 2.0 * base)]
}

/// `1`, `xy` and the exponential of the kind's family at `−1`.
pub fn multiplication_test_functions(kind: TransformKind) -> Vec<FunctionDescriptor> {
    let (gx, gy) = match kind {
        TransformKind::K1 => (Atom1D::ExpSmall(-1.0), Atom1D::ExpSmall(-1.0)),
        TransformKind::K2 => (Atom1D::ExpBig(-1.0), Atom1D::ExpBig(-1.0)),
        TransformKind::K3 => (Atom1D::ExpBig(-1.0), Atom1D::ExpSmall(-1.0)),
        TransformKind::K4 => (Atom1D::ExpSmall(-1.0), Atom1D::ExpBig(-1.0)),
    };
    vec![
        FunctionDescriptor::constant(),
        FunctionDescriptor::monomial(1, 1),
        FunctionDescriptor::Separable(gx, gy),
    ]
}

/// Multiplication theorem (q-derivatives of `F`) against the numeric
/// transform of `x^m y^n f`.
pub fn multiplication_rows(kind: TransformKind, ctx: &QContext, tol: f64) -> Result<Vec<VerifyRecord>> {
    let fctx = ctx.as_float();
    let ql = q_label(ctx);
    let mut rows = Vec::new();
    for d in multiplication_test_functions(kind) {
        let f_img = rsexpr_evaluator(&qlap2d_catalog::<f64>(&d, kind, &fctx)?);
        for m in 0..=2 {
            for n in 0..=2 {
                let g = multiplication_image(kind, m, n, f_img.clone(), &fctx)?;
                let lat = d.times_monomial(m, n, &fctx)?;
                for (r, s) in multiplication_points(fctx.q()) {
                    let num = qlap2d_numeric_fn(&lat, r, s, kind, &Plans2D::default(), &fctx)
                        .map_err(|e| context(e, kind, &format!("x^{m} y^{n} {d} at ({r}, {s})")))?;
                    let cat = g(r, s)?;
                    let diff = rel_diff(num, cat);
                    rows.push(VerifyRecord {
                        op: "multiplication".into(),
                        kind: kind.to_string(),
                        q: ql.clone(),
                        params: format!("f={d} m={m} n={n} r={r} s={s}"),
                        value_numeric: Some(num),
                        value_catalog: Some(cat),
                        rel_diff: Some(diff),
                        status: status(diff < tol),
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn derivative_suite(ctx: &QContext, tol: f64) -> Result<Vec<VerifyRecord>> {
    let mut rows = Vec::new();
    for kind in TransformKind::ALL {
        rows.extend(derivative_rows(kind, ctx, tol)?);
    }
    for kind in [TransformKind::K1, TransformKind::K2] {
        rows.extend(multiplication_rows(kind, ctx, tol)?);
    }
    Ok(rows)
}

/// Suite errors other than divergence become failed rows' absence; keep them loud.
pub fn ensure_nonempty(rows: &[VerifyRecord]) -> Result<()> {
    if rows.is_empty() {
        Err(QError::Domain("suite produced no rows".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_exact_at_half() {
        let ctx = QContext::exact(BigRational::new(1.into(), 2.into())).unwrap();
        let rows = identity_suite(&ctx, 0.0).unwrap();
        assert!(rows.len() > 50);
        for r in &rows {
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
    }

    #[test]
    fn identities_float() {
        let ctx = QContext::float(0.3).unwrap();
        let rows = identity_suite(&ctx, 1e-12).unwrap();
        assert!(all_pass(&rows));
    }

    #[test]
    fn first_kind_table_at_half() {
        let ctx = QContext::float(0.5).unwrap();
        let rows = transform_rows(TransformKind::K1, &table_descriptors(TransformKind::K1), &ctx, 1e-8).unwrap();
        let bad: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn all_tables_on_grid() {
        for q in [0.3, 0.5, 0.7] {
            let ctx = QContext::float(q).unwrap();
            let rows = run(Suite::Transforms, &ctx, 1e-8).unwrap();
            let bad: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
            assert!(bad.is_empty(), "{bad:#?}");
            assert!(rows.iter().all(|r| r.status == Status::Pass), "q={q}");
        }
    }

    #[test]
    fn operator_theorems_at_half() {
        let ctx = QContext::float(0.5).unwrap();
        let rows = derivative_suite(&ctx, 1e-8).unwrap();
        let bad: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse("all"), Some(Suite::All));
        assert_eq!(Suite::parse(""), None);
    }
}
