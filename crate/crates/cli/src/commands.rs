use serde::Serialize;

use qlab_core::context::QContext;
use qlab_core::grammar::{parse_data, parse_descriptor, parse_real};
use qlab_core::qapps::{solve as solve_equation, EquationId, EquationSpec};
use qlab_core::qcalc::LatticeSumPlan;
use qlab_core::qcore::{q_binomial, q_factorial, q_number, q_pochhammer, PochCount, QValue};
use qlab_core::qspecial::{q_exp_big, q_exp_small, q_gamma_first, q_gamma_second, q_trig, TrigSelector};
use qlab_core::qtransform2::{check_region, qlap2d_catalog, qlap2d_numeric, Plans2D, TransformKind};
use qlab_core::scalar::parse_rational;
use qlab_core::verify::{self, q_label, rel_diff, Status, Suite, VerifyRecord};

use crate::config::{CliError, CliResult, Common, ScalarMode, TransformMode, EXIT_OK, EXIT_VERIFY};
use crate::report::emit;

#[derive(Serialize)]
#[serde(untagged)]
enum Value {
    Exact(String),
    Float(f64),
}

impl From<QValue> for Value {
    fn from(v: QValue) -> Self {
        match v {
            QValue::Exact(e) => Value::Exact(e.to_string()),
            QValue::Float(f) => Value::Float(f),
        }
    }
}

#[derive(Serialize)]
struct EvalRecord {
    function: String,
    args: String,
    q: String,
    value: Value,
}

fn arity(function: &str, args: &[String], n: usize) -> CliResult<()> {
    if args.len() != n {
        return Err(CliError::usage(format!(
            "{function} takes {n} argument(s), got {}",
            args.len()
        )));
    }
    Ok(())
}

fn integer(text: &str) -> CliResult<i64> {
    text.trim()
        .parse::<i64>()
        .map_err(|_| CliError::usage(format!("expected an integer, got `{text}`")))
}

fn poch_count(text: &str) -> CliResult<PochCount> {
    let t = text.trim();
    if t == "inf" || t == "infinity" {
        return Ok(PochCount::Infinite);
    }
    if let Ok(n) = t.parse::<u32>() {
        return Ok(PochCount::Finite(n));
    }
    Ok(PochCount::Real(parse_real(t)?))
}

fn eval_value(function: &str, args: &[String], ctx: &QContext) -> CliResult<Value> {
    // Transcendental values have no exact form and are always floating.
    let fctx = ctx.as_float();
    let value = match function {
        "qnum" => {
            arity(function, args, 1)?;
            q_number(parse_real(&args[0])?, ctx)?.into()
        }
        "qfact" => {
            arity(function, args, 1)?;
            q_factorial(integer(&args[0])?, ctx)?.into()
        }
        "qbinom" => {
            arity(function, args, 2)?;
            q_binomial(integer(&args[0])?, integer(&args[1])?, ctx)?.into()
        }
        "qpoch" => {
            arity(function, args, 2)?;
            let a = match (ctx.is_exact(), parse_rational(&args[0])) {
                (true, Some(a)) => QValue::Exact(a),
                _ => QValue::Float(parse_real(&args[0])?),
            };
            q_pochhammer(&a, poch_count(&args[1])?, ctx)?.into()
        }
        "eq" => {
            arity(function, args, 1)?;
            Value::Float(q_exp_small(parse_real(&args[0])?, &fctx)?)
        }
        "Eq" => {
            arity(function, args, 1)?;
            Value::Float(q_exp_big(parse_real(&args[0])?, &fctx)?)
        }
        "trig" => {
            arity(function, args, 2)?;
            let sel = TrigSelector::parse(&args[0])
                .ok_or_else(|| CliError::usage(format!("unknown trig selector `{}`", args[0])))?;
            Value::Float(q_trig(parse_real(&args[1])?, sel, &fctx)?)
        }
        "gamma1" => {
            arity(function, args, 1)?;
            q_gamma_first(parse_real(&args[0])?, ctx)?.into()
        }
        "gamma2" => {
            arity(function, args, 1)?;
            q_gamma_second(parse_real(&args[0])?, ctx)?.into()
        }
        other => return Err(CliError::usage(format!("unknown function `{other}`"))),
    };
    Ok(value)
}

pub fn eval(function: &str, args: &[String], mode: ScalarMode, common: &Common) -> CliResult<u8> {
    let ctx = common.context(mode)?;
    let value = eval_value(function, args, &ctx)?;
    let record = EvalRecord {
        function: function.to_string(),
        args: args.join(" "),
        q: q_label(&ctx),
        value,
    };
    emit(&[record], common)?;
    Ok(EXIT_OK)
}

fn plans(kind: TransformKind, r: f64, s: f64, window: Option<(i64, i64)>, ctx: &QContext) -> Plans2D {
    let Some((k_min, k_max)) = window else {
        return Plans2D::default();
    };
    let (kx, ky) = kind.axes();
    let plan = |scale: f64| LatticeSumPlan {
        k_min,
        k_max,
        tol: ctx.default_tol,
        ..LatticeSumPlan::with_scale(scale)
    };
    Plans2D {
        x: Some(plan(kx.default_scale(r, ctx.q()))),
        y: Some(plan(ky.default_scale(s, ctx.q()))),
    }
}

pub fn transform(
    descriptor: &str,
    kind: &str,
    r: &str,
    s: &str,
    mode: TransformMode,
    common: &Common,
) -> CliResult<u8> {
    let ctx = common.context(ScalarMode::Float)?;
    let tol = common.tol()?;
    let d = parse_descriptor(descriptor)?;
    let kind = TransformKind::parse(kind).ok_or_else(|| CliError::usage(format!("kind must be 1-4, got `{kind}`")))?;
    let (r, s) = (parse_real(r)?, parse_real(s)?);
    let mut record = VerifyRecord {
        op: "transform".into(),
        kind: kind.to_string(),
        q: q_label(&ctx),
        params: format!("f={d} r={r} s={s}"),
        value_numeric: None,
        value_catalog: None,
        rel_diff: None,
        status: Status::Pass,
    };
    if mode != TransformMode::Catalog {
        let p = plans(kind, r, s, common.k_window()?, &ctx);
        record.value_numeric = Some(qlap2d_numeric(&d, r, s, kind, &p, &ctx)?);
    }
    if mode != TransformMode::Numeric {
        // Outside the region the closed form is a continuation, not a transform.
        check_region(&d, kind, r, s, ctx.q())?;
        record.value_catalog = Some(qlap2d_catalog::<f64>(&d, kind, &ctx)?.eval_f64(r, s));
    }
    if let (Some(a), Some(b)) = (record.value_numeric, record.value_catalog) {
        let diff = rel_diff(a, b);
        record.rel_diff = Some(diff);
        if !(diff <= tol) {
            record.status = Status::Fail;
        }
    }
    emit(&[&record], common)?;
    Ok(if record.status == Status::Fail { EXIT_VERIFY } else { EXIT_OK })
}

pub fn verify(suite: &str, mode: ScalarMode, common: &Common) -> CliResult<u8> {
    let suite = Suite::parse(suite.trim()).ok_or_else(|| {
        CliError::usage(format!(
            "unknown suite `{suite}`; expected identities, transforms, derivatives or all"
        ))
    })?;
    let ctx = common.context(mode)?;
    let rows = verify::run(suite, &ctx, common.tol()?)?;
    verify::ensure_nonempty(&rows)?;
    emit(&rows, common)?;
    Ok(if verify::all_pass(&rows) { EXIT_OK } else { EXIT_VERIFY })
}

pub struct SolveParams<'a> {
    pub c: &'a str,
    pub alpha: &'a str,
    pub beta: &'a str,
    pub k: &'a str,
    pub f: &'a str,
    pub g: &'a str,
}

#[derive(Serialize)]
struct SolveRecord {
    equation: String,
    q: String,
    formula: String,
    descriptor: Option<String>,
    transform_domain: String,
    partial_fractions: Option<String>,
    residual_max: Option<f64>,
    lattice_points_checked: usize,
    inversion_incomplete: bool,
}

pub fn solve(equation: &str, p: &SolveParams, mode: ScalarMode, common: &Common) -> CliResult<u8> {
    let id = EquationId::parse(equation.trim()).ok_or_else(|| {
        let names: Vec<&str> = EquationId::ALL.iter().map(|e| e.name()).collect();
        CliError::usage(format!("unknown equation `{equation}`; expected one of {}", names.join(", ")))
    })?;
    let ctx = common.context(mode)?;
    let mut spec = EquationSpec::new(id);
    spec.c = parse_real(p.c)?;
    spec.alpha = parse_real(p.alpha)?;
    spec.beta = parse_real(p.beta)?;
    spec.k = parse_real(p.k)?;
    spec.f = parse_data(p.f)?;
    spec.g = parse_data(p.g)?;
    let report = solve_equation(&spec, &ctx)?;
    let record = SolveRecord {
        equation: id.name().to_string(),
        q: q_label(&ctx),
        formula: report.formula,
        descriptor: report.descriptor.map(|d| d.to_string()),
        transform_domain: report.transform_domain,
        partial_fractions: report.partial_fractions,
        residual_max: report.residual_max,
        lattice_points_checked: report.lattice_points_checked,
        inversion_incomplete: report.inversion_incomplete,
    };
    emit(&[record], common)?;
    Ok(EXIT_OK)
}
