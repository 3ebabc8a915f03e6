//! Python bindings: contexts, q-functions, descriptors and their double
//! transforms, the verification suites and the equation solver.

use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use qlab_core::context::{Mode, QContext};
use qlab_core::error::QError;
use qlab_core::grammar::{parse_data, parse_descriptor};
use qlab_core::qapps::{self, EquationId, EquationSpec};
use qlab_core::qcore::{q_binomial, q_factorial, q_number, q_pochhammer, PochCount, QValue};
use qlab_core::qspecial::{q_exp_big, q_exp_small, q_gamma_first, q_gamma_second, q_trig, TrigSelector};
use qlab_core::qsymbolic::inverse_catalog;
use qlab_core::qtransform2::{qlap2d_catalog, qlap2d_numeric, FunctionDescriptor, Plans2D, TransformKind};
use qlab_core::rsexpr::RSExpr;
use qlab_core::scalar::parse_rational;
use qlab_core::verify::{self, Suite};

create_exception!(qlab, QLabError, PyException);
create_exception!(qlab, DivergenceError, QLabError);
create_exception!(qlab, CatalogMissError, QLabError);
create_exception!(qlab, ParseError, QLabError);
create_exception!(qlab, VerificationError, QLabError);

fn py_err(e: QError) -> PyErr {
    let msg = e.to_string();
    match e {
        QError::Divergence { .. } | QError::Convergence { .. } | QError::Limit(_) => DivergenceError::new_err(msg),
        QError::CatalogMiss(_) | QError::NoMatch(_) | QError::UnsupportedMultiplicity(_) => {
            CatalogMissError::new_err(msg)
        }
        QError::Parse(_) => ParseError::new_err(msg),
        QError::Residual { .. } => VerificationError::new_err(msg),
        _ => QLabError::new_err(msg),
    }
}

fn fraction<'py>(py: Python<'py>, v: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((v.to_string(),))
}

fn value<'py>(py: Python<'py>, v: QValue) -> PyResult<Bound<'py, PyAny>> {
    match v {
        QValue::Exact(e) => fraction(py, &e),
        QValue::Float(f) => Ok(f.into_pyobject(py)?.into_any()),
    }
}

/// Deformation parameter `0 < q < 1` with an exact or float evaluation mode.
#[pyclass(name = "QContext", frozen)]
pub struct PyQContext {
    inner: QContext,
}

#[pymethods]
impl PyQContext {
    /// `q` is a string such as `"1/2"` or a float.
    #[new]
    #[pyo3(signature = (q, mode = "exact"))]
    fn new(q: &Bound<'_, PyAny>, mode: &str) -> PyResult<Self> {
        let mode = match mode {
            "exact" => Mode::Exact,
            "float" => Mode::Float,
            other => return Err(PyValueError::new_err(format!("mode must be exact or float, got {other}"))),
        };
        let text = match q.extract::<String>() {
            Ok(t) => t,
            Err(_) => {
                let f: f64 = q.extract()?;
                if mode == Mode::Float {
                    return Ok(Self {
                        inner: QContext::float(f).map_err(py_err)?,
                    });
                }
                let r = BigRational::from_float(f).ok_or_else(|| PyValueError::new_err("q must be finite"))?;
                return Ok(Self {
                    inner: QContext::exact(r).map_err(py_err)?,
                });
            }
        };
        Ok(Self {
            inner: QContext::parse(&text, mode).map_err(py_err)?,
        })
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn q_exact<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.q_exact().map(|q| fraction(py, q)).transpose()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        if self.inner.is_exact() {
            "exact"
        } else {
            "float"
        }
    }

    fn __repr__(&self) -> String {
        format!("QContext(q={}, mode={})", verify::q_label(&self.inner), self.mode())
    }
}

/// `[a]_q`.
#[pyfunction]
fn qnum<'py>(py: Python<'py>, a: f64, ctx: &PyQContext) -> PyResult<Bound<'py, PyAny>> {
    value(py, q_number(a, &ctx.inner).map_err(py_err)?)
}

/// `[n]_q!`.
#[pyfunction]
fn qfact<'py>(py: Python<'py>, n: i64, ctx: &PyQContext) -> PyResult<Bound<'py, PyAny>> {
    value(py, q_factorial(n, &ctx.inner).map_err(py_err)?)
}

/// Gaussian binomial `[n k]_q`.
#[pyfunction]
fn qbinom<'py>(py: Python<'py>, n: i64, k: i64, ctx: &PyQContext) -> PyResult<Bound<'py, PyAny>> {
    value(py, q_binomial(n, k, &ctx.inner).map_err(py_err)?)
}

/// `(a; q)_n`; `n` is an integer, a real order, or `"inf"`.
#[pyfunction]
fn qpoch<'py>(py: Python<'py>, a: &Bound<'py, PyAny>, n: &Bound<'py, PyAny>, ctx: &PyQContext) -> PyResult<Bound<'py, PyAny>> {
    let a = match a.extract::<String>() {
        Ok(t) => match parse_rational(&t) {
            Some(r) if ctx.inner.is_exact() => QValue::Exact(r),
            Some(r) => QValue::Float(qlab_core::scalar::Scalar::to_f64(&r)),
            None => return Err(ParseError::new_err(format!("bad rational {t}"))),
        },
        Err(_) => QValue::Float(a.extract()?),
    };
    let count = if let Ok(t) = n.extract::<String>() {
        if t != "inf" {
            return Err(PyValueError::new_err("string order must be \"inf\""));
        }
        PochCount::Infinite
    } else if let Ok(k) = n.extract::<u32>() {
        PochCount::Finite(k)
    } else {
        PochCount::Real(n.extract()?)
    };
    value(py, q_pochhammer(&a, count, &ctx.inner).map_err(py_err)?)
}

/// Small q-exponential `e_q(z)`.
#[pyfunction]
fn eq(z: f64, ctx: &PyQContext) -> PyResult<f64> {
    q_exp_small(z, &ctx.inner.as_float()).map_err(py_err)
}

/// Big q-exponential `E_q(z)`.
#[pyfunction]
#[pyo3(name = "Eq")]
fn big_eq(z: f64, ctx: &PyQContext) -> PyResult<f64> {
    q_exp_big(z, &ctx.inner.as_float()).map_err(py_err)
}

/// q-trigonometric or hyperbolic function, e.g. `trig("sin_small", 1.0, ctx)`.
#[pyfunction]
fn trig(selector: &str, z: f64, ctx: &PyQContext) -> PyResult<f64> {
    let sel = TrigSelector::parse(selector).ok_or_else(|| ParseError::new_err(format!("unknown selector {selector}")))?;
    q_trig(z, sel, &ctx.inner.as_float()).map_err(py_err)
}

/// `Γ_q(t)`.
#[pyfunction]
fn gamma1<'py>(py: Python<'py>, t: f64, ctx: &PyQContext) -> PyResult<Bound<'py, PyAny>> {
    value(py, q_gamma_first(t, &ctx.inner).map_err(py_err)?)
}

/// `γ_q(t)`.
#[pyfunction]
fn gamma2<'py>(py: Python<'py>, t: f64, ctx: &PyQContext) -> PyResult<Bound<'py, PyAny>> {
    value(py, q_gamma_second(t, &ctx.inner).map_err(py_err)?)
}

fn kind(k: u8) -> PyResult<TransformKind> {
    TransformKind::parse(&k.to_string()).ok_or_else(|| PyValueError::new_err(format!("kind must be 1-4, got {k}")))
}

/// A function of `(x, y)` in the descriptor grammar, e.g. `"mono:1,1"`.
#[pyclass(name = "Descriptor", frozen)]
pub struct PyDescriptor {
    inner: FunctionDescriptor,
}

#[pymethods]
impl PyDescriptor {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_descriptor(text).map_err(py_err)?,
        })
    }

    /// Pointwise value.
    fn __call__(&self, x: f64, y: f64, ctx: &PyQContext) -> PyResult<f64> {
        self.inner.eval(x, y, &ctx.inner).map_err(py_err)
    }

    /// Numeric double transform by lattice summation.
    fn numeric(&self, kind: u8, r: f64, s: f64, ctx: &PyQContext) -> PyResult<f64> {
        qlap2d_numeric(&self.inner, r, s, self::kind(kind)?, &Plans2D::default(), &ctx.inner.as_float()).map_err(py_err)
    }

    /// Closed-form image from the catalog.
    fn catalog(&self, kind: u8, ctx: &PyQContext) -> PyResult<PyImage> {
        let k = self::kind(kind)?;
        let float = qlap2d_catalog::<f64>(&self.inner, k, &ctx.inner.as_float()).map_err(py_err)?;
        let exact = if ctx.inner.is_exact() {
            qlap2d_catalog::<BigRational>(&self.inner, k, &ctx.inner).ok()
        } else {
            None
        };
        Ok(PyImage {
            float,
            exact,
            kind: k,
            ctx: ctx.inner.clone(),
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Descriptor({})", self.inner)
    }
}

/// A transform image `F(r, s)`.
#[pyclass(name = "Image", frozen)]
pub struct PyImage {
    float: RSExpr<f64>,
    exact: Option<RSExpr<BigRational>>,
    kind: TransformKind,
    ctx: QContext,
}

#[pymethods]
impl PyImage {
    fn __call__(&self, r: f64, s: f64) -> f64 {
        self.float.eval_f64(r, s)
    }

    /// Exact value at rational `r`, `s` given as strings; needs an exact context.
    fn exact<'py>(&self, py: Python<'py>, r: &str, s: &str) -> PyResult<Bound<'py, PyAny>> {
        let e = self
            .exact
            .as_ref()
            .ok_or_else(|| QLabError::new_err("image has no exact form in this context"))?;
        let (r, s) = match (parse_rational(r), parse_rational(s)) {
            (Some(r), Some(s)) => (r, s),
            _ => return Err(ParseError::new_err("r and s must be rationals")),
        };
        let v = e.eval(&r, &s).ok_or_else(|| QLabError::new_err("pole or fractional power at this point"))?;
        fraction(py, &v)
    }

    #[getter]
    fn kind(&self) -> u8 {
        self.kind.number()
    }

    /// Recover a descriptor from the image by catalog lookup.
    fn invert(&self) -> PyResult<PyDescriptor> {
        let d = match &self.exact {
            Some(e) => inverse_catalog(e, self.kind, &self.ctx),
            None => inverse_catalog(&self.float, self.kind, &self.ctx.as_float()),
        }
        .map_err(py_err)?;
        Ok(PyDescriptor { inner: d })
    }

    fn __str__(&self) -> String {
        match &self.exact {
            Some(e) => e.to_string(),
            None => self.float.to_string(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Image({}, {})", self.kind, self.__str__())
    }
}

/// Run a suite (`identities`, `transforms`, `derivatives`, `all`); one dict per row.
#[pyfunction]
#[pyo3(signature = (suite, ctx, tol = 1e-9))]
fn run_verify<'py>(py: Python<'py>, suite: &str, ctx: &PyQContext, tol: f64) -> PyResult<Bound<'py, PyList>> {
    let suite = Suite::parse(suite).ok_or_else(|| PyValueError::new_err(format!("unknown suite {suite:?}")))?;
    let rows = verify::run(suite, &ctx.inner, tol).map_err(py_err)?;
    let out = PyList::empty(py);
    for r in rows {
        let d = PyDict::new(py);
        d.set_item("op", r.op)?;
        d.set_item("kind", r.kind)?;
        d.set_item("q", r.q)?;
        d.set_item("params", r.params)?;
        d.set_item("value_numeric", r.value_numeric)?;
        d.set_item("value_catalog", r.value_catalog)?;
        d.set_item("rel_diff", r.rel_diff)?;
        d.set_item("status", format!("{:?}", r.status).to_lowercase())?;
        out.append(d)?;
    }
    Ok(out)
}

/// Solve a model equation; data strings use the `mono:2`, `zero` grammar.
#[pyfunction]
#[pyo3(signature = (equation, ctx, c = 1.0, alpha = 0.0, beta = 0.0, k = 1.0, f = "zero", g = "zero"))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    equation: &str,
    ctx: &PyQContext,
    c: f64,
    alpha: f64,
    beta: f64,
    k: f64,
    f: &str,
    g: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let id = EquationId::parse(equation).ok_or_else(|| PyValueError::new_err(format!("unknown equation {equation}")))?;
    let mut spec = EquationSpec::new(id);
    spec.c = c;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.k = k;
    spec.f = parse_data(f).map_err(py_err)?;
    spec.g = parse_data(g).map_err(py_err)?;
    let rep = qapps::solve(&spec, &ctx.inner).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("equation", id.name())?;
    d.set_item("formula", rep.formula)?;
    d.set_item("descriptor", rep.descriptor.map(|x| x.to_string()))?;
    d.set_item("transform_domain", rep.transform_domain)?;
    d.set_item("partial_fractions", rep.partial_fractions)?;
    d.set_item("residual_max", rep.residual_max)?;
    d.set_item("lattice_points_checked", rep.lattice_points_checked)?;
    d.set_item("inversion_incomplete", rep.inversion_incomplete)?;
    Ok(d)
}

#[pymodule]
fn qlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("QLabError", py.get_type::<QLabError>())?;
    m.add("DivergenceError", py.get_type::<DivergenceError>())?;
    m.add("CatalogMissError", py.get_type::<CatalogMissError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("VerificationError", py.get_type::<VerificationError>())?;
    m.add_class::<PyQContext>()?;
    m.add_class::<PyDescriptor>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(qnum, m)?)?;
    m.add_function(wrap_pyfunction!(qfact, m)?)?;
    m.add_function(wrap_pyfunction!(qbinom, m)?)?;
    m.add_function(wrap_pyfunction!(qpoch, m)?)?;
    m.add_function(wrap_pyfunction!(eq, m)?)?;
    m.add_function(wrap_pyfunction!(big_eq, m)?)?;
    m.add_function(wrap_pyfunction!(trig, m)?)?;
    m.add_function(wrap_pyfunction!(gamma1, m)?)?;
    m.add_function(wrap_pyfunction!(gamma2, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
