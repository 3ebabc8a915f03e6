//! Text forms of descriptors, used by the command line and the bindings.
//!
//! ```text
//! descriptor  mono:a,b | qaddpow:a,b,n,kind | expqadd:a,b,family
//!             | trig:sel,a,b[,family] | sep:atom|atom | lin:c1*d1+c2*d2
//!             | const | zero
//! atom        mono:n | const | esmall:a | ebig:a | trig:sel,a
//! data        zero | [c*]atom + [c*]atom + ...
//! ```
//!
//! Exponents are rationals (`1/2`, `-3`); everything else is a decimal.

use num_rational::Ratio;

use crate::error::{QError, Result};
use crate::qapps::Data1D;
use crate::qcore::AdditionKind;
use crate::qspecial::TrigSelector;
use crate::qtransform::Atom1D;
use crate::qtransform2::{Family, FunctionDescriptor};

fn bad(text: &str, why: &str) -> QError {
    QError::Parse(format!("{why} in `{text}`"))
}

pub fn parse_ratio(text: &str) -> Result<Ratio<i64>> {
    let t = text.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => match (n.trim().parse::<i64>(), d.trim().parse::<i64>()) {
            (Ok(n), Ok(d)) if d != 0 => Some(Ratio::new(n, d)),
            _ => None,
        },
        None => t.parse::<i64>().ok().map(Ratio::from_integer),
    };
    parsed.ok_or_else(|| bad(text, "expected a rational"))
}

pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let (n, d) = (parse_real(n)?, parse_real(d)?);
        if d == 0.0 {
            return Err(bad(text, "zero denominator"));
        }
        return Ok(n / d);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(bad(text, "expected a number")),
    }
}

fn args<'a>(text: &'a str, body: &'a str, n: std::ops::RangeInclusive<usize>) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if !n.contains(&parts.len()) {
        return Err(bad(text, &format!("expected {}..={} arguments", n.start(), n.end())));
    }
    Ok(parts)
}

fn family(text: &str, f: &str) -> Result<Family> {
    Family::parse(f).ok_or_else(|| bad(text, "family must be small or big"))
}

fn selector(text: &str, s: &str) -> Result<TrigSelector> {
    TrigSelector::parse(s).ok_or_else(|| bad(text, "unknown trig selector"))
}

pub fn parse_atom(text: &str) -> Result<Atom1D> {
    let t = text.trim();
    if t == "const" || t == "1" {
        return Ok(Atom1D::Constant);
    }
    let (head, body) = t.split_once(':').ok_or_else(|| bad(text, "unknown atom"))?;
    let atom = match head {
        "mono" => Atom1D::Monomial(parse_ratio(body)?),
        "esmall" => Atom1D::ExpSmall(parse_real(body)?),
        "ebig" => Atom1D::ExpBig(parse_real(body)?),
        "trig" => {
            let a = args(text, body, 2..=2)?;
            Atom1D::Trig(selector(text, a[0])?, parse_real(a[1])?)
        }
        _ => return Err(bad(text, "unknown atom")),
    };
    atom.validate()?;
    Ok(atom)
}

/// One-variable data; `zero` is the zero function.
pub fn parse_data(text: &str) -> Result<Data1D> {
    let t = text.trim();
    if t == "zero" || t == "0" {
        return Ok(Vec::new());
    }
    t.split('+')
        .map(|term| match term.split_once('*') {
            Some((c, atom)) => Ok((parse_real(c)?, parse_atom(atom)?)),
            None => Ok((1.0, parse_atom(term)?)),
        })
        .collect()
}

pub fn parse_descriptor(text: &str) -> Result<FunctionDescriptor> {
    let t = text.trim();
    let d = match t {
        "const" | "1" => FunctionDescriptor::constant(),
        "zero" | "0" => FunctionDescriptor::zero(),
        _ => {
            let (head, body) = t.split_once(':').ok_or_else(|| bad(text, "unknown descriptor"))?;
            match head {
                "mono" => {
                    let a = args(text, body, 2..=2)?;
                    FunctionDescriptor::Monomial(parse_ratio(a[0])?, parse_ratio(a[1])?)
                }
                "qaddpow" => {
                    let a = args(text, body, 4..=4)?;
                    let n = a[2].parse::<u32>().map_err(|_| bad(text, "power must be a non-negative integer"))?;
                    let kind = AdditionKind::parse(a[3]).ok_or_else(|| bad(text, "unknown addition kind"))?;
                    FunctionDescriptor::QAddPower {
                        a: parse_real(a[0])?,
                        b: parse_real(a[1])?,
                        n,
                        kind,
                    }
                }
                "expqadd" => {
                    let a = args(text, body, 3..=3)?;
                    FunctionDescriptor::ExpQAdd {
                        a: parse_real(a[0])?,
                        b: parse_real(a[1])?,
                        family: family(text, a[2])?,
                    }
                }
                "trig" => {
                    let a = args(text, body, 3..=4)?;
                    let sel = selector(text, a[0])?;
                    let fam = match a.get(3) {
                        Some(f) => family(text, f)?,
                        None if sel.is_big() => Family::Big,
                        None => Family::Small,
                    };
                    FunctionDescriptor::TrigQAdd {
                        a: parse_real(a[1])?,
                        b: parse_real(a[2])?,
                        selector: sel,
                        family: fam,
                    }
                }
                "sep" => {
                    let (g, h) = body.split_once('|').ok_or_else(|| bad(text, "sep needs atom|atom"))?;
                    FunctionDescriptor::Separable(parse_atom(g)?, parse_atom(h)?)
                }
                "lin" => FunctionDescriptor::LinearCombo(
                    body.split('+')
                        .map(|term| {
                            let (c, d) = term.split_once('*').ok_or_else(|| bad(text, "lin terms are c*descriptor"))?;
                            Ok((parse_real(c)?, parse_descriptor(d)?))
                        })
                        .collect::<Result<_>>()?,
                ),
                _ => return Err(bad(text, "unknown descriptor")),
            }
        }
    };
    d.validate()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors() {
        assert_eq!(parse_descriptor("mono:1,1").unwrap(), FunctionDescriptor::monomial(1, 1));
        assert_eq!(
            parse_descriptor("mono:1/2,-1/2").unwrap(),
            FunctionDescriptor::Monomial(Ratio::new(1, 2), Ratio::new(-1, 2))
        );
        assert_eq!(
            parse_descriptor("qaddpow:0.5,1,3,ward_add").unwrap(),
            FunctionDescriptor::QAddPower {
                a: 0.5,
                b: 1.0,
                n: 3,
                kind: AdditionKind::WardAdd
            }
        );
        assert_eq!(
            parse_descriptor("expqadd:0.5,0.25,small").unwrap(),
            FunctionDescriptor::ExpQAdd {
                a: 0.5,
                b: 0.25,
                family: Family::Small
            }
        );
        assert!(matches!(
            parse_descriptor("trig:cosh_big,0.1,0.2").unwrap(),
            FunctionDescriptor::TrigQAdd { family: Family::Big, .. }
        ));
        assert_eq!(
            parse_descriptor("sep:esmall:-1|mono:2").unwrap(),
            FunctionDescriptor::Separable(Atom1D::ExpSmall(-1.0), Atom1D::monomial(2))
        );
        assert_eq!(
            parse_descriptor("lin:1*mono:0,0+4*mono:1,1").unwrap(),
            FunctionDescriptor::LinearCombo(vec![
                (1.0, FunctionDescriptor::monomial(0, 0)),
                (4.0, FunctionDescriptor::monomial(1, 1))
            ])
        );
    }

    #[test]
    fn data_and_atoms() {
        assert!(parse_data("zero").unwrap().is_empty());
        assert_eq!(parse_data("mono:0").unwrap(), vec![(1.0, Atom1D::monomial(0))]);
        assert_eq!(
            parse_data("2*mono:1+-1*ebig:0.5").unwrap(),
            vec![(2.0, Atom1D::monomial(1)), (-1.0, Atom1D::ExpBig(0.5))]
        );
        assert_eq!(parse_atom("trig:sin_small,2").unwrap(), Atom1D::Trig(TrigSelector::SinSmall, 2.0));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "mono:1", "qaddpow:1,1,-1,ward_add", "expqadd:1,1,medium", "foo:1", "sep:mono:1", "lin:mono:1,1"] {
            assert!(matches!(parse_descriptor(bad), Err(QError::Parse(_))), "{bad}");
        }
        assert!(parse_atom("mono:x").is_err());
        assert!(parse_real("1/0").is_err());
    }
}
