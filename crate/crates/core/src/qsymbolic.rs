//! Partial fractions and catalog inversion.
//!
//! Inversion only recognizes images the catalog produces; anything else is
//! a [`QError::NoMatch`] naming the leftover terms.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::Zero;

use crate::context::{QContext, QScalar};
use crate::error::{QError, Result};
use crate::poly::{QPoly2, Var};
use crate::qcore::{expand_q_addition, AdditionKind};
use crate::qspecial::TrigSelector;
use crate::qtransform::{qlap1d_catalog, Atom1D, Kind1D};
use crate::qtransform2::{qlap2d_catalog, Family, FunctionDescriptor, TransformKind};
use crate::rsexpr::{Factor, RSExpr, SExpr, Term};
use crate::scalar::Scalar;

/// Relative tolerance for matching float parameters.
const MATCH_REL: f64 = 1e-9;

/// One summand of a univariate partial-fraction decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece<T> {
    /// `c / v^p`
    Power { c: T, p: Ratio<i64> },
    /// `c / (v − a)`
    Pole { c: T, a: T },
    /// `(α v + β) / (v² + c)`
    Quad { alpha: T, beta: T, c: T },
}

impl<T: Scalar> Piece<T> {
    /// The piece as a one-variable image in `s`.
    pub fn to_sexpr(&self) -> SExpr<T> {
        match self {
            Piece::Power { c, p } => SExpr::power(c.clone(), *p),
            Piece::Pole { c, a } => SExpr::pole(c.clone(), a.clone()),
            Piece::Quad { alpha, beta, c } => {
                let num = QPoly2::var(Var::Second)
                    .scale(alpha)
                    .add(&QPoly2::constant(beta.clone()));
                SExpr(RSExpr::from_term(Term::new(
                    num,
                    Ratio::zero(),
                    Ratio::zero(),
                    vec![Factor::quad(Var::Second, c.clone())],
                )))
            }
        }
    }
}

// Dense univariate polynomials, lowest degree first.

fn trim<T: Scalar>(mut p: Vec<T>) -> Vec<T> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn pmul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    trim(out)
}

fn padd<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    let get = |p: &[T], i: usize| p.get(i).cloned().unwrap_or_else(T::zero);
    trim((0..n).map(|i| get(a, i) + get(b, i)).collect())
}

fn pscale<T: Scalar>(a: &[T], c: &T) -> Vec<T> {
    trim(a.iter().map(|x| x.clone() * c.clone()).collect())
}

fn peval<T: Scalar>(p: &[T], v: &T) -> T {
    p.iter().rev().fold(T::zero(), |acc, c| acc * v.clone() + c.clone())
}

/// `p mod (v² + c)` as `(m1, m0)` meaning `m1 v + m0`.
fn pmod_quad<T: Scalar>(p: &[T], c: &T) -> (T, T) {
    let (mut m0, mut m1) = (T::zero(), T::zero());
    // v^k ≡ (−c)^{k/2} or (−c)^{(k−1)/2} v
    let neg = -c.clone();
    for (k, a) in p.iter().enumerate() {
        let w = neg.powi((k / 2) as i64) * a.clone();
        if k % 2 == 0 {
            m0 = m0 + w;
        } else {
            m1 = m1 + w;
        }
    }
    (m1, m0)
}

fn factor_dense<T: Scalar>(f: &Factor<T>) -> Result<Vec<T>> {
    match f {
        Factor::Lin { root, .. } => Ok(vec![-root.clone(), T::one()]),
        Factor::Quad { c, .. } => Ok(vec![c.clone(), T::zero(), T::one()]),
        Factor::Mixed { .. } => Err(QError::NoMatch(format!(
            "factor {f} couples r and s"
        ))),
    }
}

fn is_small<T: Scalar>(v: &T, scale: f64) -> bool {
    v.is_negligible(scale)
}

/// Decompose `num(v) / (v^pow · Π factors)` into pieces. `num[i]` is the
/// coefficient of `v^i`; factors must be distinct and must not vanish at 0.
pub fn decompose_univariate<T: Scalar>(num: &[T], pow: Ratio<i64>, factors: &[Factor<T>]) -> Result<Vec<Piece<T>>> {
    for (i, f) in factors.iter().enumerate() {
        if factors[i + 1..].iter().any(|g| g.approx_eq(f)) {
            return Err(QError::UnsupportedMultiplicity(format!("factor {f} is repeated")));
        }
    }
    let num = trim(num.to_vec());
    if num.is_empty() {
        return Ok(Vec::new());
    }
    if !pow.is_integer() || pow < Ratio::zero() {
        if !factors.is_empty() {
            return Err(QError::NoMatch(format!(
                "fractional power v^({pow}) next to other denominator factors"
            )));
        }
        let mut out = Vec::new();
        for (i, c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = pow - i as i64;
            if p <= Ratio::zero() {
                return Err(QError::NoMatch(format!("v^({}) is not a transform image", -p)));
            }
            out.push(Piece::Power { c: c.clone(), p });
        }
        return Ok(out);
    }
    let big_p = pow.to_integer() as usize;
    let dense: Vec<Vec<T>> = factors.iter().map(factor_dense).collect::<Result<_>>()?;
    let den = dense.iter().fold(vec![T::one()], |acc, f| pmul(&acc, f));
    let d0 = den[0].clone();
    if d0.is_zero() {
        return Err(QError::Domain("denominator factor vanishes at zero".into()));
    }
    // Series of 1/den at 0, long enough for the largest principal part.
    let mut inv = vec![T::one() / d0.clone()];
    for n in 1..big_p {
        let mut acc = T::zero();
        for k in 1..=n.min(den.len() - 1) {
            acc = acc + den[k].clone() * inv[n - k].clone();
        }
        inv.push(-acc / d0.clone());
    }
    let mut out = Vec::new();
    let mut proper: Vec<T> = Vec::new();
    let mut principal: BTreeMap<usize, T> = BTreeMap::new();
    for (i, c) in num.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if i >= big_p {
            let mut mono = vec![T::zero(); i - big_p];
            mono.push(c.clone());
            proper = padd(&proper, &mono);
            continue;
        }
        let k = big_p - i;
        for j in 1..=k {
            let e = principal.entry(j).or_insert_with(T::zero);
            *e = e.clone() + c.clone() * inv[k - j].clone();
        }
        // (1 − den·S_k) / v^k with S_k the series truncated below v^k.
        let sk: Vec<T> = inv[..k].to_vec();
        let rest = padd(&[T::one()], &pscale(&pmul(&den, &sk), &-T::one()));
        let shifted: Vec<T> = rest.iter().skip(k).cloned().collect();
        proper = padd(&proper, &pscale(&shifted, c));
    }
    for (j, c) in principal.into_iter().rev() {
        if !c.is_zero() {
            out.push(Piece::Power {
                c,
                p: Ratio::from_integer(j as i64),
            });
        }
    }
    let scale = num.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
    let proper: Vec<T> = trim(
        proper
            .into_iter()
            .map(|c| if is_small(&c, scale) { T::zero() } else { c })
            .collect(),
    );
    if proper.is_empty() {
        return Ok(out);
    }
    if proper.len() >= den.len() {
        return Err(QError::NoMatch("rational function has a polynomial part".into()));
    }
    for (i, f) in factors.iter().enumerate() {
        let others = dense
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .fold(vec![T::one()], |acc, (_, g)| pmul(&acc, g));
        match f {
            Factor::Lin { root, .. } => {
                let c = peval(&proper, root) / peval(&others, root);
                if !c.is_zero() {
                    out.push(Piece::Pole { c, a: root.clone() });
                }
            }
            Factor::Quad { c, .. } => {
                let (m1, m0) = pmod_quad(&proper, c);
                let (o1, o0) = pmod_quad(&others, c);
                let det = o0.clone() * o0.clone() + c.clone() * o1.clone() * o1.clone();
                let alpha = (m1.clone() * o0.clone() - m0.clone() * o1.clone()) / det.clone();
                let beta = (m0 * o0 + c.clone() * m1 * o1) / det;
                if !(alpha.is_zero() && beta.is_zero()) {
                    out.push(Piece::Quad {
                        alpha,
                        beta,
                        c: c.clone(),
                    });
                }
            }
            Factor::Mixed { .. } => unreachable!(),
        }
    }
    Ok(out)
}

/// Partial fractions of `num(v) / Π factors` with `deg num < deg Π factors`.
pub fn partial_fractions<T: Scalar>(num: &[T], factors: &[Factor<T>]) -> Result<SExpr<T>> {
    let deg: u32 = factors.iter().map(Factor::degree).sum();
    if trim(num.to_vec()).len() > deg as usize {
        return Err(QError::Domain("numerator degree must be below the denominator's".into()));
    }
    let pieces = decompose_univariate(num, Ratio::zero(), factors)?;
    Ok(pieces
        .iter()
        .fold(SExpr::zero(), |acc, p| SExpr(acc.0.add(&p.to_sexpr().0))))
}

/// Partial fractions in `s` with `r` as a parameter:
/// `Σ_k coeffs[k](r) s^k / Π_i (s − λ_i r)`, returned as residues
/// `(ρ_i(r), λ_i)` with the sum `Σ ρ_i(r) / (s − λ_i r)`.
pub fn partial_fractions_mixed<T: Scalar>(
    coeffs: &[RSExpr<T>],
    lambdas: &[T],
) -> Result<Vec<(RSExpr<T>, T)>> {
    let n = lambdas.len();
    if coeffs.len() > n {
        return Err(QError::Domain("numerator degree in s must be below the denominator's".into()));
    }
    for (i, l) in lambdas.iter().enumerate() {
        if lambdas[i + 1..].iter().any(|m| m.approx_eq(l)) {
            return Err(QError::UnsupportedMultiplicity(format!("root s = {l}·r is repeated")));
        }
    }
    let mut out = Vec::with_capacity(n);
    for (i, li) in lambdas.iter().enumerate() {
        let mut den = T::one();
        for (j, lj) in lambdas.iter().enumerate() {
            if j != i {
                den = den * (li.clone() - lj.clone());
            }
        }
        // ρ_i = Σ_k coeffs[k](r) (λ_i r)^k / (r^{n−1} Π (λ_i − λ_j))
        let mut rho = RSExpr::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let w = li.powi(k as i64) / den.clone();
            if w.is_zero() {
                continue;
            }
            let shift = RSExpr::monomial(w, Ratio::from_integer(n as i64 - 1 - k as i64), Ratio::zero());
            rho = rho.add(&c.mul(&shift));
        }
        out.push((rho.normalize(), li.clone()));
    }
    Ok(out)
}

/// `Σ ρ_i(r) / (s − λ_i r)`.
pub fn recombine_mixed<T: Scalar>(parts: &[(RSExpr<T>, T)]) -> RSExpr<T> {
    let mut acc = RSExpr::zero();
    for (rho, l) in parts {
        let pole = RSExpr::rational(T::one(), vec![Factor::Mixed { lambda: l.clone() }]);
        acc = acc.add(&rho.mul(&pole));
    }
    acc
}

/// Leading constant of a single-term catalog image.
fn unit_image<T: QScalar>(atom: &Atom1D, kind: Kind1D, ctx: &QContext) -> Result<T> {
    let img = qlap1d_catalog::<T>(atom, kind, ctx)?;
    match img.0.terms.as_slice() {
        [t] => Ok(t.num.coeff(0, 0)),
        _ => Err(QError::NoMatch(format!("{atom} has no monomial image"))),
    }
}

fn sqrt_of<T: Scalar>(v: &T) -> T {
    v.nth_root(2).unwrap_or_else(|| T::from_f64(v.to_f64().sqrt()))
}

/// Atoms whose images add up to the piece.
fn piece_atoms<T: QScalar>(piece: &Piece<T>, kind: Kind1D, ctx: &QContext) -> Result<Vec<(T, Atom1D)>> {
    let q = ctx.q_as::<T>()?;
    Ok(match piece {
        Piece::Power { c, p } => {
            let alpha = p - 1;
            let atom = if alpha.is_zero() {
                Atom1D::Constant
            } else {
                Atom1D::Monomial(alpha)
            };
            let unit = unit_image::<T>(&atom, kind, ctx)?;
            vec![(c.clone() / unit, atom)]
        }
        Piece::Pole { c, a } => {
            let atom = match kind {
                Kind1D::First => Atom1D::ExpSmall(a.to_f64()),
                Kind1D::Second => Atom1D::ExpBig((a.clone() * q).to_f64()),
            };
            vec![(c.clone(), atom)]
        }
        Piece::Quad { alpha, beta, c } => {
            let hyper = *c < T::zero();
            let w = if hyper { sqrt_of(&-c.clone()) } else { sqrt_of(c) };
            let big = kind == Kind1D::Second;
            let arg = if big { w.clone() * q } else { w.clone() };
            let even = TrigSelector::build(big, false, hyper);
            let odd = TrigSelector::build(big, true, hyper);
            let mut out = Vec::new();
            if !alpha.is_zero() {
                out.push((alpha.clone(), Atom1D::Trig(even, arg.to_f64())));
            }
            if !beta.is_zero() {
                out.push((beta.clone() / w, Atom1D::Trig(odd, arg.to_f64())));
            }
            out
        }
    })
}

fn univariate_coeffs<T: Scalar>(p: &QPoly2<T>, v: Var) -> Vec<T> {
    let deg = p.degree_in(v).unwrap_or(0) as usize;
    let mut out = vec![T::zero(); deg + 1];
    for (&(i, j), c) in p.terms() {
        let k = if v == Var::First { i } else { j };
        out[k as usize] = out[k as usize].clone() + c.clone();
    }
    out
}

/// Invert a one-variable image (written in `s`) into weighted atoms.
pub fn inverse_catalog_1d<T: QScalar>(e: &SExpr<T>, kind: Kind1D, ctx: &QContext) -> Result<Vec<(T, Atom1D)>> {
    let e = e.normalize();
    let mut out = Vec::new();
    for t in &e.0.terms {
        if !t.r_pow.is_zero()
            || t.num.degree_in(Var::First).unwrap_or(0) > 0
            || t.factors.iter().any(|f| f.is_mixed() || f.main_var() != Var::Second)
        {
            return Err(QError::NoMatch(format!("{t} is not a one-variable image")));
        }
        let num = univariate_coeffs(&t.num, Var::Second);
        for piece in decompose_univariate(&num, t.s_pow, &t.factors)? {
            out.extend(piece_atoms(&piece, kind, ctx)?);
        }
    }
    Ok(merge_atoms(out))
}

fn merge_atoms<T: Scalar>(items: Vec<(T, Atom1D)>) -> Vec<(T, Atom1D)> {
    let mut out: Vec<(T, Atom1D)> = Vec::new();
    for (c, a) in items {
        match out.iter_mut().find(|(_, b)| atoms_match(b, &a)) {
            Some(slot) => slot.0 = slot.0.clone() + c,
            None => out.push((c, a)),
        }
    }
    out.retain(|(c, _)| !c.is_negligible(1.0));
    out
}

/// Invert a two-variable image into a canonical descriptor.
pub fn inverse_catalog<T: QScalar>(e: &RSExpr<T>, kind: TransformKind, ctx: &QContext) -> Result<FunctionDescriptor> {
    let e = e.normalize();
    let leftover: Vec<String> = e
        .terms
        .iter()
        .filter(|t| t.factors.iter().any(Factor::is_mixed))
        .map(|t| t.to_string())
        .collect();
    if !leftover.is_empty() {
        return Err(QError::NoMatch(format!(
            "terms not in the catalog: {}",
            leftover.join(", ")
        )));
    }
    let (kx, ky) = kind.axes();
    let mut leaves = Vec::new();
    for t in &e.terms {
        let (fr, fs): (Vec<_>, Vec<_>) = t.factors.iter().cloned().partition(|f| f.main_var() == Var::First);
        let mut cache_x: BTreeMap<u32, Vec<(T, Atom1D)>> = BTreeMap::new();
        let mut cache_y: BTreeMap<u32, Vec<(T, Atom1D)>> = BTreeMap::new();
        for (&(i, j), c) in t.num.terms() {
            let xs = side_atoms(&mut cache_x, i, t.r_pow, &fr, kx, ctx)
                .map_err(|err| no_match_term(err, t))?;
            let ys = side_atoms(&mut cache_y, j, t.s_pow, &fs, ky, ctx)
                .map_err(|err| no_match_term(err, t))?;
            for (cx, gx) in &xs {
                for (cy, hy) in &ys {
                    leaves.push((c.clone() * cx.clone() * cy.clone(), gx.clone(), hy.clone()));
                }
            }
        }
    }
    recognize(leaves, kind, ctx)
}

fn no_match_term<T: Scalar>(err: QError, t: &Term<T>) -> QError {
    match err {
        QError::NoMatch(why) => QError::NoMatch(format!("{t}: {why}")),
        other => other,
    }
}

fn side_atoms<T: QScalar>(
    cache: &mut BTreeMap<u32, Vec<(T, Atom1D)>>,
    deg: u32,
    pow: Ratio<i64>,
    factors: &[Factor<T>],
    kind: Kind1D,
    ctx: &QContext,
) -> Result<Vec<(T, Atom1D)>> {
    if let Some(v) = cache.get(&deg) {
        return Ok(v.clone());
    }
    let mut num = vec![T::zero(); deg as usize];
    num.push(T::one());
    let mut out = Vec::new();
    for piece in decompose_univariate(&num, pow, factors)? {
        out.extend(piece_atoms(&piece, kind, ctx)?);
    }
    cache.insert(deg, out.clone());
    Ok(out)
}

/// Canonical form of a descriptor under a kind: the same shape
/// [`inverse_catalog`] returns for its image.
pub fn canonical<T: QScalar>(d: &FunctionDescriptor, kind: TransformKind, ctx: &QContext) -> Result<FunctionDescriptor> {
    recognize(d.separable_parts::<T>(ctx)?, kind, ctx)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_REL * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-14
}

pub fn atoms_match(a: &Atom1D, b: &Atom1D) -> bool {
    match (a, b) {
        (Atom1D::Constant, Atom1D::Constant) => true,
        (Atom1D::Monomial(x), Atom1D::Monomial(y)) => x == y,
        (Atom1D::ExpSmall(x), Atom1D::ExpSmall(y)) | (Atom1D::ExpBig(x), Atom1D::ExpBig(y)) => close(*x, *y),
        (Atom1D::Trig(s, x), Atom1D::Trig(t, y)) => s == t && close(*x, *y),
        _ => false,
    }
}

/// Structural equality with float tolerance on parameters.
pub fn descriptors_match(a: &FunctionDescriptor, b: &FunctionDescriptor) -> bool {
    use FunctionDescriptor as D;
    match (a, b) {
        (D::Monomial(a1, b1), D::Monomial(a2, b2)) => a1 == a2 && b1 == b2,
        (D::Separable(g1, h1), D::Separable(g2, h2)) => atoms_match(g1, g2) && atoms_match(h1, h2),
        (
            D::QAddPower { a, b, n, kind },
            D::QAddPower {
                a: a2,
                b: b2,
                n: n2,
                kind: k2,
            },
        ) => n == n2 && kind == k2 && close(*a, *a2) && close(*b, *b2),
        (
            D::ExpQAdd { a, b, family },
            D::ExpQAdd {
                a: a2,
                b: b2,
                family: f2,
            },
        ) => family == f2 && close(*a, *a2) && close(*b, *b2),
        (
            D::TrigQAdd {
                a,
                b,
                selector,
                family,
            },
            D::TrigQAdd {
                a: a2,
                b: b2,
                selector: s2,
                family: f2,
            },
        ) => selector == s2 && family == f2 && close(*a, *a2) && close(*b, *b2),
        (
            D::SeriesQAdd {
                coeffs,
                alpha,
                beta,
                family,
            },
            D::SeriesQAdd {
                coeffs: c2,
                alpha: a2,
                beta: b2,
                family: f2,
            },
        ) => {
            family == f2
                && close(*alpha, *a2)
                && close(*beta, *b2)
                && coeffs.len() == c2.len()
                && coeffs.iter().zip(c2).all(|(x, y)| close(*x, *y))
        }
        (D::LinearCombo(p1), D::LinearCombo(p2)) => {
            p1.len() == p2.len()
                && p1
                    .iter()
                    .zip(p2)
                    .all(|((c1, d1), (c2, d2))| close(*c1, *c2) && descriptors_match(d1, d2))
        }
        _ => false,
    }
}

/// Canonical atom and a sign; `None` when the atom is identically zero.
fn canonical_atom(a: &Atom1D) -> Option<(f64, Atom1D)> {
    Some(match a {
        Atom1D::Monomial(e) if e.is_zero() => (1.0, Atom1D::Constant),
        Atom1D::ExpSmall(v) | Atom1D::ExpBig(v) if *v == 0.0 => (1.0, Atom1D::Constant),
        Atom1D::Trig(sel, v) if *v == 0.0 => {
            if sel.is_odd() {
                return None;
            }
            (1.0, Atom1D::Constant)
        }
        Atom1D::Trig(sel, v) if *v < 0.0 => {
            let sign = if sel.is_odd() { -1.0 } else { 1.0 };
            (sign, Atom1D::Trig(*sel, -v))
        }
        other => (1.0, other.clone()),
    })
}

fn poly_degree(a: &Atom1D) -> Option<u32> {
    match a {
        Atom1D::Constant => Some(0),
        Atom1D::Monomial(e) if e.is_integer() && *e >= Ratio::zero() => Some(e.to_integer() as u32),
        _ => None,
    }
}

fn kind_family(kind: TransformKind) -> Option<Family> {
    match kind {
        TransformKind::K1 => Some(Family::Small),
        TransformKind::K2 => Some(Family::Big),
        _ => None,
    }
}

fn kind_addition(kind: TransformKind) -> AdditionKind {
    match kind {
        TransformKind::K1 => AdditionKind::WardAdd,
        TransformKind::K2 => AdditionKind::Coadd,
        TransformKind::K3 | TransformKind::K4 => AdditionKind::QpowAdd,
    }
}

fn signed_root<T: Scalar>(v: &T, n: u32) -> Option<T> {
    if *v < T::zero() {
        if n % 2 == 0 {
            return None;
        }
        Some(-(-v.clone()).nth_root(n)?)
    } else {
        v.nth_root(n)
    }
}

fn polys_match<T: Scalar>(a: &QPoly2<T>, b: &QPoly2<T>) -> bool {
    let diff = a.sub(b);
    if T::EXACT {
        diff.is_zero()
    } else {
        diff.max_abs() <= MATCH_REL * a.max_abs().max(b.max_abs())
    }
}

/// `p` as `k · (a x ∘ b y)^n` with `k = ±1`, if possible.
fn match_power<T: Scalar>(p: &QPoly2<T>, n: u32, add: AdditionKind, q: &T) -> Option<(f64, FunctionDescriptor)> {
    let cx = p.coeff(n, 0);
    let cy = p.coeff(0, n);
    if cx.is_zero() || cy.is_zero() {
        return None;
    }
    let base = expand_q_addition(add, n, q);
    let signs: &[f64] = if n % 2 == 0 { &[1.0, -1.0] } else { &[1.0] };
    for &k in signs {
        let kt = T::from_f64(k);
        let ax = cx.clone() / (kt.clone() * base.coeff(n, 0));
        let by = cy.clone() / (kt.clone() * base.coeff(0, n));
        let Some(a) = signed_root(&ax, n) else { continue };
        let Some(b0) = signed_root(&by, n) else { continue };
        let bs = if n % 2 == 0 { vec![b0.clone(), -b0] } else { vec![b0] };
        for b in bs {
            let cand = base.scale_vars(&a, &b).scale(&kt);
            if polys_match(&cand, p) {
                return Some((
                    k,
                    FunctionDescriptor::QAddPower {
                        a: a.to_f64(),
                        b: b.to_f64(),
                        n,
                        kind: add,
                    },
                ));
            }
        }
    }
    None
}

/// Trig leaf pair `(even-or-odd shape, selectors)` key.
fn trig_key(g: &Atom1D, h: &Atom1D) -> Option<(bool, bool, u64, u64)> {
    match (g, h) {
        (Atom1D::Trig(s, a), Atom1D::Trig(t, b)) if s.is_big() == t.is_big() && s.is_hyperbolic() == t.is_hyperbolic() => {
            Some((s.is_big(), s.is_hyperbolic(), a.to_bits(), b.to_bits()))
        }
        _ => None,
    }
}

/// Assemble leaves `c · g(x) h(y)` into recognized catalog shapes.
pub fn recognize<T: QScalar>(
    leaves: Vec<(T, Atom1D, Atom1D)>,
    kind: TransformKind,
    ctx: &QContext,
) -> Result<FunctionDescriptor> {
    let q = ctx.q_as::<T>()?;
    // Canonical atoms, merged.
    let mut merged: Vec<(T, Atom1D, Atom1D)> = Vec::new();
    for (c, g, h) in leaves {
        let (Some((sg, g)), Some((sh, h))) = (canonical_atom(&g), canonical_atom(&h)) else {
            continue;
        };
        let c = c * T::from_f64(sg * sh);
        match merged
            .iter_mut()
            .find(|(_, g2, h2)| atoms_match(g2, &g) && atoms_match(h2, &h))
        {
            Some(slot) => slot.0 = slot.0.clone() + c,
            None => merged.push((c, g, h)),
        }
    }
    let scale = merged.iter().map(|(c, _, _)| c.to_f64().abs()).fold(0.0, f64::max);
    merged.retain(|(c, _, _)| !c.is_negligible(scale));

    let mut out: Vec<(f64, FunctionDescriptor)> = Vec::new();
    let mut rest = Vec::new();
    // Polynomial leaves by total degree.
    let mut by_degree: BTreeMap<u32, QPoly2<T>> = BTreeMap::new();
    for (c, g, h) in merged {
        match (poly_degree(&g), poly_degree(&h)) {
            (Some(i), Some(j)) => {
                by_degree.entry(i + j).or_insert_with(QPoly2::zero).add_term(i, j, c);
            }
            _ => rest.push((c, g, h)),
        }
    }
    let add = kind_addition(kind);
    for (n, p) in by_degree {
        if n > 0 && p.len() > 1 {
            if let Some((k, d)) = match_power(&p, n, add, &q) {
                out.push((k, d));
                continue;
            }
        }
        for (&(i, j), c) in p.terms() {
            out.push((c.to_f64(), FunctionDescriptor::monomial(i as i64, j as i64)));
        }
    }
    // Trig pairs of one family.
    let family = kind_family(kind);
    let mut groups: BTreeMap<(bool, bool, u64, u64), Vec<(T, Atom1D, Atom1D)>> = BTreeMap::new();
    let mut others = Vec::new();
    for (c, g, h) in rest {
        match trig_key(&g, &h) {
            Some(key) if family.is_some_and(|f| (f == Family::Big) == key.0) => {
                groups.entry(key).or_default().push((c, g, h))
            }
            _ => others.push((c, g, h)),
        }
    }
    for ((big, hyp, a_bits, b_bits), group) in groups {
        let (a, b) = (f64::from_bits(a_bits), f64::from_bits(b_bits));
        let fam = if big { Family::Big } else { Family::Small };
        let coef = |odd_x: bool, odd_y: bool| -> T {
            group
                .iter()
                .filter(|(_, g, h)| {
                    matches!((g, h), (Atom1D::Trig(s, _), Atom1D::Trig(t, _)) if s.is_odd() == odd_x && t.is_odd() == odd_y)
                })
                .fold(T::zero(), |acc, (c, _, _)| acc + c.clone())
        };
        let mut used = [false; 2];
        let tol = |x: &T, y: &T| (x.clone() - y.clone()).is_negligible(x.to_f64().abs());
        // Even part: cc·P + ss·Q.
        let (p, qq) = (coef(false, false), coef(true, true));
        if !p.is_zero() {
            let plus = if hyp { qq.clone() } else { -qq.clone() };
            let sign_b = if tol(&p, &plus) {
                Some(1.0)
            } else if tol(&p, &-plus) {
                Some(-1.0)
            } else {
                None
            };
            if let Some(sb) = sign_b {
                used[0] = true;
                out.push((
                    p.to_f64(),
                    FunctionDescriptor::TrigQAdd {
                        a,
                        b: sb * b,
                        selector: TrigSelector::build(big, false, hyp),
                        family: fam,
                    },
                ));
            }
        }
        // Odd part: sc·R + cs·S.
        let (r, s) = (coef(true, false), coef(false, true));
        if !r.is_zero() {
            let sign_b = if tol(&r, &s) {
                Some(1.0)
            } else if tol(&r, &-s.clone()) {
                Some(-1.0)
            } else {
                None
            };
            if let Some(sb) = sign_b {
                used[1] = true;
                out.push((
                    r.to_f64(),
                    FunctionDescriptor::TrigQAdd {
                        a,
                        b: sb * b,
                        selector: TrigSelector::build(big, true, hyp),
                        family: fam,
                    },
                ));
            }
        }
        for (c, g, h) in group {
            let even_shape = matches!((&g, &h), (Atom1D::Trig(s, _), Atom1D::Trig(t, _)) if s.is_odd() == t.is_odd());
            let part = if even_shape { 0 } else { 1 };
            if !used[part] {
                others.push((c, g, h));
            }
        }
    }
    // Exponential pairs of the kind's family, and everything else.
    for (c, g, h) in others {
        let exp_param = |a: &Atom1D| -> Option<(Family, f64)> {
            match a {
                Atom1D::ExpSmall(v) => Some((Family::Small, *v)),
                Atom1D::ExpBig(v) => Some((Family::Big, *v)),
                _ => None,
            }
        };
        let d = match (family, exp_param(&g), exp_param(&h)) {
            (Some(f), Some((fg, a)), Some((fh, b))) if fg == f && fh == f => {
                FunctionDescriptor::ExpQAdd { a, b, family: f }
            }
            (Some(f), Some((fg, a)), None) if fg == f && h == Atom1D::Constant => {
                FunctionDescriptor::ExpQAdd { a, b: 0.0, family: f }
            }
            (Some(f), None, Some((fh, b))) if fh == f && g == Atom1D::Constant => {
                FunctionDescriptor::ExpQAdd { a: 0.0, b, family: f }
            }
            _ => match (&g, &h) {
                (Atom1D::Monomial(x), Atom1D::Monomial(y)) => FunctionDescriptor::Monomial(*x, *y),
                (Atom1D::Monomial(x), Atom1D::Constant) => FunctionDescriptor::Monomial(*x, Ratio::zero()),
                (Atom1D::Constant, Atom1D::Monomial(y)) => FunctionDescriptor::Monomial(Ratio::zero(), *y),
                _ => FunctionDescriptor::Separable(g, h),
            },
        };
        out.push((c.to_f64(), d));
    }
    Ok(assemble(out))
}

/// Flatten, merge like leaves, drop zeros and sort.
pub fn assemble(parts: Vec<(f64, FunctionDescriptor)>) -> FunctionDescriptor {
    let mut flat: Vec<(f64, FunctionDescriptor)> = Vec::new();
    let mut stack: Vec<(f64, FunctionDescriptor)> = parts;
    while let Some((c, d)) = stack.pop() {
        match d {
            FunctionDescriptor::LinearCombo(inner) => {
                stack.extend(inner.into_iter().map(|(k, e)| (c * k, e)));
            }
            d => match flat.iter_mut().find(|(_, e)| descriptors_match(e, &d)) {
                Some(slot) => slot.0 += c,
                None => flat.push((c, d)),
            },
        }
    }
    let scale = flat.iter().map(|(c, _)| c.abs()).fold(0.0, f64::max);
    flat.retain(|(c, _)| c.abs() > 1e-12 * scale.max(1e-300));
    flat.sort_by_key(|(_, d)| format!("{d:?}"));
    if flat.len() == 1 && (flat[0].0 - 1.0).abs() < 1e-12 {
        return flat.pop().map(|(_, d)| d).unwrap_or_else(FunctionDescriptor::zero);
    }
    FunctionDescriptor::LinearCombo(flat)
}

/// One catalog entry: a descriptor and its normalized image.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub kind: TransformKind,
    pub descriptor: FunctionDescriptor,
    pub image: RSExpr<f64>,
}

/// The forward table over a fixed set of representative parameters, with
/// inversion as the backward direction.
#[derive(Debug, Clone)]
pub struct CatalogIndex {
    entries: Vec<CatalogEntry>,
    ctx: QContext,
}

impl CatalogIndex {
    /// Every catalog family, instantiated at the given parameters.
    pub fn new(ctx: &QContext, a: f64, b: f64) -> Result<Self> {
        let mut entries = Vec::new();
        for kind in TransformKind::ALL {
            for d in representative_descriptors(kind, a, b) {
                let image = qlap2d_catalog::<f64>(&d, kind, &ctx.as_float())?;
                entries.push(CatalogEntry {
                    kind,
                    descriptor: d,
                    image,
                });
            }
        }
        Ok(Self {
            entries,
            ctx: ctx.as_float(),
        })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn forward(&self, d: &FunctionDescriptor, kind: TransformKind) -> Result<RSExpr<f64>> {
        qlap2d_catalog(d, kind, &self.ctx)
    }

    pub fn backward(&self, e: &RSExpr<f64>, kind: TransformKind) -> Result<FunctionDescriptor> {
        inverse_catalog(e, kind, &self.ctx)
    }

    /// Entries whose image does not invert back to the descriptor.
    pub fn round_trip_failures(&self) -> Vec<(CatalogEntry, String)> {
        let mut bad = Vec::new();
        for e in &self.entries {
            let want = match canonical::<f64>(&e.descriptor, e.kind, &self.ctx) {
                Ok(d) => d,
                Err(err) => {
                    bad.push((e.clone(), err.to_string()));
                    continue;
                }
            };
            match self.backward(&e.image, e.kind) {
                Ok(got) if descriptors_match(&got, &want) => {}
                Ok(got) => bad.push((e.clone(), format!("inverted to {got}, expected {want}"))),
                Err(err) => bad.push((e.clone(), err.to_string())),
            }
        }
        bad
    }
}

/// The catalog families of a kind at parameters `a`, `b`.
pub fn representative_descriptors(kind: TransformKind, a: f64, b: f64) -> Vec<FunctionDescriptor> {
    use FunctionDescriptor as D;
    let mut out = vec![D::constant(), D::monomial(1, 1), D::monomial(2, 3)];
    out.push(D::Monomial(Ratio::new(1, 2), Ratio::new(-1, 2)));
    for n in 1..=3 {
        out.push(D::QAddPower {
            a,
            b,
            n,
            kind: kind_addition(kind),
        });
    }
    match kind_family(kind) {
        Some(family) => {
            out.push(D::ExpQAdd { a, b, family });
            for hyp in [false, true] {
                for odd in [false, true] {
                    out.push(D::TrigQAdd {
                        a,
                        b,
                        selector: TrigSelector::build(family == Family::Big, odd, hyp),
                        family,
                    });
                }
            }
        }
        None => {
            let (gx, hy) = match kind {
                TransformKind::K3 => (Atom1D::ExpBig(a), Atom1D::ExpSmall(b)),
                _ => (Atom1D::ExpSmall(a), Atom1D::ExpBig(b)),
            };
            out.push(D::Separable(gx, hy));
        }
    }
    out
}

impl<T: Scalar> Piece<T> {
    pub fn is_zero(&self) -> bool {
        match self {
            Piece::Power { c, .. } | Piece::Pole { c, .. } => c.is_zero(),
            Piece::Quad { alpha, beta, .. } => alpha.is_zero() && beta.is_zero(),
        }
    }
}
