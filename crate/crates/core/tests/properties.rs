use num_rational::{BigRational, Ratio};
use proptest::prelude::*;

use qlab_core::context::QContext;
use qlab_core::poly::{QPoly2, Var};
use qlab_core::qcore::{q_fact, series_q_compose, univariate, AdditionKind};
use qlab_core::qspecial::TrigSelector;
use qlab_core::qsymbolic::{canonical, descriptors_match, inverse_catalog};
use qlab_core::qtransform::{qlap1d_numeric, Atom1D, Kind1D};
use qlab_core::qtransform2::{
    atom_series_coeff, derivative_image, multiplication_image, qlap2d_catalog, qlap2d_numeric, qlap2d_numeric_fn,
    rsexpr_evaluator, scaling_image, BoundaryData, DerivSpec, Family, FunctionDescriptor, Plans2D, TransformKind,
};
use qlab_core::rsexpr::{Factor, RSExpr};
use qlab_core::scalar::{choose2, Scalar};
use qlab_core::verify::rel_diff;

fn exact_q() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=9, 2i64..=10).prop_filter("0 < q < 1", |(n, d)| n < d)
}

fn br(n: i64, d: i64) -> BigRational {
    BigRational::from_ratio(n, d)
}

fn kind() -> impl Strategy<Value = TransformKind> {
    prop::sample::select(TransformKind::ALL.to_vec())
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| br(n, d))
}

fn factor() -> impl Strategy<Value = Factor<BigRational>> {
    prop_oneof![
        (small_rational(), any::<bool>()).prop_map(|(c, x)| Factor::lin(if x { Var::First } else { Var::Second }, c)),
        (1i64..=4, any::<bool>()).prop_map(|(c, x)| Factor::quad(if x { Var::First } else { Var::Second }, br(c, 1))),
        small_rational()
            .prop_filter("nonzero", |l| *l != br(0, 1))
            .prop_map(|lambda| Factor::Mixed { lambda }),
    ]
}

fn rsexpr() -> impl Strategy<Value = RSExpr<BigRational>> {
    let term = (
        small_rational(),
        0i64..=3,
        0i64..=3,
        prop::collection::vec(factor(), 0..=2),
        0u32..=2,
        0u32..=2,
    )
        .prop_map(|(c, p, m, fs, i, j)| {
            RSExpr::rational(c, fs)
                .mul(&RSExpr::monomial(br(1, 1), Ratio::from_integer(p), Ratio::from_integer(m)))
                .mul_poly(&QPoly2::monomial(br(1, 1), i, j))
        });
    prop::collection::vec(term, 1..=3).prop_map(|ts| ts.iter().fold(RSExpr::zero(), |acc, t| acc.add(t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_preserves_value(e in rsexpr(), r in 5i64..=40, s in 5i64..=40) {
        // Points chosen off every generated root and mixed line.
        let (r, s) = (br(r, 7) + br(1, 1000), br(s, 11) + br(1, 999));
        let n = e.normalize();
        prop_assert_eq!(e.eval(&r, &s), n.eval(&r, &s));
    }

    #[test]
    fn transform_is_linear(
        k in kind(),
        (i, j) in (0i64..=3, 0i64..=3),
        alpha in -3i64..=3,
        beta in -3i64..=3,
        q in 0.3f64..0.7,
    ) {
        let ctx = QContext::float(q).unwrap();
        let f = FunctionDescriptor::monomial(i, j);
        let g = FunctionDescriptor::constant();
        let combo = FunctionDescriptor::LinearCombo(vec![(alpha as f64, f.clone()), (beta as f64, g.clone())]);
        let (r, s) = (2.0, 1.7);
        let lhs = qlap2d_numeric(&combo, r, s, k, &Plans2D::default(), &ctx).unwrap();
        let rhs = alpha as f64 * qlap2d_numeric(&f, r, s, k, &Plans2D::default(), &ctx).unwrap()
            + beta as f64 * qlap2d_numeric(&g, r, s, k, &Plans2D::default(), &ctx).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn separable_factorizes(
        k in kind(),
        i in 0i64..=3,
        a in -0.2f64..0.1,
        q in 0.3f64..0.8,
        r in 0.8f64..2.5,
        s in 0.8f64..2.5,
    ) {
        let ctx = QContext::float(q).unwrap();
        let (kx, ky) = k.axes();
        let h = match ky {
            Kind1D::First => Atom1D::ExpSmall(a),
            Kind1D::Second => Atom1D::ExpBig(a),
        };
        let g = Atom1D::monomial(i);
        let d = FunctionDescriptor::Separable(g.clone(), h.clone());
        // Generic tensor sum on one side, two 1-D sums on the other.
        let lat = d.to_lattice(&ctx).unwrap();
        let two_d = qlap2d_numeric_fn(&lat, r, s, k, &Plans2D::default(), &ctx).unwrap();
        let gx = qlap1d_numeric(&g.to_lattice(&ctx), r, kx, None, &ctx).unwrap();
        let hy = qlap1d_numeric(&h.to_lattice(&ctx), s, ky, None, &ctx).unwrap();
        prop_assert!(rel_diff(two_d, gx * hy) < 1e-10, "{two_d} vs {}", gx * hy);
    }

    #[test]
    fn scaling_rule(
        k in kind(),
        (i, j) in (0i64..=3, 0i64..=3),
        a in 0.5f64..2.0,
        b in 0.5f64..2.0,
        q in 0.3f64..0.8,
    ) {
        let ctx = QContext::float(q).unwrap();
        let d = FunctionDescriptor::monomial(i, j);
        let img = scaling_image::<f64>(&d, a, b, k, &ctx).unwrap();
        let scaled = d.scaled(a, b, &ctx).unwrap();
        let (r, s) = (1.2, 1.7);
        let num = qlap2d_numeric_fn(&scaled, r, s, k, &Plans2D::default(), &ctx).unwrap();
        prop_assert!(rel_diff(num, img.eval_f64(r, s)) < 1e-9);
    }

    #[test]
    fn derivative_closure(
        k in kind(),
        (i, j) in (0i64..=3, 0i64..=3),
        (nx, ny) in (0u32..=3, 0u32..=3),
        (qn, qd) in exact_q(),
    ) {
        let ctx = QContext::exact(br(qn, qd)).unwrap();
        let d = FunctionDescriptor::monomial(i, j);
        let f = qlap2d_catalog::<BigRational>(&d, k, &ctx).unwrap();
        let bd = BoundaryData::from_descriptor(&d, k, (nx, ny), &ctx).unwrap();
        let img = derivative_image(k, DerivSpec::Mixed(nx, ny), &f, &bd, &ctx).unwrap();
        let direct = qlap2d_catalog::<BigRational>(&d.q_partial_descriptor(nx, ny, &ctx).unwrap(), k, &ctx).unwrap();
        // The q-partial descriptor carries f64 weights, so compare values.
        for (r, s) in [(1.5, 2.5), (3.0, 1.25)] {
            prop_assert!(rel_diff(img.eval_f64(r, s), direct.eval_f64(r, s)) < 1e-12, "{img} vs {direct}");
        }
    }

    #[test]
    fn catalog_round_trip(
        k in kind(),
        (i, j) in (0i64..=3, 0i64..=3),
        n in 1u32..=3,
        (qn, qd) in exact_q(),
    ) {
        let ctx = QContext::exact(br(qn, qd)).unwrap();
        let add = match k {
            TransformKind::K1 => AdditionKind::WardAdd,
            TransformKind::K2 => AdditionKind::Coadd,
            _ => AdditionKind::QpowAdd,
        };
        for d in [
            FunctionDescriptor::monomial(i, j),
            FunctionDescriptor::QAddPower { a: 0.5, b: -0.25, n, kind: add },
        ] {
            let img = qlap2d_catalog::<BigRational>(&d, k, &ctx).unwrap();
            let back = inverse_catalog(&img, k, &ctx).unwrap();
            let want = canonical::<BigRational>(&d, k, &ctx).unwrap();
            prop_assert!(descriptors_match(&back, &want), "{back} vs {want}");
        }
    }

    #[test]
    fn hyperbolic_and_trig_addition(
        (qn, qd) in exact_q(),
        big in any::<bool>(),
        hyp in any::<bool>(),
        odd in any::<bool>(),
    ) {
        let q = br(qn, qd);
        let deg = 12u32;
        let coeffs = |sel: TrigSelector| -> Vec<BigRational> {
            (0..=deg).map(|k| atom_series_coeff(&Atom1D::Trig(sel, 1.0), k, &q).unwrap()).collect()
        };
        let even = coeffs(TrigSelector::build(big, false, hyp));
        let oddc = coeffs(TrigSelector::build(big, true, hyp));
        let target = if odd { &oddc } else { &even };
        let weights: Vec<BigRational> = target
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let w = c.clone() * q_fact(n as u32, &q);
                if big { w / q.powi(choose2(n as i64)) } else { w }
            })
            .collect();
        let family = if big { Family::Big } else { Family::Small };
        let lhs = series_q_compose(&weights, family.addition(), &br(1, 1), &br(1, 1), &q).unwrap();
        let (cx, cy) = (univariate(&even, false), univariate(&even, true));
        let (sx, sy) = (univariate(&oddc, false), univariate(&oddc, true));
        let rhs = if odd {
            sx.mul(&cy).add(&cx.mul(&sy))
        } else if hyp {
            cx.mul(&cy).add(&sx.mul(&sy))
        } else {
            cx.mul(&cy).sub(&sx.mul(&sy))
        };
        prop_assert!(lhs.sub(&rhs.truncate(deg)).is_zero());
    }

    #[test]
    fn series_of_ones_is_the_exponential(
        alpha in prop_oneof![-0.3f64..-0.05, 0.05f64..0.3],
        beta in prop_oneof![-0.3f64..-0.05, 0.05f64..0.3],
        big in any::<bool>(),
        q in 0.3f64..0.8,
    ) {
        let ctx = QContext::float(q).unwrap();
        let (family, kind) = if big { (Family::Big, TransformKind::K2) } else { (Family::Small, TransformKind::K1) };
        let series = FunctionDescriptor::SeriesQAdd { coeffs: vec![1.0; 60], alpha, beta, family };
        let exp = FunctionDescriptor::ExpQAdd { a: alpha, b: beta, family };
        let (r, s) = (1.5, 2.0);
        let a = qlap2d_catalog::<f64>(&series, kind, &ctx).unwrap().eval_f64(r, s);
        let b = qlap2d_catalog::<f64>(&exp, kind, &ctx).unwrap().eval_f64(r, s);
        prop_assert!(rel_diff(a, b) < 1e-10, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn multiplication_closure(
        big in any::<bool>(),
        which in 0usize..3,
        m in 0u32..=2,
        n in 0u32..=2,
        q in 0.4f64..0.7,
    ) {
        let ctx = QContext::float(q).unwrap();
        let (kind, e) = if big {
            (TransformKind::K2, Atom1D::ExpBig(-1.0))
        } else {
            (TransformKind::K1, Atom1D::ExpSmall(-1.0))
        };
        let f = [
            FunctionDescriptor::constant(),
            FunctionDescriptor::monomial(1, 1),
            FunctionDescriptor::Separable(e.clone(), e),
        ][which].clone();
        let base = q.powi(-3);
        let (r, s) = (1.5 * base, 2.0 * base);
        let img = rsexpr_evaluator(&qlap2d_catalog::<f64>(&f, kind, &ctx).unwrap());
        let g = multiplication_image(kind, m, n, img, &ctx).unwrap();
        let num = qlap2d_numeric_fn(&f.times_monomial(m, n, &ctx).unwrap(), r, s, kind, &Plans2D::default(), &ctx).unwrap();
        prop_assert!(rel_diff(num, g(r, s).unwrap()) < 1e-8);
    }
}
