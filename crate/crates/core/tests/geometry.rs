use dirac2d::catalog::standard_scenarios;
use dirac2d::clifford::Signature;
use dirac2d::expr::{parse, Expr, Params};
use dirac2d::fields::ExternalFields;
use dirac2d::geometry::{FrameTensor, SampleBox, SpinManifold};
use dirac2d::jet::Jet;
use dirac2d::operators::{DiracSystem, KillingData, PolySpinor, SpinorField, TensorForm, EVAL_ORDER};
use dirac2d::verify::sample_points;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;

fn p(s: &str) -> Expr {
    parse(s, &[]).unwrap()
}

fn sample_box() -> SampleBox {
    SampleBox::new((-1.0, 1.0), (0.2, 1.0))
}

fn liouville(sig: Signature, a: &str, b: &str) -> SpinManifold {
    let beta = format!("sqrt(({a})+({b}))");
    SpinManifold::new(sig, [[p("0"), p(&format!("1/{beta}"))], [p(&format!("1/{beta}")), p("0")]], "liouville", sample_box(), Params::new())
}

#[test]
fn catalog_charts_are_metric_compatible() {
    for sc in standard_scenarios() {
        let m = sc.manifold();
        for pt in sample_points(&sc.sampling) {
            let geo = m.geometry_at(pt, 3).unwrap();
            let (worst, scale) = geo.metricity();
            assert!(worst <= 1e-10 * scale.max(1.0), "{} at {pt:?}: {worst:e}", sc.name);
        }
    }
}

#[test]
fn liouville_canonical_killing_tensor() {
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        let (a, b) = ("x^2+2", "cos(y)+3");
        let m = liouville(sig, a, b);
        // g_xx = η(A+B), g_yy = A+B; e_xx = −g_xx B(y), e_yy = g_yy A(x)
        let g = format!("(({a})+({b}))");
        let mut kd = KillingData::zero();
        kd.e_form = TensorForm::CoordLower;
        kd.e = [
            [p(&format!("-{}*{g}*({b})", sig.eta())), p("0")],
            [p("0"), p(&format!("{g}*({a})"))],
        ];
        for pt in [(0.3, 0.5), (-0.7, 0.9), (0.1, 0.25)] {
            let geo = m.geometry_at(pt, 3).unwrap();
            let e = kd.at(&geo, 3).unwrap().e;
            let r = geo.killing_tensor_residual(&e);
            assert!(r.max_value() <= 1e-9 * e.max_value(), "{sig:?} {pt:?}: {:e}", r.max_value());
        }
        // swapping the roles of A and B breaks the Killing equation
        kd.e = [
            [p(&format!("-{}*{g}*({a})", sig.eta())), p("0")],
            [p("0"), p(&format!("{g}*({b})"))],
        ];
        let geo = m.geometry_at((0.3, 0.5), 3).unwrap();
        let e = kd.at(&geo, 3).unwrap().e;
        assert!(geo.killing_tensor_residual(&e).max_value() > 1e-3);
    }
}

#[test]
fn metric_is_a_killing_tensor_and_ignorable_coordinates_give_killing_vectors() {
    for sc in standard_scenarios().into_iter().take(6) {
        let m = sc.manifold();
        let pt = sample_points(&sc.sampling)[0];
        let geo = m.geometry_at(pt, 3).unwrap();
        let g = FrameTensor::matrix(std::array::from_fn(|a| {
            std::array::from_fn(|b| Jet::constant(Complex64::new(geo.sig.metric(a, b), 0.0), 3))
        }));
        assert!(geo.killing_tensor_residual(&g).max_value() < 1e-13, "{}", sc.name);
        let kv = sc.killing_vector.as_ref().expect("constant curvature scenarios carry ∂_x");
        let xi = kv.xi_at(&geo).unwrap();
        assert!(geo.killing_vector_residual(&xi).max_value() < 1e-12, "{}", sc.name);
    }
}

/// `e^{iα}` as a jet.
fn phase(alpha: &Jet) -> Jet {
    (*alpha * Complex64::new(0.0, 1.0)).exp()
}

#[test]
fn covariant_derivative_is_gauge_covariant() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let alpha_src = "0.3*x^2*y-0.7*x+0.4*y^3";
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        for q in [Complex64::new(1.0, 0.0), Complex64::new(-0.6, 0.0)] {
            let m = liouville(sig, "x^2+2", "cos(y)+3");
            let mut f = ExternalFields::free();
            f.q = q;
            f.a = [p("0.2*y"), p("sin(x)")];
            f.v = p("0.5*x");
            let mut g = f.clone();
            let alpha = p(alpha_src);
            g.a = [f.a[0].clone() + alpha.derivative(0) / Expr::constant(q), f.a[1].clone() + alpha.derivative(1) / Expr::constant(q)];
            let s1 = DiracSystem::new(m.clone(), f);
            let s2 = DiracSystem::new(m, g);
            for pt in [(0.3, 0.5), (-0.4, 0.8)] {
                let psi = PolySpinor::random(&mut rng, (0.0, 0.0), 3).jet(pt, EVAL_ORDER).unwrap();
                let ph = phase(&alpha.eval_jet(pt, &Params::new(), EVAL_ORDER).unwrap());
                let psi2 = [psi[0] * ph, psi[1] * ph];
                let d1 = s1.local(pt, EVAL_ORDER).unwrap().d1(&psi);
                let d2 = s2.local(pt, EVAL_ORDER).unwrap().d1(&psi2);
                let back = phase(&-alpha.eval_jet(pt, &Params::new(), EVAL_ORDER).unwrap());
                for a in 0..2 {
                    for k in 0..2 {
                        let lhs = d2.c[a][k] * back.truncate(d2.c[a][k].order());
                        let diff = (lhs - d1.c[a][k]).value().norm();
                        assert!(diff <= 1e-9 * d1.c[a][k].value().norm().max(1.0), "{sig:?} {pt:?}: {diff:e}");
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spin_connection_is_antisymmetric_and_metric_compatible(
        c0 in 1.5f64..3.0, c1 in -0.5f64..0.5, c2 in -0.3f64..0.3, d1 in -0.4f64..0.4,
        x in -1.0f64..1.0, y in 0.2f64..1.0, lorentzian in any::<bool>(),
    ) {
        let sig = if lorentzian { Signature::LORENTZIAN } else { Signature::RIEMANNIAN };
        let a = format!("{c0}+{c1}*x+{c2}*x^2");
        let b = format!("{d1}*y^2");
        let m = liouville(sig, &a, &b);
        let geo = m.geometry_at((x, y), 3).unwrap();
        let scale = geo.spin.iter().flatten().flatten().map(|j| j.value().norm()).fold(1.0, f64::max);
        for aa in 0..2 {
            for bb in 0..2 {
                for mu in 0..2 {
                    prop_assert!((geo.spin[aa][bb][mu] + geo.spin[bb][aa][mu]).value().norm() <= 1e-14 * scale);
                }
            }
        }
        let (worst, scale) = geo.metricity();
        prop_assert!(worst <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn round_sphere_curvature_scales_with_radius(r in 0.3f64..4.0, x in -1.0f64..1.0, y in 0.2f64..2.9) {
        let m = SpinManifold::new(
            Signature::RIEMANNIAN,
            [[p(&format!("1/({r}*sin(y))")), p("0")], [p("0"), p(&format!("1/{r}"))]],
            "sphere", SampleBox::new((-1.0, 1.0), (0.2, 2.9)), Params::new(),
        );
        let rs = m.geometry_at((x, y), 2).unwrap().scalar_curvature.value();
        prop_assert!((rs.re - 2.0 / (r * r)).abs() <= 1e-10 * (2.0 / (r * r)));
        prop_assert!(rs.im.abs() <= 1e-12);
    }

    #[test]
    fn orientation_flip_preserves_the_metric(x in -1.0f64..1.0, y in 0.2f64..1.0) {
        let a = liouville(Signature::new(-1, 1), "x^2+2", "y");
        let b = liouville(Signature::new(-1, -1), "x^2+2", "y");
        let (ga, gb) = (a.geometry_at((x, y), 2).unwrap(), b.geometry_at((x, y), 2).unwrap());
        for mu in 0..2 {
            for nu in 0..2 {
                prop_assert!((ga.metric[mu][nu] - gb.metric[mu][nu]).value().norm() < 1e-15);
            }
        }
        prop_assert!((ga.scalar_curvature - gb.scalar_curvature).value().norm() < 1e-12);
    }
}
