use dirac2d::clifford::Signature;
use dirac2d::expr::{parse, Expr, Params};
use dirac2d::fields::ExternalFields;
use dirac2d::geometry::{SampleBox, SpinManifold};
use dirac2d::operators::*;
use dirac2d::separation::*;
use num_complex::Complex64;
use rand::SeedableRng;

const POINTS: [(f64, f64); 3] = [(0.3, 0.5), (-0.4, 0.7), (0.8, 0.35)];

fn p(s: &str) -> Expr {
    parse(s, &[]).unwrap()
}

fn sample_box() -> SampleBox {
    SampleBox::new((-1.0, 1.0), (0.2, 1.0))
}

fn generic(kind: ChartKind, sig: Signature) -> SchemeD5 {
    SchemeD5::new(kind, sig, p("exp(y/2)+0.3*y"), [p("0.3+y^2"), p("cos(x)"), p("0.5*x+1"), p("sin(y)")], Params::new())
}

fn gauged(kind: ChartKind, sig: Signature) -> SchemeD5 {
    let beta = p("exp(y/2)+0.3*y");
    SchemeD5::from_potentials(kind, sig, beta.clone(), p("0.5+y^2") / beta.clone(), p("cos(x)+0.2") / beta, Params::new())
}

fn all_schemes() -> Vec<SchemeD5> {
    let mut out = Vec::new();
    for kind in [ChartKind::Liouville, ChartKind::Polar] {
        for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
            out.push(generic(kind, sig));
            out.push(gauged(kind, sig));
        }
    }
    out
}

fn sub(a: &Spinor, b: &Spinor) -> Spinor {
    [a[0] - b[0], a[1] - b[1]]
}

/// Largest relative value of `A ψ − B ψ` (or of `[A, B] ψ`) over random
/// polynomial spinors.
fn worst(a: &dyn SpinorOperator, b: &dyn SpinorOperator, sys: &DiracSystem, commutator: bool) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut w: f64 = 0.0;
    for &pt in &POINTS {
        let local = sys.local(pt, EVAL_ORDER).unwrap();
        let psi = PolySpinor::random(&mut rng, (0.0, 0.0), 3).jet(pt, EVAL_ORDER).unwrap();
        let r = if commutator {
            commutator_residual(a, b, &local, &psi).unwrap()
        } else {
            sub(&a.apply(&local, &psi).unwrap(), &b.apply(&local, &psi).unwrap())
        };
        w = w.max(value_norm(&r) / jet_norm(&psi));
    }
    w
}

#[test]
fn factorization_recovers_the_scheme_functions() {
    for s in all_schemes() {
        let sys = s.system("scheme", sample_box());
        for &pt in &POINTS {
            let got = factor_dirac(&sys, pt).unwrap();
            let want = s.at(pt, 2).unwrap();
            for ((name, a), (_, b)) in got.values().iter().zip(want.values().iter()) {
                assert!((a - b).norm() < 1e-12, "{:?} {name}: {a} vs {b}", s.kind);
            }
        }
    }
}

#[test]
fn scheme_operator_equals_rescaled_dirac() {
    for s in all_schemes() {
        let sys = s.system("scheme", sample_box());
        let red = ReducedDirac { r1: s.r1.clone(), params: Params::new() };
        let d5 = SchemeOperator { scheme: s.clone() };
        assert!(worst(&red, &d5, &sys, false) < 1e-12);
    }
}

#[test]
fn decoupling_operator_commutes_with_dirac() {
    for s in all_schemes() {
        let sys = s.system("scheme", sample_box());
        let k5 = DecouplingOperator { scheme: s.clone() };
        assert!(worst(&k5, &DiracOperator, &sys, true) < 1e-12);
    }
}

#[test]
fn expanded_decoupling_matches_factored_form() {
    for s in all_schemes() {
        let sys = s.system("scheme", sample_box());
        let k5 = DecouplingOperator { scheme: s.clone() };
        let ex = ExpandedDecoupling { beta: s.beta.clone(), params: Params::new() };
        assert!(worst(&k5, &ex, &sys, false) < 1e-12);
    }
}

#[test]
fn decoupling_operator_is_the_second_order_symmetry_operator() {
    for s in all_schemes() {
        let sys = s.system("scheme", sample_box());
        let k5 = DecouplingOperator { scheme: s.clone() };
        let sos = SecondOrderOp { source: KillingSource::Data(s.killing_data()), sign: VhatSign::Minus };
        assert!(worst(&sos, &k5, &sys, false) < 1e-12);
        assert!(worst(&sos, &DiracOperator, &sys, true) < 1e-12);
    }
}

#[test]
fn non_separable_potential_is_rejected() {
    let sig = Signature::RIEMANNIAN;
    let s = gauged(ChartKind::Liouville, sig);
    let mut f = s.potentials();
    f.v = p("(0.5+y^2+0.2*x)/(exp(y/2)+0.3*y)");
    let sys = DiracSystem::new(s.manifold("broken", sample_box()), f);
    match factor_dirac(&sys, (0.3, 0.5)) {
        Err(SeparationError::NotSeparable { entry, .. }) => assert!(entry == "C1" || entry == "C4", "{entry}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn non_diagonal_frame_is_rejected() {
    let sig = Signature::RIEMANNIAN;
    let m = SpinManifold::new(sig, [[p("1"), p("0")], [p("0"), p("1")]], "flat", sample_box(), Params::new());
    let sys = DiracSystem::new(m, ExternalFields::free());
    assert!(matches!(factor_dirac(&sys, (0.1, 0.4)), Err(SeparationError::NotSeparable { .. })));
}

fn eigen_residuals(s: &SchemeD5, psi: &ExprSpinor, mu: Complex64, nu: Complex64) -> (f64, f64) {
    let sys = s.system("closed", sample_box());
    dirac2d::separation::eigen_residuals(&sys, s, psi, mu, nu, &POINTS).unwrap()
}

fn free_scheme(sig: Signature) -> SchemeD5 {
    SchemeD5::from_potentials(ChartKind::Liouville, sig, p("exp(y/2)+0.3*y"), p("0"), p("0"), Params::new())
}

fn kepler_scheme(sig: Signature, h: f64) -> SchemeD5 {
    SchemeD5::from_potentials(ChartKind::Polar, sig, p("y"), p(&format!("{h}/y")), p("0"), Params::new())
}

#[test]
fn free_closed_form_is_a_joint_eigenspinor() {
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        let s = free_scheme(sig);
        for (mu, nu) in [(1.0, 0.5), (0.4, 2.0), (1.5, -0.7)] {
            let sol = FreeSolution::new(sig, mu, nu);
            let (a, b) = eigen_residuals(&s, &sol.spinor(), sol.mu, sol.nu);
            assert!(a < 1e-12 && b < 1e-12, "mu {mu} nu {nu}: {a:e} {b:e}");
            let (nu1, nu2) = sol.separation_constants();
            for &pt in &POINTS {
                let (fa, fb) = sol.factors(pt, 2);
                let r = separated_residuals(&s.at(pt, 2).unwrap(), &fa, &fb, sol.mu, nu1, nu2);
                assert!(r.iter().all(|z| z.norm() < 1e-12), "{r:?}");
            }
        }
    }
}

#[test]
fn free_closed_form_with_other_khat_fails_in_one_signature() {
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        let mut sol = FreeSolution::new(sig, 1.0, 0.5);
        sol.khat = if sig.k().im != 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        let (a, _) = eigen_residuals(&free_scheme(sig), &sol.spinor(), sol.mu, sol.nu);
        assert!(a > 1e-3);
    }
}

#[test]
fn kepler_closed_form_is_a_joint_eigenspinor() {
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        let s = kepler_scheme(sig, 1.2);
        for (mu, nu) in [(0.3, 2.0), (0.3, 1.0), (-0.5, 3.0)] {
            let sol = KeplerSolution::new(sig, 1.2, mu, nu);
            let (a, b) = eigen_residuals(&s, &sol.spinor(), sol.mu, sol.nu);
            assert!(a < 1e-12 && b < 1e-12, "mu {mu} nu {nu}: {a:e} {b:e}");
            let (nu1, nu2) = sol.separation_constants();
            for &pt in &POINTS {
                let (fa, fb) = sol.factors(pt, 2);
                let r = separated_residuals(&s.at(pt, 2).unwrap(), &fa, &fb, sol.mu, nu1, nu2);
                assert!(r.iter().all(|z| z.norm() < 1e-12), "{r:?}");
            }
        }
    }
}

#[test]
fn rk4_matches_closed_form_factors() {
    let sig = Signature::RIEMANNIAN;
    let s = kepler_scheme(sig, 1.2);
    let sol = KeplerSolution::new(sig, 1.2, 0.3, 2.0);
    let cases = [(Factor::A1, 0, 0.5, (-0.8, 0.8)), (Factor::A2, 1, 0.5, (-0.8, 0.8)), (Factor::B1, 0, 0.1, (0.3, 1.0)), (Factor::B2, 1, 0.1, (0.3, 1.0))];
    for (which, idx, fixed, (t0, t1)) in cases {
        let is_a = matches!(which, Factor::A1 | Factor::A2);
        let at = |t: f64| {
            let pt = if is_a { (t, fixed) } else { (fixed, t) };
            let (fa, fb) = sol.factors(pt, 1);
            let f = if is_a { fa[idx] } else { fb[idx] };
            (f.value(), f.d(if is_a { 0 } else { 1 }).value())
        };
        let (z0, dz0) = at(t0);
        let out = solve_decoupled_rk4(&s, which, sol.mu, sol.nu, fixed, (t0, t1), [z0, dz0], 8).unwrap();
        for (t, z) in out.t.iter().zip(&out.z) {
            let (want, _) = at(*t);
            assert!((z - want).norm() < 1e-8 * want.norm().max(1.0), "{which:?} t {t}: {z} vs {want}");
        }
    }
}

#[test]
fn completeness_determinant_is_nonzero_for_free_solutions() {
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        let mut sol = FreeSolution::new(sig, 1.1, 0.6);
        sol.c1 = Complex64::new(0.7, 0.2);
        sol.d1 = Complex64::new(0.4, -0.3);
        for &pt in &POINTS {
            let det = completeness_determinant(sol.log_derivatives(pt), sol.parameters(), 1e-5);
            assert!(det.norm() > 1e-6, "{det}");
        }
    }
}

#[test]
fn completeness_determinant_detects_dependent_parameters() {
    let det = completeness_determinant(
        |q: &[Complex64; 4]| [q[0] + q[1], q[0] + q[1], q[2], q[3] * q[2]],
        [Complex64::new(0.3, 0.0); 4],
        1e-5,
    );
    assert!(det.norm() < 1e-9);
}

#[test]
fn expanded_coefficients_match_factored_coefficients_in_the_free_gauge() {
    let mu = Complex64::new(0.7, 0.0);
    for kind in [ChartKind::Liouville, ChartKind::Polar] {
        for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
            let s = gauged(kind, sig);
            for which in [Factor::A1, Factor::A2, Factor::B1, Factor::B2] {
                for &(t, fixed) in &[(0.3, 0.5), (0.6, -0.2)] {
                    let a = s.decoupled_coefficients(which, mu, t, fixed).unwrap();
                    let b = s.expanded_coefficients(which, mu, t, fixed).unwrap();
                    for (x, y) in a.iter().zip(&b) {
                        assert!((x - y).norm() < 1e-12, "{kind:?} {which:?}: {a:?} vs {b:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn rk4_matches_the_nu_zero_family() {
    let mu = Complex64::new(0.4, 0.0);
    let nu = Complex64::new(0.0, 0.0);
    for kind in [ChartKind::Liouville, ChartKind::Polar] {
        for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
            let s = gauged(kind, sig);
            for which in [Factor::A1, Factor::A2, Factor::B1, Factor::B2] {
                let (fixed, t0, t1) = if matches!(which, Factor::A1 | Factor::A2) { (0.5, -0.8, 0.8) } else { (0.1, 0.3, 1.0) };
                let w0 = s.nu_zero_exponent(which, mu, t0, fixed).unwrap();
                let out = solve_decoupled_rk4(&s, which, mu, nu, fixed, (t0, t1), [Complex64::new(1.0, 0.0), w0], 8).unwrap();
                for (t, z) in out.t.iter().zip(&out.z) {
                    let [want, _] = s.nu_zero_solution(which, mu, fixed, (t0, *t), 400).unwrap();
                    assert!((z - want).norm() < 1e-7 * want.norm().max(1.0), "{kind:?} {which:?} t {t}: {z} vs {want}");
                }
            }
        }
    }
}

#[test]
fn nu_zero_exponents_in_the_liouville_gauge() {
    let sig = Signature::LORENTZIAN;
    let s = gauged(ChartKind::Liouville, sig);
    let mu = Complex64::new(0.4, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let eta = sig.eta();
    let (x, y): (f64, f64) = (0.3, 0.6);
    let bv = 0.5 + y * y;
    let bvh = x.cos() + 0.2;
    assert!((s.nu_zero_exponent(Factor::A1, mu, x, y).unwrap() - i * eta * bvh).norm() < 1e-14);
    assert!((s.nu_zero_exponent(Factor::A2, mu, x, y).unwrap() + i * eta * bvh).norm() < 1e-14);
    assert!((s.nu_zero_exponent(Factor::B1, mu, y, x).unwrap() + i * (bv + mu)).norm() < 1e-14);
    assert!((s.nu_zero_exponent(Factor::B2, mu, y, x).unwrap() - i * (bv + mu)).norm() < 1e-14);
}

#[test]
fn rk4_matches_free_closed_form_factors() {
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
        let s = free_scheme(sig);
        let sol = FreeSolution::new(sig, 1.0, 0.5);
        for (which, idx, is_a) in [(Factor::A1, 0, true), (Factor::A2, 1, true), (Factor::B1, 0, false), (Factor::B2, 1, false)] {
            let (fixed, t0, t1) = if is_a { (0.5, -0.8, 0.8) } else { (0.1, 0.3, 1.0) };
            let at = |t: f64| {
                let pt = if is_a { (t, fixed) } else { (fixed, t) };
                let (fa, fb) = sol.factors(pt, 1);
                let f = if is_a { fa[idx] } else { fb[idx] };
                (f.value(), f.d(if is_a { 0 } else { 1 }).value())
            };
            let (z0, dz0) = at(t0);
            let out = solve_decoupled_rk4(&s, which, sol.mu, sol.nu, fixed, (t0, t1), [z0, dz0], 8).unwrap();
            for (t, z) in out.t.iter().zip(&out.z) {
                let (want, _) = at(*t);
                assert!((z - want).norm() < 1e-7 * want.norm().max(1.0), "{which:?} t {t}: {z} vs {want}");
            }
        }
    }
}

#[test]
fn notes_flag_khat_branches_and_vanishing_mu() {
    let sol = FreeSolution::new(Signature::RIEMANNIAN, 0.0, -0.5);
    let notes = sol.notes();
    assert!(notes.iter().any(|n| n.starts_with("k̂")));
    assert!(notes.iter().any(|n| n.contains("sufficient only")));
    assert!(notes.iter().any(|n| n.contains("√ν")));
    let kep = KeplerSolution::new(Signature::RIEMANNIAN, 1.0, 1.0, 2.0);
    assert!(kep.notes().iter().any(|n| n.contains("oscillatory")));
}

#[test]
fn csv_grid_has_header_and_one_row_per_point() {
    let sol = FreeSolution::new(Signature::RIEMANNIAN, 1.0, 0.5);
    let csv = grid_csv(&sol.spinor(), &[0.0, 0.5], &[0.2, 0.4, 0.6]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y,re_psi1,im_psi1,re_psi2,im_psi2");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("0,0.2,"));
}
