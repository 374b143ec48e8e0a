//! Acceptance criteria for the toolkit. Each criterion prints one line
//! `criterion N [PASS|FAIL] title: detail`; the process exits non-zero when
//! any criterion fails.
//!
//! Independent oracles used here: a finite-difference Riemann tensor built
//! from the metric alone, the closed-form separated spinors, and the
//! numerical Poisson bracket of the classical Hamiltonian with the quadratic
//! first integral.

#![allow(clippy::needless_range_loop)]

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dirac2d::catalog::{kepler_scenario, scenario, standard_scenarios, Chart, Expected, Sampling, Scenario, Suite};
use dirac2d::clifford::Signature;
use dirac2d::conditions::{is_informational, spinor_commutator_identities, stackel_check, Residual};
use dirac2d::expr::parse;
use dirac2d::geometry::{SampleBox, SpinManifold};
use dirac2d::operators::{PolySpinor, SpinorField, EVAL_ORDER};
use dirac2d::separation::{
    completeness_determinant, eigen_residuals, factor_dirac, solve_decoupled_rk4, ChartKind, Factor, FreeSolution, KeplerSolution,
    SchemeD5, SeparatedSolution, SeparationError,
};
use dirac2d::verify::{sample_points, suite_residuals, Execution, VerifyOptions};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn ratio(r: &Residual) -> f64 {
    if r.residual == 0.0 {
        0.0
    } else {
        r.residual / r.scale.max(f64::MIN_POSITIVE)
    }
}

/// Residual divided by its bound `max(rel·scale, 1e-10)`, the absolute floor
/// being that of the default tolerance.
fn usage(r: &Residual, rel: f64) -> f64 {
    if r.residual.is_finite() {
        r.residual / (rel * r.scale).max(1e-10)
    } else {
        f64::INFINITY
    }
}

fn within(r: &Residual, rel: f64) -> bool {
    usage(r, rel) <= 1.0
}

fn symmetric_scenarios() -> Vec<Scenario> {
    standard_scenarios().into_iter().filter(|s| s.expected == Expected::Symmetric).collect()
}

fn options(spinors: usize) -> VerifyOptions {
    VerifyOptions { spinors_per_point: spinors, ..VerifyOptions::default() }
}

// 1. Clifford identities for the standard and 20 conjugated representations.
fn clifford() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut reps = 0;
    for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN, Signature::new(1, -1), Signature::new(-1, -1)] {
        let mut sc = scenario("e2").expect("catalog scenario");
        sc.sig = sig;
        let opts = VerifyOptions { random_reps: 20, ..VerifyOptions::default() };
        let rs = suite_residuals(&sc, Suite::Clifford, &opts).expect("clifford suite");
        reps += rs.len();
        for r in rs.iter().flatten() {
            worst = worst.max(r.residual);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-12 && secs < 1.0,
        format!("worst {worst:.2e} over {reps} representations (tol 1e-12), {secs:.3} s (limit 1 s)"),
    )
}

// 2. Finite-difference Riemann oracle.

fn frame_values(m: &SpinManifold, p: (f64, f64)) -> [[C; 2]; 2] {
    std::array::from_fn(|a| std::array::from_fn(|mu| m.frame[a][mu].eval(p, &m.params).expect("frame evaluates")))
}

fn inv2(m: [[C; 2]; 2]) -> [[C; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// `g_μν = Σ_a η_aa θ^a_μ θ^a_ν` with the coframe `θ` dual to the frame.
fn metric(m: &SpinManifold, p: (f64, f64)) -> [[C; 2]; 2] {
    let e = frame_values(m, p);
    // θ^a_μ e_b^μ = δ^a_b, so θ (as a matrix [a][μ]) is (E⁻¹)ᵀ
    let einv = inv2(e);
    let theta = |a: usize, mu: usize| einv[mu][a];
    std::array::from_fn(|mu| {
        std::array::from_fn(|nu| (0..2).map(|a| theta(a, mu) * theta(a, nu) * m.sig.metric(a, a)).sum())
    })
}

const FD_H: f64 = 1e-3;

/// Fourth-order central difference of `f` along `axis`.
fn fd<const N: usize>(f: &dyn Fn((f64, f64)) -> [C; N], p: (f64, f64), axis: usize) -> [C; N] {
    let at = |s: f64| if axis == 0 { f((p.0 + s, p.1)) } else { f((p.0, p.1 + s)) };
    let (p1, m1, p2, m2) = (at(FD_H), at(-FD_H), at(2.0 * FD_H), at(-2.0 * FD_H));
    std::array::from_fn(|i| (m2[i] - p2[i] + (p1[i] - m1[i]) * 8.0) / (12.0 * FD_H))
}

fn flat4(g: [[C; 2]; 2]) -> [C; 4] {
    [g[0][0], g[0][1], g[1][0], g[1][1]]
}

/// `Γ^λ_μν`, flattened as `4λ + 2μ + ν`.
fn christoffel(m: &SpinManifold, p: (f64, f64)) -> [C; 8] {
    let g = metric(m, p);
    let gi = inv2(g);
    let gfun = |q: (f64, f64)| flat4(metric(m, q));
    let dg = [fd(&gfun, p, 0), fd(&gfun, p, 1)];
    let d = |s: usize, mu: usize, nu: usize| dg[s][2 * mu + nu];
    std::array::from_fn(|idx| {
        let (l, mu, nu) = (idx / 4, (idx / 2) % 2, idx % 2);
        (0..2).map(|s| gi[l][s] * (d(mu, s, nu) + d(nu, s, mu) - d(s, mu, nu)) * 0.5).sum()
    })
}

/// Scalar curvature from `R^ρ_σμν = ∂_μΓ^ρ_νσ − ∂_νΓ^ρ_μσ + Γ^ρ_μλΓ^λ_νσ − Γ^ρ_νλΓ^λ_μσ`,
/// `R_σν = R^ρ_σρν` and `R = g^{σν} R_σν`.
fn fd_scalar_curvature(m: &SpinManifold, p: (f64, f64)) -> C {
    let gam = christoffel(m, p);
    let cfun = |q: (f64, f64)| christoffel(m, q);
    let dgam = [fd(&cfun, p, 0), fd(&cfun, p, 1)];
    let g = |r: usize, a: usize, b: usize| gam[4 * r + 2 * a + b];
    let dg = |mu: usize, r: usize, a: usize, b: usize| dgam[mu][4 * r + 2 * a + b];
    let riem = |r: usize, s: usize, mu: usize, nu: usize| {
        let mut v = dg(mu, r, nu, s) - dg(nu, r, mu, s);
        for l in 0..2 {
            v += g(r, mu, l) * g(l, nu, s) - g(r, nu, l) * g(l, mu, s);
        }
        v
    };
    let gi = inv2(metric(m, p));
    let mut r = c(0.0, 0.0);
    for s in 0..2 {
        for nu in 0..2 {
            let ric: C = (0..2).map(|rho| riem(rho, s, rho, nu)).sum();
            r += gi[s][nu] * ric;
        }
    }
    r
}

fn curvature_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut constants = Vec::new();
    for name in ["e2", "sphere", "h2", "minkowski", "ds2", "ads2"] {
        let mut sc = scenario(name).expect("catalog scenario");
        sc.sampling.count = 50;
        let m = sc.manifold();
        let mut values = Vec::new();
        for p in sample_points(&sc.sampling) {
            let rj = m.geometry_at(p, 2).expect("geometry").scalar_curvature.value();
            let rf = fd_scalar_curvature(&m, p);
            worst = worst.max((rj - rf).norm() / rf.norm().max(1.0));
            values.push(rj.re);
        }
        let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
        constants.push((name, values[0], spread));
    }
    let find = |n: &str| constants.iter().find(|c| c.0 == n).expect("present");
    let (s2, h2) = (find("sphere"), find("h2"));
    let opposite = s2.1 * h2.1 < 0.0 && s2.2 <= 1e-10 && h2.2 <= 1e-10;
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-6 && opposite && secs < 10.0,
        format!(
            "worst relative mismatch {worst:.2e} (tol 1e-6); R(S²) = {:.6} spread {:.1e}, R(H²) = {:.6} spread {:.1e}; {secs:.2} s",
            s2.1, s2.2, h2.1, h2.2
        ),
    )
}

// 3. Spinor commutator identities over the catalog.
fn commutator_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    let mut failures = 0;
    for sc in standard_scenarios() {
        let sys = sc.system();
        let mut sampling = sc.sampling;
        sampling.count = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in sample_points(&sampling) {
            let local = sys.local(p, EVAL_ORDER).expect("local data");
            for _ in 0..3 {
                let psi = PolySpinor::random(&mut rng, (0.0, 0.0), 3).jet(p, EVAL_ORDER).expect("spinor jet");
                for r in spinor_commutator_identities(&local, &psi) {
                    checks += 1;
                    failures += usize::from(!within(&r, 1e-7));
                    worst = worst.max(usage(&r, 1e-7));
                }
            }
        }
    }
    Outcome::new(failures == 0, format!("worst residual/bound {worst:.2e} over {checks} checks, {failures} above bound (rel 1e-7)"))
}

// 4. Determining and integrability lines, with perturbed controls.
fn determining() -> Outcome {
    let mut worst_ok: f64 = 0.0;
    let mut failures = 0;
    let mut weakest_broken = f64::INFINITY;
    let mut charts = Vec::new();
    for sc in symmetric_scenarios() {
        if sc.killing_data.is_none() || sc.scheme.is_none() {
            continue;
        }
        charts.push(format!("{}({})", sc.name, sc.chart.kind_name()));
        let lines = |s: &Scenario| -> Vec<Residual> {
            suite_residuals(s, Suite::Conditions, &options(1))
                .expect("conditions suite")
                .into_iter()
                .flatten()
                .filter(|r| (r.label.starts_with("determining.") || r.label.starts_with("integrability.")) && !is_informational(&r.label))
                .collect()
        };
        for r in lines(&sc) {
            failures += usize::from(!within(&r, 1e-7));
            worst_ok = worst_ok.max(usage(&r, 1e-7));
        }
        let broken = sc.broken_clone();
        let worst_broken = lines(&broken).iter().map(|r| r.residual).fold(0.0, f64::max);
        weakest_broken = weakest_broken.min(worst_broken);
    }
    Outcome::new(
        failures == 0 && weakest_broken > 1e-3,
        format!(
            "symmetric worst residual/bound {worst_ok:.2e}, {failures} above bound (rel 1e-7); smallest broken maximum {weakest_broken:.2e} (> 1e-3); {} scenarios",
            charts.len()
        ),
    )
}

// 5. Commutator certification.
fn commutator_certification() -> Outcome {
    let start = Instant::now();
    let opts = VerifyOptions { spinors_per_point: 30, execution: Execution::default(), ..VerifyOptions::default() };
    let (mut comm, mut dec, mut ident): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut failures = 0;
    let mut n = 0;
    for mut sc in symmetric_scenarios() {
        if sc.killing_data.is_none() && sc.killing_vector.is_none() {
            continue;
        }
        sc.sampling.count = 50;
        n += 1;
        for r in suite_residuals(&sc, Suite::Commutator, &opts).expect("commutator suite").iter().flatten() {
            let rel = r.residual / r.scale;
            let (slot, tol) = match r.label.as_str() {
                "identification.decoupling" => (&mut ident, 1e-8),
                "commutator.decoupling" => (&mut dec, 1e-7),
                _ => (&mut comm, 1e-7),
            };
            *slot = slot.max(rel);
            if rel > tol {
                failures += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        failures == 0 && secs < 60.0,
        format!(
            "{n} scenarios × 50 points × 30 spinors: [K,𝔻] {comm:.2e}, decoupling {dec:.2e} (tol 1e-7), identification {ident:.2e} (tol 1e-8); {secs:.1} s"
        ),
    )
}

// 6. Closed-form eigen-solutions on 20×20 grids.

fn grid(sc: &Scenario, n: usize) -> Vec<(f64, f64)> {
    let b = sc.sampling.sample_box.shrink(sc.sampling.margin);
    let lin = |r: (f64, f64)| (0..n).map(move |i| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64);
    lin(b.x).flat_map(|x| lin(b.y).map(move |y| (x, y))).collect()
}

fn grid_residuals(sc: &Scenario, sol: &dyn SeparatedSolution) -> (f64, f64) {
    let scheme = sc.scheme.as_ref().expect("scheme scenario");
    eigen_residuals(&sc.system(), scheme, &sol.spinor(), sol.mu(), sol.nu(), &grid(sc, 20)).expect("eigen residuals")
}

fn literal_constants() -> f64 {
    let i = c(0.0, 1.0);
    let mut worst: f64 = 0.0;
    let mut s = FreeSolution::new(Signature::RIEMANNIAN, 0.3, 2.0);
    s.c1 = c(0.7, 0.2);
    s.c2 = c(-0.4, 0.1);
    s.d1 = c(0.5, -0.3);
    s.d2 = c(1.1, 0.4);
    let d = s.dependent();
    let rt = s.nu.sqrt();
    let w = (s.mu * s.mu - s.nu).sqrt();
    worst = worst.max((d.c3 - i * s.c1 / rt).norm());
    worst = worst.max((d.c4 + i * s.c2 / rt).norm());
    worst = worst.max((d.d3 - (s.d1 * s.mu + i * s.d2 * w)).norm());
    worst = worst.max((d.d4 - (s.d2 * s.mu - i * s.d1 * w)).norm());
    let k = KeplerSolution::new(Signature::RIEMANNIAN, 1.0, 0.3, 2.0);
    let kw = (k.nu - (k.h + k.mu) * (k.h + k.mu)).sqrt();
    let (g1, g2) = k.couplings();
    worst = worst.max((g1 - (k.h + k.mu - i * kw) / k.nu.sqrt()).norm());
    worst = worst.max((g2 - (k.h + k.mu + i * kw) / k.nu.sqrt()).norm());
    worst
}

fn eigen_solutions() -> Outcome {
    let pairs = [(1.0, 0.5), (0.3, 2.0), (2.0, -1.0)];
    let (mut free, mut kep): (f64, f64) = (0.0, 0.0);
    for eta in [1, -1] {
        let sc = if eta == 1 { scenario("liouville-free") } else { scenario("liouville-free-lorentzian") }.expect("catalog");
        for &(mu, nu) in &pairs {
            let (a, b) = grid_residuals(&sc, &FreeSolution::new(sc.sig, mu, nu));
            free = free.max(a).max(b);
        }
        for h in [0.0, 1.0] {
            let sc = kepler_scenario(eta, h);
            assert_eq!((sc.sampling.sample_box.y.0, sc.sampling.sample_box.y.1), (0.5, 3.0));
            for &(mu, nu) in &pairs {
                let (a, b) = grid_residuals(&sc, &KeplerSolution::new(sc.sig, h, mu, nu));
                kep = kep.max(a).max(b);
            }
        }
    }
    let lit = literal_constants();
    Outcome::new(
        free <= 1e-8 && kep <= 1e-8 && lit <= 1e-15,
        format!("free-field closed form {free:.2e}, Coulomb closed form {kep:.2e} (tol 1e-8); dependent constants {lit:.1e}"),
    )
}

// 7. RK4 against closed forms, including ν = 0.
fn ode_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases: [(Factor, usize, bool); 4] = [(Factor::A1, 0, true), (Factor::A2, 1, true), (Factor::B1, 0, false), (Factor::B2, 1, false)];
    for eta in [1, -1] {
        let free = scenario(if eta == 1 { "liouville-free" } else { "liouville-free-lorentzian" }).expect("catalog");
        let kep = kepler_scenario(eta, 1.0);
        let sols: Vec<(Scenario, Box<dyn SeparatedSolution>)> = vec![
            (free.clone(), Box::new(FreeSolution::new(free.sig, 1.0, 0.5))),
            (kep.clone(), Box::new(KeplerSolution::new(kep.sig, 1.0, 0.3, 2.0))),
        ];
        for (sc, sol) in &sols {
            let scheme = sc.scheme.as_ref().expect("scheme");
            let b = sc.sampling.sample_box.shrink(sc.sampling.margin);
            for &(which, idx, is_a) in &cases {
                let (fixed, t0, t1) = if is_a { (0.5 * (b.y.0 + b.y.1), b.x.0, b.x.1) } else { (0.5 * (b.x.0 + b.x.1), b.y.0, b.y.1) };
                let at = |t: f64| {
                    let pt = if is_a { (t, fixed) } else { (fixed, t) };
                    let (fa, fb) = sol.factors(pt, 1);
                    let f = if is_a { fa[idx] } else { fb[idx] };
                    (f.value(), f.d(if is_a { 0 } else { 1 }).value())
                };
                let (z0, dz0) = at(t0);
                let out = solve_decoupled_rk4(scheme, which, sol.mu(), sol.nu(), fixed, (t0, t1), [z0, dz0], 8).expect("rk4");
                for (t, z) in out.t.iter().zip(&out.z) {
                    let (want, _) = at(*t);
                    worst = worst.max((z - want).norm() / want.norm().max(1.0));
                }
            }
        }
        for sc in [&free, &kep, &scenario(if eta == 1 { "curved-oscillator" } else { "curved-oscillator-lorentzian" }).expect("catalog")] {
            let scheme = sc.scheme.as_ref().expect("scheme");
            let b = sc.sampling.sample_box.shrink(sc.sampling.margin);
            let mu = c(0.4, 0.0);
            for &(which, _, is_a) in &cases {
                let (fixed, t0, t1) = if is_a { (0.5 * (b.y.0 + b.y.1), b.x.0, b.x.1) } else { (0.5 * (b.x.0 + b.x.1), b.y.0, b.y.1) };
                let w0 = scheme.nu_zero_exponent(which, mu, t0, fixed).expect("exponent");
                let out = solve_decoupled_rk4(scheme, which, mu, c(0.0, 0.0), fixed, (t0, t1), [c(1.0, 0.0), w0], 8).expect("rk4");
                for (t, z) in out.t.iter().zip(&out.z) {
                    let [want, _] = scheme.nu_zero_solution(which, mu, fixed, (t0, *t), 400).expect("quadrature");
                    worst = worst.max((z - want).norm() / want.norm().max(1.0));
                }
            }
        }
    }
    Outcome::new(worst <= 1e-7, format!("worst relative deviation {worst:.2e} (tol 1e-7), ν = 0 family included"))
}

// 8. Classical conditions against the numerical Poisson bracket.
fn classical_bridge() -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    let mut summary = Vec::new();
    for eta in [1, -1] {
        let base = scenario(if eta == 1 { "liouville-classical" } else { "liouville-classical-lorentzian" }).expect("catalog");
        for mut sc in [base.clone(), base.broken_clone()] {
            sc.sampling.count = 20;
            let (mut cmax, mut pmax): (f64, f64) = (0.0, 0.0);
            for point in suite_residuals(&sc, Suite::Classical, &options(1)).expect("classical suite") {
                let cond = point
                    .iter()
                    .filter(|r| r.label != "classical.poisson_bracket" && !is_informational(&r.label))
                    .map(ratio)
                    .fold(0.0, f64::max);
                let pb = point.iter().find(|r| r.label == "classical.poisson_bracket").map(ratio).expect("bracket");
                cmax = cmax.max(cond);
                pmax = pmax.max(pb);
                total += 1;
                if (cond <= 1e-8 && pb <= 1e-8) || (cond > 1e-3 && pb > 1e-3) {
                    agree += 1;
                }
            }
            summary.push(format!("{} {cmax:.1e}/{pmax:.1e}", sc.name));
        }
    }
    Outcome::new(agree == total, format!("{agree}/{total} phase points agree; worst conditions/bracket: {}", summary.join(", ")))
}

// 9. Separability propositions.
fn separability() -> Outcome {
    let ex = |src: &str| parse(src, &[]).expect("parses");
    let mut systems = Vec::new();
    for sc in symmetric_scenarios() {
        if let (Some(_), Some(kd)) = (&sc.scheme, &sc.killing_data) {
            systems.push((sc.name.clone(), sc.system(), kd.clone(), sc.sampling));
        }
    }
    // Generic scheme functions: every potential component, including qA_x, is nontrivial.
    for kind in [ChartKind::Liouville, ChartKind::Polar] {
        for sig in [Signature::RIEMANNIAN, Signature::LORENTZIAN] {
            let c = [ex("0.3+y^2"), ex("cos(x)"), ex("0.5*x+1"), ex("sin(y)")];
            let s = SchemeD5::new(kind, sig, ex("exp(y/2)+0.3*y"), c, Default::default());
            let b = SampleBox::new((-1.0, 1.0), (0.2, 1.0));
            systems.push((format!("generic-{kind:?}"), s.system("generic", b), s.killing_data(), Sampling::new(b)));
        }
    }
    let (mut fmax, mut smax): (f64, f64) = (0.0, 0.0);
    let mut stackel_failures = 0;
    for (_, sys, kd, sampling) in &systems {
        let mut sampling = *sampling;
        sampling.count = 20;
        for p in sample_points(&sampling) {
            let local = sys.local(p, EVAL_ORDER).expect("local data");
            let f = &local.fields;
            let fscale = f.qa[1].d(0).value().norm().max(f.qa[0].d(1).value().norm()).max(1.0);
            fmax = fmax.max(f.qf_xy.value().norm() / fscale);
            let e = kd.at(&local.geo, EVAL_ORDER).expect("killing data").e;
            for pot in [f.v, f.vhat] {
                let r = stackel_check(&local.geo, &e, &(pot * pot));
                stackel_failures += usize::from(!within(&r, 1e-7));
                smax = smax.max(usage(&r, 1e-7));
            }
        }
    }

    // Control: a potential mixing x and y in βV is neither a Stäckel
    // multiplier nor separable in the scheme.
    let mut sc = scenario("liouville-free").expect("catalog");
    let beta = match &sc.chart {
        Chart::Liouville { beta } => beta.clone(),
        _ => unreachable!("liouville-free uses a Liouville chart"),
    };
    sc.fields.v = ex("0.4*x*y") / beta;
    let p = (0.2, 0.4);
    let rejected = matches!(factor_dirac(&sc.system(), p), Err(SeparationError::NotSeparable { .. }));
    let local = sc.system().local(p, EVAL_ORDER).expect("local data");
    let e = sc.killing_data.as_ref().expect("killing data").at(&local.geo, EVAL_ORDER).expect("killing data").e;
    let control = usage(&stackel_check(&local.geo, &e, &(local.fields.v * local.fields.v)), 1e-7);
    Outcome::new(
        fmax <= 1e-9 && stackel_failures == 0 && rejected && control > 1.0,
        format!(
            "{} schemes: F {fmax:.2e} (tol 1e-9), d(e dV²), d(e dV̂²) residual/bound {smax:.2e} (rel 1e-7); \
             non-Stäckel V: NotSeparable {rejected}, Stäckel residual/bound {control:.1e}",
            systems.len()
        ),
    )
}

// 10. Completeness determinant.
fn completeness() -> Outcome {
    let point = (0.2, 0.4);
    let build = |mu: f64, nu: f64| {
        let mut s = FreeSolution::new(Signature::RIEMANNIAN, mu, nu);
        s.c1 = c(0.7, 0.2);
        s.d1 = c(0.4, -0.3);
        s
    };
    let generic: f64 = [(1.0, 0.5), (0.3, 2.0), (2.0, -1.0)]
        .iter()
        .map(|&(m, n)| {
            let s = build(m, n);
            completeness_determinant(s.log_derivatives(point), s.parameters(), 1e-5).norm()
        })
        .fold(f64::INFINITY, f64::min);
    let mu: f64 = 1.2;
    let seq: Vec<f64> = (1..=6)
        .map(|k| {
            let gap = 10f64.powi(-k);
            let s = build(mu, mu * mu - gap);
            completeness_determinant(s.log_derivatives(point), s.parameters(), 1e-7).norm()
        })
        .collect();
    let tail = &seq[seq.len() - 4..];
    let monotone = tail.windows(2).all(|w| w[1] < w[0]);
    let vanishing = seq[seq.len() - 1] < 1e-2 * seq[0];
    let shown: Vec<String> = seq.iter().map(|d| format!("{d:.1e}")).collect();
    Outcome::new(
        generic > 1e-6 && monotone && vanishing,
        format!("generic min |det| {generic:.2e} (> 1e-6); μ² − ν = 1e-1..1e-6: {}", shown.join(", ")),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("clifford identities", clifford),
        ("curvature oracle", curvature_oracle),
        ("spinor commutator identities", commutator_identities),
        ("determining and integrability lines", determining),
        ("commutator certification", commutator_certification),
        ("closed-form eigen-solutions", eigen_solutions),
        ("ODE oracle", ode_oracle),
        ("classical bridge", classical_bridge),
        ("separability conditions", separability),
        ("completeness determinant", completeness),
    ];
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (idx, (title, run)) in criteria.iter().enumerate() {
        let id = idx + 1;
        if !args.is_empty() && !args.iter().any(|a| a == &id.to_string() || title.contains(a.as_str())) {
            continue;
        }
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id} [{}] {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
