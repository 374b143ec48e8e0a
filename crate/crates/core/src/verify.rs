//! Seeded sample sweeps and the verification suites run over scenarios.
//!
//! Sample point `i` and every random object drawn at it (test spinors, phase
//! space momenta) come from a ChaCha stream keyed by `(seed, i)`. Per-point
//! results are folded into the report in index order, so a report does not
//! depend on the execution mode or on thread scheduling.
//!
//! Verdicts follow the scenario's expectation: a symmetric scenario must pass
//! every record; a broken one must pass its clifford and geometry suites and
//! exceed the broken threshold somewhere in each symmetry suite; exploratory
//! scenarios only report.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Expected, Sampling, Scenario, Suite};
use crate::clifford::{commutator_identity_check, CliffordError, DiracRep, Mat2};
use crate::conditions::{
    all_conditions, check_classical, check_first_order, killing_identity_suite, poisson_bracket, spinor_commutator_identities, Residual,
};
use crate::expr::ExprError;
use crate::operators::{
    commutator_residual, jet_norm, value_norm, DiracOperator, KillingSource, Local, OperatorError, PolySpinor, SecondOrderOp, Spinor,
    SpinorField, SpinorOperator, VhatSign, EVAL_ORDER,
};
use crate::report::Report;
use crate::separation::DecouplingOperator;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error("scenario `{scenario}` has no data for the {suite} suite")]
    NoData { scenario: String, suite: Suite },
}

/// How independent sample points are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over points; sequential when the `parallel` feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `f(0), …, f(n−1)` in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// The random stream of sample point `index`.
pub fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Uniform point in the sampling box shrunk by the margin.
pub fn sample_point<R: Rng>(sampling: &Sampling, rng: &mut R) -> (f64, f64) {
    let b = sampling.sample_box.shrink(sampling.margin);
    (rng.gen_range(b.x.0..=b.x.1), rng.gen_range(b.y.0..=b.y.1))
}

/// The first point of every stream `0..count`.
pub fn sample_points(sampling: &Sampling) -> Vec<(f64, f64)> {
    (0..sampling.count).map(|i| sample_point(sampling, &mut point_rng(sampling.seed, i))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub execution: Execution,
    /// Random cubic test spinors per point in the commutator and geometry suites.
    pub spinors_per_point: usize,
    /// Residual a broken scenario must exceed somewhere in each symmetry suite.
    pub broken_threshold: f64,
    /// Random conjugated representations in the clifford suite.
    pub random_reps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { execution: Execution::default(), spinors_per_point: 1, broken_threshold: 1e-3, random_reps: 20 }
    }
}

/// Whether the scenario carries the data a suite needs.
pub fn suite_applicable(scenario: &Scenario, suite: Suite) -> bool {
    match suite {
        Suite::Clifford | Suite::Geometry => true,
        Suite::Conditions | Suite::Commutator => scenario.killing_data.is_some() || scenario.killing_vector.is_some(),
        Suite::Classical => scenario.classical.is_some(),
    }
}

/// Random well-conditioned change of spinor basis `P = 2I + U`, `|U_ij| ≤ √2`.
pub fn random_basis_change<R: Rng>(rng: &mut R) -> Mat2 {
    let mut p = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in p.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if r == c {
                *slot += 2.0;
            }
        }
    }
    p
}

fn identity_residuals(prefix: &str, rep: &DiracRep) -> Vec<Residual> {
    let r = commutator_identity_check(rep);
    [
        ("clifford_relation", r.clifford_relation),
        ("pseudoscalar_definition", r.pseudoscalar_definition),
        ("pseudoscalar_square", r.pseudoscalar_square),
        ("vector_pseudoscalar", r.vector_pseudoscalar),
        ("vector_product", r.vector_product),
        ("bivector_vector_commutator", r.bivector_vector_commutator),
        ("bivector_commutator", r.bivector_commutator),
    ]
    .into_iter()
    .map(|(name, v)| Residual { label: format!("{prefix}.{name}"), residual: v, scale: 1.0 })
    .collect()
}

fn clifford_suite(scenario: &Scenario, opts: &VerifyOptions) -> Result<Vec<Vec<Residual>>, VerifyError> {
    let rep = DiracRep::dirac(scenario.sig);
    let mut out = vec![identity_residuals("clifford.dirac", &rep)];
    let mut rng = point_rng(scenario.sampling.seed, usize::MAX);
    for _ in 0..opts.random_reps {
        let p = random_basis_change(&mut rng);
        out.push(identity_residuals("clifford.conjugated", &rep.conjugate(&p)?));
    }
    Ok(out)
}

fn relative(label: &str, r: &Spinor, psi: &Spinor) -> Residual {
    Residual { label: label.into(), residual: value_norm(r), scale: jet_norm(psi) }
}

fn geometry_point(scenario: &Scenario, local: &Local, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Residual>, VerifyError> {
    let geo = &local.geo;
    let mut out = Vec::new();
    let (m, s) = geo.metricity();
    out.push(Residual { label: "geometry.metricity".into(), residual: m, scale: s });
    let mut anti = 0.0f64;
    let mut spin_scale = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            for mu in 0..2 {
                anti = anti.max((geo.spin[a][b][mu] + geo.spin[b][a][mu]).value().norm());
                spin_scale = spin_scale.max(geo.spin[a][b][mu].value().norm());
            }
        }
    }
    out.push(Residual { label: "geometry.spin_antisymmetry".into(), residual: anti, scale: spin_scale });
    if let Some(kd) = &scenario.killing_data {
        let kj = kd.at(geo, EVAL_ORDER)?;
        let r = geo.killing_tensor_residual(&kj.e);
        out.push(Residual { label: "geometry.killing_tensor".into(), residual: r.max_value(), scale: kj.e.max_value() });
    }
    if let Some(kv) = &scenario.killing_vector {
        let xi = kv.xi_at(geo)?;
        let r = geo.killing_vector_residual(&xi);
        out.push(Residual { label: "geometry.killing_vector".into(), residual: r.max_value(), scale: xi.max_value() });
    }
    for _ in 0..opts.spinors_per_point {
        let psi = PolySpinor::random(rng, (0.0, 0.0), 3).jet(geo.point, EVAL_ORDER)?;
        out.extend(spinor_commutator_identities(local, &psi));
    }
    Ok(out)
}

fn conditions_point(scenario: &Scenario, local: &Local) -> Result<Vec<Residual>, VerifyError> {
    let mut out = Vec::new();
    if let Some(kd) = &scenario.killing_data {
        let kj = kd.at(&local.geo, EVAL_ORDER)?;
        out.extend(all_conditions(local, &kj));
        out.extend(killing_identity_suite(&local.geo, &kj.zeta, &kj.e));
    }
    if let Some(kv) = &scenario.killing_vector {
        let xi = kv.xi_at(&local.geo)?;
        let omega = kv.omega.eval_jet(local.geo.point, &kv.params, EVAL_ORDER)?;
        out.extend(check_first_order(local, &xi, &omega));
    }
    Ok(out)
}

fn commutator_point(scenario: &Scenario, local: &Local, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Residual>, VerifyError> {
    let second = scenario
        .killing_data
        .clone()
        .map(|kd| SecondOrderOp { source: KillingSource::Data(kd), sign: VhatSign::Minus });
    let decoupling = scenario.scheme.clone().map(|scheme| DecouplingOperator { scheme });
    let mut out = Vec::new();
    for _ in 0..opts.spinors_per_point {
        let psi = PolySpinor::random(rng, (0.0, 0.0), 3).jet(local.geo.point, EVAL_ORDER)?;
        if let Some(k) = &second {
            out.push(relative("commutator.second_order", &commutator_residual(k, &DiracOperator, local, &psi)?, &psi));
        }
        if let Some(k1) = &scenario.killing_vector {
            out.push(relative("commutator.first_order", &commutator_residual(k1, &DiracOperator, local, &psi)?, &psi));
        }
        if let Some(k5) = &decoupling {
            out.push(relative("commutator.decoupling", &commutator_residual(k5, &DiracOperator, local, &psi)?, &psi));
            if let Some(k) = &second {
                let a = k.apply(local, &psi)?;
                let b = k5.apply(local, &psi)?;
                let o = a[0].order().min(b[0].order());
                let diff = [a[0].truncate(o) - b[0].truncate(o), a[1].truncate(o) - b[1].truncate(o)];
                out.push(relative("identification.decoupling", &diff, &psi));
            }
        }
    }
    Ok(out)
}

fn classical_point(scenario: &Scenario, local: &Local, rng: &mut ChaCha8Rng) -> Result<Vec<Residual>, VerifyError> {
    let Some(cd) = &scenario.classical else { return Ok(Vec::new()) };
    let cj = cd.at(local.geo.point, &scenario.params, EVAL_ORDER)?;
    let mut out = check_classical(local, &cj);
    let p = [Complex64::new(rng.gen_range(-1.0..1.0), 0.0), Complex64::new(rng.gen_range(-1.0..1.0), 0.0)];
    let pb = poisson_bracket(local, &cj, p);
    out.push(Residual { label: "classical.poisson_bracket".into(), residual: pb.sum.value().norm(), scale: pb.scale });
    Ok(out)
}

/// Residuals of one suite at every sample point, in point order.
pub fn suite_residuals(scenario: &Scenario, suite: Suite, opts: &VerifyOptions) -> Result<Vec<Vec<Residual>>, VerifyError> {
    if !suite_applicable(scenario, suite) {
        return Err(VerifyError::NoData { scenario: scenario.name.clone(), suite });
    }
    if suite == Suite::Clifford {
        return clifford_suite(scenario, opts);
    }
    let sys = scenario.system();
    let sampling = scenario.sampling;
    let results = map_indexed(sampling.count, opts.execution, |i| -> Result<Vec<Residual>, VerifyError> {
        let mut rng = point_rng(sampling.seed, i);
        let point = sample_point(&sampling, &mut rng);
        let local = sys.local(point, EVAL_ORDER)?;
        match suite {
            Suite::Geometry => geometry_point(scenario, &local, &mut rng, opts),
            Suite::Conditions => conditions_point(scenario, &local),
            Suite::Commutator => commutator_point(scenario, &local, &mut rng, opts),
            Suite::Classical => classical_point(scenario, &local, &mut rng),
            Suite::Clifford => unreachable!(),
        }
    });
    results.into_iter().collect()
}

/// Aggregated report of one suite.
pub fn run_suite(scenario: &Scenario, suite: Suite, opts: &VerifyOptions) -> Result<Report, VerifyError> {
    let mut report = Report::new();
    for point in suite_residuals(scenario, suite, opts)? {
        report.extend(&point, &scenario.tol);
    }
    Ok(report)
}

/// Worst non-informational residual of a report.
pub fn worst_residual(report: &Report) -> f64 {
    report.records.values().filter(|r| !r.informational).map(|r| r.max_residual).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    /// Whether the suite behaved as the scenario expects.
    pub as_expected: bool,
    pub all_pass: bool,
    pub worst_residual: f64,
    pub report: Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub scenario: String,
    pub expected: String,
    pub notes: Vec<String>,
    pub suites: Vec<SuiteOutcome>,
}

impl Verification {
    /// Whether every suite behaved as expected.
    pub fn pass(&self) -> bool {
        self.suites.iter().all(|s| s.as_expected)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verification serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("scenario {} (expected {})\n", self.scenario, self.expected);
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        for o in &self.suites {
            let verdict = if o.as_expected { "as expected" } else { "NOT as expected" };
            s.push_str(&format!("[{}] worst residual {:.3e}: {verdict}\n", o.suite, o.worst_residual));
            for line in o.report.to_text().lines() {
                s.push_str(&format!("  {line}\n"));
            }
        }
        s.push_str(if self.pass() { "verdict: pass\n" } else { "verdict: FAIL\n" });
        s
    }
}

/// Runs the suites and judges each against the scenario's expectation.
pub fn verify(scenario: &Scenario, suites: &[Suite], opts: &VerifyOptions) -> Result<Verification, VerifyError> {
    let mut outcomes = Vec::new();
    for &suite in suites {
        let report = run_suite(scenario, suite, opts)?;
        let all_pass = report.all_pass();
        let worst = worst_residual(&report);
        let as_expected = match scenario.expected {
            Expected::Symmetric => all_pass,
            Expected::Broken if suite.tests_symmetry() => worst > opts.broken_threshold,
            Expected::Broken => all_pass,
            Expected::Exploratory => true,
        };
        outcomes.push(SuiteOutcome { suite: suite.name().into(), as_expected, all_pass, worst_residual: worst, report });
    }
    let mut notes = scenario.notes.clone();
    notes.push(format!(
        "conventions: η = {}, ε_01 = {}, R = 2R^{{01}}_{{01}}, V̂ sign in the γ^a part of 𝔾: minus",
        scenario.sig.eta, scenario.sig.orientation
    ));
    Ok(Verification { scenario: scenario.name.clone(), expected: scenario.expected.name().into(), notes, suites: outcomes })
}

/// Every suite the scenario carries data for.
pub fn applicable_suites(scenario: &Scenario) -> Vec<Suite> {
    Suite::ALL.into_iter().filter(|&s| suite_applicable(scenario, s)).collect()
}
