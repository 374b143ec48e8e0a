//! Built-in scenarios: constant-curvature charts, separable Liouville and
//! polar charts with external fields, a classical first-integral scenario, the
//! Liouville-coordinate construction with a non-vanishing field strength, and
//! "broken" control clones.
//!
//! Constant curvature enters through
//!
//! ```text
//! S_κ(z) = sin(√κ z)/√κ,   C_κ(z) = cos(√κ z)      (κ > 0)
//! S_κ(z) = z,              C_κ(z) = 1              (κ = 0)
//! S_κ(z) = sinh(√|κ| z)/√|κ|, C_κ(z) = cosh(√|κ| z) (κ < 0)
//! ```
//!
//! with `T_κ = S_κ/C_κ` and `C_κ² + κS_κ² = 1`. The polar chart
//! `g = dy² + ηS_κ(y)² dx²` is the sphere, the Euclidean plane and the
//! hyperbolic plane for `κ = 1, 0, −1` when `η = 1`, and anti-de Sitter,
//! Minkowski and de Sitter space for `η = −1`.
//!
//! Symmetric scenarios carry Killing data that makes the second-order operator
//! commute with the Dirac operator; their broken clones add `0.1x` to `g′`,
//! which every commutator and determining-equation check must detect.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::clifford::Signature;
use crate::conditions::ClassicalJet;
use crate::expr::{parse, Expr, ExprError, Func, Params};
use crate::fields::ExternalFields;
use crate::geometry::{SampleBox, SpinManifold};
use crate::operators::{DiracSystem, FirstOrderOp, KillingData, TensorForm};
use crate::report::Tolerance;
use crate::separation::{ChartKind, FreeSolution, KeplerSolution, SchemeD5, SeparatedSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("T_κ has a pole at z = {z}: C_κ(z) = {c:e}")]
    Pole { z: f64, c: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Below this modulus `C_κ(z)` counts as a zero of `T_κ`'s denominator.
const POLE_THRESHOLD: f64 = 1e-12;

/// The functions `S_κ`, `C_κ`, `T_κ` for one value of `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaFns {
    pub kappa: f64,
}

/// `(S_κ(z), C_κ(z), T_κ(z))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaValues {
    pub s: f64,
    pub c: f64,
    pub t: f64,
}

impl KappaFns {
    pub fn new(kappa: f64) -> Self {
        KappaFns { kappa }
    }

    pub fn s_value(&self, z: f64) -> f64 {
        let r = self.kappa.abs().sqrt();
        if self.kappa > 0.0 {
            (r * z).sin() / r
        } else if self.kappa < 0.0 {
            (r * z).sinh() / r
        } else {
            z
        }
    }

    pub fn c_value(&self, z: f64) -> f64 {
        let r = self.kappa.abs().sqrt();
        if self.kappa > 0.0 {
            (r * z).cos()
        } else if self.kappa < 0.0 {
            (r * z).cosh()
        } else {
            1.0
        }
    }

    pub fn eval(&self, z: f64) -> Result<KappaValues, CatalogError> {
        let s = self.s_value(z);
        let c = self.c_value(z);
        if c.abs() <= POLE_THRESHOLD {
            return Err(CatalogError::Pole { z, c });
        }
        Ok(KappaValues { s, c, t: s / c })
    }

    /// `S_κ(arg)` as an expression.
    pub fn s_expr(&self, arg: Expr) -> Expr {
        let r = self.kappa.abs().sqrt();
        if self.kappa > 0.0 {
            Expr::call(Func::Sin, arg * c(r)) / Expr::real(r)
        } else if self.kappa < 0.0 {
            Expr::call(Func::Sinh, arg * c(r)) / Expr::real(r)
        } else {
            arg
        }
    }

    /// `C_κ(arg)` as an expression.
    pub fn c_expr(&self, arg: Expr) -> Expr {
        let r = self.kappa.abs().sqrt();
        if self.kappa > 0.0 {
            Expr::call(Func::Cos, arg * c(r))
        } else if self.kappa < 0.0 {
            Expr::call(Func::Cosh, arg * c(r))
        } else {
            Expr::real(1.0)
        }
    }

    /// `T_κ(arg)` as an expression.
    pub fn t_expr(&self, arg: Expr) -> Expr {
        self.s_expr(arg.clone()) / self.c_expr(arg)
    }
}

/// `(S_κ(z), C_κ(z), T_κ(z))`, failing at poles of `T_κ`.
pub fn kappa_eval(kappa: f64, z: f64) -> Result<KappaValues, CatalogError> {
    KappaFns::new(kappa).eval(z)
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn y() -> Expr {
    Expr::var(1)
}

fn x() -> Expr {
    Expr::var(0)
}

/// Verification suites a scenario can take part in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Clifford,
    Geometry,
    Conditions,
    Commutator,
    Classical,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Clifford, Suite::Geometry, Suite::Conditions, Suite::Commutator, Suite::Classical];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Clifford => "clifford",
            Suite::Geometry => "geometry",
            Suite::Conditions => "conditions",
            Suite::Commutator => "commutator",
            Suite::Classical => "classical",
        }
    }

    /// Whether the suite depends on the (possibly perturbed) symmetry data.
    pub fn tests_symmetry(&self) -> bool {
        matches!(self, Suite::Conditions | Suite::Commutator | Suite::Classical)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Outcome a scenario is expected to produce on its symmetry suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    /// Every check passes.
    Symmetric,
    /// Clifford and geometry checks pass; every symmetry suite exceeds the
    /// broken threshold somewhere.
    Broken,
    /// Residuals are reported without a verdict.
    Exploratory,
}

impl Expected {
    pub fn name(&self) -> &'static str {
        match self {
            Expected::Symmetric => "symmetric",
            Expected::Broken => "broken",
            Expected::Exploratory => "exploratory",
        }
    }
}

impl FromStr for Expected {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symmetric" => Ok(Expected::Symmetric),
            "broken" => Ok(Expected::Broken),
            "exploratory" => Ok(Expected::Exploratory),
            _ => Err(format!("unknown expectation `{s}`")),
        }
    }
}

/// How the spin frame was specified.
#[derive(Debug, Clone)]
pub enum Chart {
    /// `g = β²(dy² + η dx²)` with the separation frame.
    Liouville { beta: Expr },
    /// `g = dy² + ηβ² dx²` with the separation frame.
    Polar { beta: Expr },
    /// Explicit frame `e_a^μ`.
    Frame { frame: [[Expr; 2]; 2] },
}

impl Chart {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Chart::Liouville { .. } => "liouville",
            Chart::Polar { .. } => "polar",
            Chart::Frame { .. } => "frame",
        }
    }

    pub fn scheme_kind(&self) -> Option<(ChartKind, &Expr)> {
        match self {
            Chart::Liouville { beta } => Some((ChartKind::Liouville, beta)),
            Chart::Polar { beta } => Some((ChartKind::Polar, beta)),
            Chart::Frame { .. } => None,
        }
    }

    /// `e_a^μ` of the chart.
    pub fn frame(&self, sig: Signature) -> [[Expr; 2]; 2] {
        match self.scheme_kind() {
            Some((kind, beta)) => SchemeD5::new(kind, sig, beta.clone(), std::array::from_fn(|_| Expr::zero()), Params::new()).frame(),
            None => match self {
                Chart::Frame { frame } => frame.clone(),
                _ => unreachable!(),
            },
        }
    }
}

/// Classical quadratic first integral `K = ½k^{μν}π_μπ_ν + B^μπ_μ + W` of
/// `H = ½g^{μν}π_μπ_ν + U`, as coordinate expressions.
#[derive(Debug, Clone)]
pub struct ClassicalData {
    pub k: [[Expr; 2]; 2],
    pub b: [Expr; 2],
    pub w: Expr,
    pub u: Expr,
}

impl ClassicalData {
    pub fn at(&self, point: (f64, f64), params: &Params, order: usize) -> Result<ClassicalJet, ExprError> {
        let ev = |e: &Expr| e.eval_jet(point, params, order);
        Ok(ClassicalJet {
            k: [[ev(&self.k[0][0])?, ev(&self.k[0][1])?], [ev(&self.k[1][0])?, ev(&self.k[1][1])?]],
            b: [ev(&self.b[0])?, ev(&self.b[1])?],
            w: ev(&self.w)?,
            u: ev(&self.u)?,
        })
    }
}

/// Closed-form separated spinor shipped with a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSolution {
    /// Vanishing scalar and pseudoscalar potentials on a Liouville chart.
    Free,
    /// `β = y`, `V = h/y` on a polar chart.
    Kepler { h: f64 },
}

impl ReferenceSolution {
    pub fn instantiate(&self, sig: Signature, mu: f64, nu: f64) -> Box<dyn SeparatedSolution> {
        match *self {
            ReferenceSolution::Free => Box::new(FreeSolution::new(sig, mu, nu)),
            ReferenceSolution::Kepler { h } => Box::new(KeplerSolution::new(sig, h, mu, nu)),
        }
    }
}

/// Seeded sampling of points in a box, kept `margin` away from its edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub sample_box: SampleBox,
    pub margin: f64,
    pub seed: u64,
    pub count: usize,
}

impl Sampling {
    pub fn new(sample_box: SampleBox) -> Self {
        Sampling { sample_box, margin: 1e-2, seed: 1, count: 50 }
    }
}

/// A chart with fields, optional symmetry data and the expected verdict.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub sig: Signature,
    pub chart: Chart,
    pub fields: ExternalFields,
    /// Data of the second-order operator.
    pub killing_data: Option<KillingData>,
    /// A first-order symmetry operator.
    pub killing_vector: Option<FirstOrderOp>,
    /// Separation scheme the fields were built from.
    pub scheme: Option<SchemeD5>,
    pub classical: Option<ClassicalData>,
    pub solution: Option<ReferenceSolution>,
    pub expected: Expected,
    pub suites: Vec<Suite>,
    pub params: Params,
    pub sampling: Sampling,
    pub tol: Tolerance,
    pub notes: Vec<String>,
}

impl Scenario {
    pub fn manifold(&self) -> SpinManifold {
        SpinManifold::new(self.sig, self.chart.frame(self.sig), &self.name, self.sampling.sample_box, self.params.clone())
    }

    pub fn system(&self) -> DiracSystem {
        DiracSystem::new(self.manifold(), self.fields.clone())
    }

    /// Clone with `g′ → g′ + 0.1x` (and `W → W + 0.1xy` for classical data),
    /// expected to fail every symmetry suite.
    pub fn broken_clone(&self) -> Scenario {
        let mut out = self.clone();
        out.name = format!("{}-broken", self.name);
        out.expected = Expected::Broken;
        out.killing_vector = None;
        out.solution = None;
        if let Some(kd) = &mut out.killing_data {
            kd.gprime = kd.gprime.clone() + Expr::real(0.1) * x();
            out.notes.push("g′ perturbed by 0.1·x".into());
        }
        if let Some(cd) = &mut out.classical {
            cd.w = cd.w.clone() + Expr::real(0.1) * x() * y();
            out.notes.push("W perturbed by 0.1·x·y".into());
        }
        out
    }
}

fn with_params(mut fields: ExternalFields, params: &Params) -> ExternalFields {
    fields.params = params.clone();
    fields
}

/// Scenario built from a separation scheme with the gauge of
/// [`SchemeD5::from_potentials`]. The second-order operator is the one whose
/// action equals the decoupling operator; when `βV̂` is constant the
/// translation `∂_x` is declared as a first-order symmetry.
#[allow(clippy::too_many_arguments)]
pub fn scheme_scenario(
    name: &str,
    kind: ChartKind,
    sig: Signature,
    beta: Expr,
    v: Expr,
    vhat: Expr,
    params: Params,
    sample_box: SampleBox,
) -> Scenario {
    let scheme = SchemeD5::from_potentials(kind, sig, beta.clone(), v, vhat.clone(), params.clone());
    let translation = !(vhat * beta.clone()).depends_on(0);
    let mut kd = scheme.killing_data();
    kd.params = params.clone();
    let chart = match kind {
        ChartKind::Liouville => Chart::Liouville { beta },
        ChartKind::Polar => Chart::Polar { beta },
    };
    let killing_vector = translation.then(|| FirstOrderOp {
        xi: [Expr::real(1.0), Expr::zero()],
        xi_form: TensorForm::CoordUpper,
        omega: Expr::zero(),
        a: c(0.0),
        params: params.clone(),
    });
    let chart_note = match kind {
        ChartKind::Liouville => "Killing data: canonical Liouville Killing tensor e_xx = −ηβ⁴, α = 0, ζ = 0, g′ = ¼((C₂+C₃)² + (β′/β)²)",
        ChartKind::Polar => "Killing data: canonical polar Killing tensor e_xx = −ηβ⁴, α = 0, ζ = 0, g′ = ¼((C₂+C₃)² + β′²)",
    };
    let mut notes = vec![chart_note.to_string()];
    if killing_vector.is_some() {
        notes.push("first-order symmetry: ξ = ∂_x".into());
    }
    Scenario {
        name: name.to_string(),
        sig,
        chart,
        fields: with_params(scheme.potentials(), &params),
        killing_data: Some(kd),
        killing_vector,
        scheme: Some(scheme),
        classical: None,
        solution: None,
        expected: Expected::Symmetric,
        suites: vec![Suite::Clifford, Suite::Geometry, Suite::Conditions, Suite::Commutator],
        params,
        sampling: Sampling::new(sample_box),
        tol: Tolerance::default(),
        notes,
    }
}

fn params_of(list: &[(&str, f64)]) -> Params {
    list.iter().map(|(k, v)| (k.to_string(), c(*v))).collect()
}

fn p(s: &str, names: &[&str]) -> Expr {
    parse(s, names).expect("built-in expression parses")
}

/// Names and `(κ, η)` of the constant-curvature polar charts.
pub const CONSTANT_CURVATURE: [(&str, f64, i8); 6] = [
    ("e2", 0.0, 1),
    ("sphere", 1.0, 1),
    ("h2", -1.0, 1),
    ("ads2", 1.0, -1),
    ("minkowski", 0.0, -1),
    ("ds2", -1.0, -1),
];

/// Polar chart `β = S_κ(y)` with `V = (m + h y)/β`, `V̂ = v̂/β`.
pub fn constant_curvature_scenario(name: &str, kappa: f64, eta: i8) -> Scenario {
    let sig = Signature::new(eta, 1);
    let k = KappaFns::new(kappa);
    let beta = k.s_expr(y());
    let names = ["m", "h", "vh"];
    let params = params_of(&[("m", 0.5), ("h", 0.2), ("vh", 0.3)]);
    let v = p("m+h*y", &names) / beta.clone();
    let vhat = p("vh", &names) / beta.clone();
    let ymax = if kappa > 0.0 { 2.8 } else { 2.0 };
    let mut s = scheme_scenario(name, ChartKind::Polar, sig, beta, v, vhat, params, SampleBox::new((-1.0, 1.0), (0.3, ymax)));
    s.notes.insert(0, format!("polar chart β = S_κ(y), κ = {kappa}, η = {eta}"));
    s
}

/// Liouville chart `β = e^y` without scalar potentials; ships the free
/// closed-form solution.
pub fn liouville_free_scenario(name: &str, eta: i8) -> Scenario {
    let sig = Signature::new(eta, 1);
    let mut s = scheme_scenario(
        name,
        ChartKind::Liouville,
        sig,
        p("exp(y)", &[]),
        Expr::zero(),
        Expr::zero(),
        Params::new(),
        SampleBox::new((-1.0, 1.0), (-0.5, 1.0)),
    );
    s.solution = Some(ReferenceSolution::Free);
    s.notes.insert(0, format!("Liouville chart β = e^y, η = {eta}, V = V̂ = 0"));
    s
}

/// Liouville chart of the curved oscillator
/// `H = e^{−2y}(ηp_x² + p_y²)/(2(1+λe^{2y})) + ω²e^{2y}/(2(1+λe^{2y}))`:
/// `β² = e^{2y}(1+λe^{2y})` and `V` equal to the potential of `H`.
pub fn curved_oscillator_scenario(eta: i8) -> Scenario {
    let sig = Signature::new(eta, 1);
    let names = ["lambda", "omega"];
    let params = params_of(&[("lambda", 0.5), ("omega", 0.8)]);
    let beta = p("exp(y)*sqrt(1+lambda*exp(2*y))", &names);
    let v = p("omega^2*exp(2*y)/(2*(1+lambda*exp(2*y)))", &names);
    let name = if eta == 1 { "curved-oscillator" } else { "curved-oscillator-lorentzian" };
    let mut s = scheme_scenario(name, ChartKind::Liouville, sig, beta, v, Expr::zero(), params, SampleBox::new((-1.0, 1.0), (-0.5, 1.0)));
    s.notes.insert(0, "curved oscillator: β² = e^{2y}(1+λe^{2y}), V = ω²e^{2y}/(2(1+λe^{2y}))".into());
    s
}

/// Polar chart `β = y` with `V = h/y`; ships the Kepler closed-form solution.
pub fn kepler_scenario(eta: i8, h: f64) -> Scenario {
    let sig = Signature::new(eta, 1);
    let params = params_of(&[("h", h)]);
    let v = p("h/y", &["h"]);
    let name = if eta == 1 { "kepler" } else { "kepler-lorentzian" };
    let mut s = scheme_scenario(name, ChartKind::Polar, sig, p("y", &[]), v, Expr::zero(), params, SampleBox::new((-1.0, 1.0), (0.5, 3.0)));
    s.solution = Some(ReferenceSolution::Kepler { h });
    s.notes.insert(0, format!("Kepler–Coulomb: polar chart β = y, V = h/y with h = {h}"));
    s
}

/// Polar chart `β = S_κ(y)` with `V = α₁T_κ²(y) + α₂T_κ⁻¹(y)`: a curved Higgs
/// oscillator (`α₂ = 0`) or a curved Kepler–Coulomb system (`α₁ = 0`).
pub fn higgs_kepler_scenario(name: &str, kappa: f64, alpha1: f64, alpha2: f64) -> Scenario {
    let sig = Signature::RIEMANNIAN;
    let k = KappaFns::new(kappa);
    let params = params_of(&[("alpha1", alpha1), ("alpha2", alpha2)]);
    let t = k.t_expr(y());
    let v = Expr::param("alpha1") * t.clone().powf(2.0) + Expr::param("alpha2") / t;
    let ymax = if kappa > 0.0 { 1.3 } else { 2.0 };
    let mut s = scheme_scenario(name, ChartKind::Polar, sig, k.s_expr(y()), v, Expr::zero(), params, SampleBox::new((-1.0, 1.0), (0.3, ymax)));
    s.notes.insert(0, format!("V = α₁T_κ² + α₂T_κ⁻¹ on β = S_κ(y), κ = {kappa}"));
    s
}

/// Classical first integral on the Liouville chart `β = e^y`:
/// `U = (η sin x + y²)e^{−2y}`, `k^{xx} = −η`, `W = −η sin x`.
pub fn liouville_classical_scenario(eta: i8) -> Scenario {
    let sig = Signature::new(eta, 1);
    let e = eta as f64;
    let zero = Expr::zero();
    let classical = ClassicalData {
        k: [[Expr::real(-e), zero.clone()], [zero.clone(), zero.clone()]],
        b: [zero.clone(), zero],
        w: Expr::real(-e) * Expr::call(Func::Sin, x()),
        u: p(&format!("({e}*sin(x)+y^2)*exp(-2*y)"), &[]),
    };
    let name = if eta == 1 { "liouville-classical" } else { "liouville-classical-lorentzian" };
    Scenario {
        name: name.into(),
        sig,
        chart: Chart::Liouville { beta: p("exp(y)", &[]) },
        fields: ExternalFields::free(),
        killing_data: None,
        killing_vector: None,
        scheme: None,
        classical: Some(classical),
        solution: None,
        expected: Expected::Symmetric,
        suites: vec![Suite::Geometry, Suite::Classical],
        params: Params::new(),
        sampling: Sampling { count: 20, ..Sampling::new(SampleBox::new((-1.0, 1.0), (-0.5, 1.0))) },
        tol: Tolerance::default(),
        notes: vec!["H = ½g^{μν}p_μp_ν + U with U = (η sin x + y²)e^{−2y}; K = ½k^{μν}p_μp_ν + W".into()],
    }
}

/// Liouville-coordinate construction with `g_xx = ηB(y)`, `g_yy = B(y)`:
///
/// ```text
/// e_xx = −ηB²,  α = 0,  ζ^y = 0,  ζ^x = f₂ − ½c₁(B^{−½})′,
/// f₂ = −(1/(2η)) B^{5/2} B′ (2ηc₁ + √(ηB)),
/// V = v₁(y)/B with v₁ = 1,  V̂ = √(B⁹η⁵ − c₂)/√B,  g′ = c₃ − ⅛(B′/B)²,
/// qF_xy = iBR/(4√η)
/// ```
///
/// The formulas are used as printed; residuals are reported, not repaired.
/// The field strength is realized by `qA_y = x · qF_xy(y)`, `A_x = 0`.
pub fn liouville_integrated_scenario(b: Expr, c1: f64, c2: f64, c3: f64, eta: i8, sample_box: SampleBox) -> Result<Scenario, CatalogError> {
    let sig = Signature::new(eta, 1);
    let e = eta as f64;
    let sqrt_eta = c(e).sqrt();
    let params = params_of(&[("c1", c1), ("c2", c2), ("c3", c3)]);
    for step in 0..=20 {
        let yv = sample_box.y.0 + (sample_box.y.1 - sample_box.y.0) * step as f64 / 20.0;
        let bv = b.eval((0.0, yv), &params)?;
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(bv.re > 0.0) || bv.im.abs() > 1e-14 {
            return Err(CatalogError::Domain(format!("B must be positive on the sample box; B({yv}) = {bv}")));
        }
        let rad = bv.re.powi(9) * e - c2;
        if rad < 0.0 {
            return Err(CatalogError::Domain(format!("B⁹η⁵ − c₂ = {rad:e} < 0 at y = {yv}")));
        }
    }
    let db = b.derivative(1);
    let ddb = db.derivative(1);
    let half = Expr::real(0.5);
    let f2 = Expr::real(-1.0 / (2.0 * e))
        * b.clone().powf(2.5)
        * db.clone()
        * (Expr::param("c1") * c(2.0 * e) + Expr::call(Func::Sqrt, b.clone() * c(e)));
    let zeta_x = f2 - half.clone() * Expr::param("c1") * b.clone().powf(-0.5).derivative(1);
    let r = -((ddb.clone() * b.clone() - db.clone().powf(2.0)) / b.clone().powf(3.0));
    let qf = b.clone() * r * (Complex64::new(0.0, 0.25) / sqrt_eta);
    let vhat = Expr::call(Func::Sqrt, b.clone().powf(9.0) * c(e) - Expr::param("c2")) / Expr::call(Func::Sqrt, b.clone());
    let gprime = Expr::param("c3") - Expr::real(0.125) * (db.clone() / b.clone()).powf(2.0);
    let fields = ExternalFields {
        a: [Expr::zero(), x() * qf],
        q: c(1.0),
        v: Expr::real(1.0) / b.clone(),
        vhat,
        va: None,
        params: params.clone(),
    };
    let mut kd = KillingData::zero();
    kd.e_form = TensorForm::CoordLower;
    kd.e[0][0] = b.clone().powf(2.0) * c(-e);
    kd.vec_form = TensorForm::CoordUpper;
    kd.zeta = [zeta_x, Expr::zero()];
    kd.gprime = gprime;
    kd.params = params.clone();
    let literal_f = (ddb * b.clone() - db) / b.clone().powf(2.0) * (Complex64::new(0.0, 0.25) / sqrt_eta);
    Ok(Scenario {
        name: "liouville-integrated".into(),
        sig,
        chart: Chart::Liouville { beta: Expr::call(Func::Sqrt, b) },
        fields,
        killing_data: Some(kd),
        killing_vector: None,
        scheme: None,
        classical: None,
        solution: None,
        expected: Expected::Exploratory,
        suites: vec![Suite::Clifford, Suite::Geometry, Suite::Conditions, Suite::Commutator],
        params,
        sampling: Sampling::new(sample_box),
        tol: Tolerance::default(),
        notes: vec![
            "exploratory: coefficient formulas used as printed".into(),
            "qF_xy from the curvature form iBR/(4√η); A_x = 0, qA_y = x·qF_xy".into(),
            format!("alternative field-strength form i(B″B − B′)/(4√η B²) = {literal_f}"),
        ],
    })
}

/// Default parameters of the Liouville-coordinate construction.
pub fn default_liouville_integrated() -> Scenario {
    liouville_integrated_scenario(p("1+y^2", &[]), 0.3, 0.5, 0.2, 1, SampleBox::new((-1.0, 1.0), (0.2, 1.0))).expect("default branch is valid")
}

/// Every built-in scenario, symmetric ones followed by their broken clones.
pub fn standard_scenarios() -> Vec<Scenario> {
    let mut symmetric: Vec<Scenario> = CONSTANT_CURVATURE.iter().map(|&(n, k, e)| constant_curvature_scenario(n, k, e)).collect();
    symmetric.push(liouville_free_scenario("liouville-free", 1));
    symmetric.push(liouville_free_scenario("liouville-free-lorentzian", -1));
    symmetric.push(curved_oscillator_scenario(1));
    symmetric.push(curved_oscillator_scenario(-1));
    symmetric.push(kepler_scenario(1, 1.0));
    symmetric.push(kepler_scenario(-1, 1.0));
    symmetric.push(higgs_kepler_scenario("higgs-sphere", 1.0, 0.7, 0.0));
    symmetric.push(higgs_kepler_scenario("kepler-hyperbolic", -1.0, 0.0, 0.6));
    symmetric.push(liouville_classical_scenario(1));
    symmetric.push(liouville_classical_scenario(-1));
    let broken: Vec<Scenario> = symmetric.iter().map(Scenario::broken_clone).collect();
    let mut out = symmetric;
    out.extend(broken);
    out.push(default_liouville_integrated());
    out
}

/// Names of all built-in scenarios.
pub fn scenario_names() -> Vec<String> {
    standard_scenarios().into_iter().map(|s| s.name).collect()
}

/// Built-in scenario by name.
pub fn scenario(name: &str) -> Result<Scenario, CatalogError> {
    standard_scenarios().into_iter().find(|s| s.name == name).ok_or_else(|| CatalogError::Unknown(name.into()))
}
