//! The Dirac operator and its symmetry operators.
//!
//! With `D_a = e_a^μ D_μ` the frame covariant derivative, the Dirac operator is
//! `𝔻ψ = i γ^a D_a ψ − (V + V̂ γ) ψ`. A second-order operator
//! `𝕂 = 𝔼^{ab} D_ab + 𝔽^a D_a + 𝔾` (with `D_ab` the symmetrized second
//! derivative) is determined by Killing data `(e^{ab}, α^a, ζ^a, α, g′)`:
//!
//! ```text
//! 𝔼^{ab} = e^{ab} I + 2 α^{(a} γ^{b)}
//! 𝔽^a    = (ζ^a + ∇_b e^{ab}) I + (α δ^a_c + ∇_c α^a) γ^c + (⅓ ε_cb ∇^c e^{ab} + 2i α^a V̂) γ
//! 𝔾      = (g′ + 3i α^a ∇_a V + i α V) I
//!        + (iqF ε_ab α^b + i e_a^b ∇_b V − ¼ R α_a ∓ iη e^{cb} ∇_b V̂ ε_ac) γ^a
//!        + (¼(∇^c ζ^a − 2iqF ε^c_b e^{ab} − 2i α^a ∇^c V) ε_ca + i α^a ∇_a V̂ + i α V̂) γ
//! ```
//!
//! The sign of the `V̂` term in the `γ^a` part of `𝔾` is selectable through
//! [`VhatSign`]; the commutator residual decides which one is a symmetry.
//!
//! All operators act on spinor jets, so compositions such as `𝕂𝔻` are
//! evaluated by plain chaining: each application consumes derivative orders.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{mat_mul, CliffordElement, DiracRep, Mat2, Signature};
use crate::conditions::{is_informational, Residual};
use crate::expr::{Expr, ExprError, Params};
use crate::fields::{ExternalFields, FieldJet, FieldsError};
use crate::geometry::{FrameTensor, GeometryError, GeometryJet, SpinManifold, SpinorTensor};
use crate::jet::Jet;
use crate::report::Tolerance;

/// Jet order used for pointwise operator evaluation.
pub const EVAL_ORDER: usize = 5;

pub type Spinor = [Jet; 2];
type Ce = CliffordElement<Jet>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fields(#[from] FieldsError),
    #[error("condition `{label}` violated: residual {residual:e}")]
    ConditionViolation { label: String, residual: f64 },
    #[error("jet order exhausted: {0}")]
    OrderExhausted(String),
}

impl From<ExprError> for OperatorError {
    fn from(e: ExprError) -> Self {
        OperatorError::Geometry(GeometryError::Expr(e))
    }
}

/// A chart, its external fields and a choice of Dirac matrices.
#[derive(Debug, Clone)]
pub struct DiracSystem {
    pub manifold: SpinManifold,
    pub fields: ExternalFields,
    pub rep: DiracRep,
}

impl DiracSystem {
    pub fn new(manifold: SpinManifold, fields: ExternalFields) -> Self {
        let rep = DiracRep::dirac(manifold.sig);
        DiracSystem { manifold, fields, rep }
    }

    pub fn sig(&self) -> Signature {
        self.manifold.sig
    }

    /// Geometry and field jets about `point`.
    pub fn local(&self, point: (f64, f64), order: usize) -> Result<Local, OperatorError> {
        let geo = self.manifold.geometry_at(point, order)?;
        let fields = self.fields.at(&geo, order)?;
        Ok(Local { geo, fields, rep: self.rep })
    }

    /// The same system in the spinor basis `ψ' = P ψ`.
    pub fn change_representation(&self, p: &Mat2) -> Result<DiracSystem, crate::clifford::CliffordError> {
        Ok(DiracSystem { rep: self.rep.conjugate(p)?, ..self.clone() })
    }
}

/// Everything an operator needs at one point.
#[derive(Debug, Clone)]
pub struct Local {
    pub geo: GeometryJet,
    pub fields: FieldJet,
    pub rep: DiracRep,
}

impl Local {
    pub fn sig(&self) -> Signature {
        self.geo.sig
    }

    /// Gauge covariant derivative of a spinor-valued frame tensor.
    pub fn cov(&self, t: &SpinorTensor) -> SpinorTensor {
        self.geo.spinor_cov(&self.rep, t, &self.fields.qa)
    }

    /// `D_a ψ`.
    pub fn d1(&self, psi: &Spinor) -> SpinorTensor {
        self.cov(&SpinorTensor::spinor(*psi))
    }

    /// Symmetrized `D_ab ψ` from `D_a D_b ψ`.
    pub fn d2_sym(&self, d1: &SpinorTensor) -> [[Spinor; 2]; 2] {
        let d2 = self.cov(d1);
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let x = d2.get(&[a, b]);
                let y = d2.get(&[b, a]);
                [(x[0] + y[0]) * 0.5, (x[1] + y[1]) * 0.5]
            })
        })
    }

    /// `M ψ` for a constant matrix.
    pub fn mat_apply(m: &Mat2, psi: &Spinor) -> Spinor {
        std::array::from_fn(|r| psi[0] * m[r][0] + psi[1] * m[r][1])
    }

    pub fn clifford_apply(&self, e: &Ce, psi: &Spinor) -> Spinor {
        self.rep.apply(e, psi)
    }
}

fn add(a: Spinor, b: Spinor) -> Spinor {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: Spinor, b: Spinor) -> Spinor {
    [a[0] - b[0], a[1] - b[1]]
}

fn ci(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_order(psi: &Spinor, needed: usize, what: &str) -> Result<(), OperatorError> {
    if psi[0].order() < needed || psi[1].order() < needed {
        return Err(OperatorError::OrderExhausted(format!(
            "{what} needs spinor jets of order {needed}, got {}",
            psi[0].order().min(psi[1].order())
        )));
    }
    Ok(())
}

/// Linear differential operator acting on spinor jets at a point.
pub trait SpinorOperator: Send + Sync {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError>;

    /// Highest derivative order the operator takes.
    fn degree(&self) -> usize;
}

/// `𝔻 = i γ^a D_a − V − V̂ γ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiracOperator;

impl SpinorOperator for DiracOperator {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        check_order(psi, 1, "Dirac operator")?;
        let d = local.d1(psi);
        let mut out = local.clifford_apply(&local.fields.matrix_potential(), psi);
        out = [-out[0], -out[1]];
        for a in 0..2 {
            let g = local.rep.gamma_up[a];
            let term = Local::mat_apply(&g, &d.c[a]);
            out = add(out, [term[0] * ci(0.0, 1.0), term[1] * ci(0.0, 1.0)]);
        }
        Ok(out)
    }

    fn degree(&self) -> usize {
        1
    }
}

/// Zero-order operator `k I`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarOperator(pub Complex64);

impl SpinorOperator for ScalarOperator {
    fn apply(&self, _local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        Ok([psi[0] * self.0, psi[1] * self.0])
    }

    fn degree(&self) -> usize {
        0
    }
}

/// `A ∘ B`.
pub struct Composition<'a> {
    pub outer: &'a dyn SpinorOperator,
    pub inner: &'a dyn SpinorOperator,
}

impl SpinorOperator for Composition<'_> {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        let inner = self.inner.apply(local, psi)?;
        self.outer.apply(local, &inner)
    }

    fn degree(&self) -> usize {
        self.outer.degree() + self.inner.degree()
    }
}

/// `(K𝔻 − 𝔻K) ψ`.
pub fn commutator_residual(
    k: &dyn SpinorOperator,
    d: &dyn SpinorOperator,
    local: &Local,
    psi: &Spinor,
) -> Result<Spinor, OperatorError> {
    let kd = k.apply(local, &d.apply(local, psi)?)?;
    let dk = d.apply(local, &k.apply(local, psi)?)?;
    Ok(sub(kd, dk))
}

/// How tensor components of Killing data are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorForm {
    /// Frame components with upper indices (`e^{ab}`, `α^a`).
    FrameUpper,
    /// Coordinate components with upper indices (`e^{μν}`, `α^μ`).
    CoordUpper,
    /// Coordinate components with lower indices (`e_μν`, `α_μ`).
    CoordLower,
}

/// Parameters `(e^{ab}, α^a, ζ^a, α, g′)` of a second-order operator.
#[derive(Debug, Clone)]
pub struct KillingData {
    pub e: [[Expr; 2]; 2],
    pub e_form: TensorForm,
    pub alpha_vec: [Expr; 2],
    pub zeta: [Expr; 2],
    pub vec_form: TensorForm,
    pub alpha: Expr,
    pub gprime: Expr,
    pub params: Params,
}

/// Killing data as frame jets with upper indices.
#[derive(Debug, Clone)]
pub struct KillingJet {
    pub e: FrameTensor,
    pub alpha_vec: FrameTensor,
    pub zeta: FrameTensor,
    pub alpha: Jet,
    pub gprime: Jet,
}

/// Frame components of a coordinate tensor given in `form`.
pub fn tensor_to_frame(geo: &GeometryJet, t: [[Jet; 2]; 2], form: TensorForm) -> FrameTensor {
    let upper = match form {
        TensorForm::FrameUpper => return FrameTensor::matrix(t),
        TensorForm::CoordUpper => t,
        TensorForm::CoordLower => std::array::from_fn(|mu| {
            std::array::from_fn(|nu| {
                let mut acc = Jet::zero_like(&t[0][0]);
                for a in 0..2 {
                    for b in 0..2 {
                        acc += geo.metric_inv[mu][a] * geo.metric_inv[nu][b] * t[a][b];
                    }
                }
                acc
            })
        }),
    };
    let frame = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut acc = Jet::zero_like(&upper[0][0]);
            for mu in 0..2 {
                for nu in 0..2 {
                    acc += geo.coframe[a][mu] * geo.coframe[b][nu] * upper[mu][nu];
                }
            }
            acc
        })
    });
    FrameTensor::matrix(frame)
}

/// Frame components of a coordinate vector given in `form`.
pub fn vector_to_frame(geo: &GeometryJet, v: [Jet; 2], form: TensorForm) -> FrameTensor {
    let upper = match form {
        TensorForm::FrameUpper => return FrameTensor::vector(v),
        TensorForm::CoordUpper => v,
        TensorForm::CoordLower => {
            std::array::from_fn(|mu| geo.metric_inv[mu][0] * v[0] + geo.metric_inv[mu][1] * v[1])
        }
    };
    FrameTensor::vector(std::array::from_fn(|a| geo.coframe[a][0] * upper[0] + geo.coframe[a][1] * upper[1]))
}

impl KillingData {
    /// All-zero data.
    pub fn zero() -> Self {
        KillingData {
            e: std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())),
            e_form: TensorForm::FrameUpper,
            alpha_vec: [Expr::zero(), Expr::zero()],
            zeta: [Expr::zero(), Expr::zero()],
            vec_form: TensorForm::FrameUpper,
            alpha: Expr::zero(),
            gprime: Expr::zero(),
            params: Params::new(),
        }
    }

    pub fn at(&self, geo: &GeometryJet, order: usize) -> Result<KillingJet, ExprError> {
        let p = geo.point;
        let ev = |e: &Expr| e.eval_jet(p, &self.params, order);
        let mut e = [[Jet::zeros(order); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                e[a][b] = ev(&self.e[a][b])?;
            }
        }
        Ok(KillingJet {
            e: tensor_to_frame(geo, e, self.e_form),
            alpha_vec: vector_to_frame(geo, [ev(&self.alpha_vec[0])?, ev(&self.alpha_vec[1])?], self.vec_form),
            zeta: vector_to_frame(geo, [ev(&self.zeta[0])?, ev(&self.zeta[1])?], self.vec_form),
            alpha: ev(&self.alpha)?,
            gprime: ev(&self.gprime)?,
        })
    }
}

/// Sign in front of `iη e^{cb} ∇_b V̂ ε_ac` in the `γ^a` part of `𝔾`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VhatSign {
    #[default]
    Minus,
    Plus,
}

impl VhatSign {
    fn value(self) -> f64 {
        match self {
            VhatSign::Minus => -1.0,
            VhatSign::Plus => 1.0,
        }
    }
}

/// Pointwise coefficients `𝔼^{ab}`, `𝔽^a`, `𝔾` of a second-order operator.
#[derive(Debug, Clone)]
pub struct SecondOrderCoeffs {
    pub e: [[Ce; 2]; 2],
    pub f: [Ce; 2],
    pub g: Ce,
}

impl SecondOrderCoeffs {
    pub fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        check_order(psi, 2, "second-order operator")?;
        let d1 = local.d1(psi);
        let d2 = local.d2_sym(&d1);
        let mut out = local.clifford_apply(&self.g, psi);
        for a in 0..2 {
            out = add(out, local.clifford_apply(&self.f[a], &d1.c[a]));
            for b in 0..2 {
                out = add(out, local.clifford_apply(&self.e[a][b], &d2[a][b]));
            }
        }
        Ok(out)
    }
}

/// Frame derivatives `∇_a f` (index down).
pub fn frame_gradient(geo: &GeometryJet, f: &Jet) -> [Jet; 2] {
    [geo.frame_d(f, 0), geo.frame_d(f, 1)]
}

/// Coefficients of the second-order operator built from Killing data.
pub fn sosop_coefficients(local: &Local, kj: &KillingJet, sign: VhatSign) -> SecondOrderCoeffs {
    let sig = local.sig();
    let geo = &local.geo;
    let eta = sig.eta();
    let m = |a: usize| sig.metric(a, a);
    let i = ci(0.0, 1.0);
    let v = local.fields.v;
    let vh = local.fields.vhat;
    let qf = local.fields.qf;
    let r = geo.scalar_curvature;
    let dv = frame_gradient(geo, &v);
    let dvh = frame_gradient(geo, &vh);
    let ge = geo.grad(&kj.e);
    let ga = geo.grad(&kj.alpha_vec);
    let gz = geo.grad(&kj.zeta);
    let e = |a: usize, b: usize| kj.e.get(&[a, b]);
    let av = |a: usize| kj.alpha_vec.c[a];
    let zero = Jet::zero_like(&v);

    let e_coef: [[Ce; 2]; 2] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut vec = [zero, zero];
            vec[b] += av(a);
            vec[a] += av(b);
            CliffordElement { s: e(a, b), v: vec, p: zero }
        })
    });

    let f_coef: [Ce; 2] = std::array::from_fn(|a| {
        let mut s = kj.zeta.c[a];
        for b in 0..2 {
            s += ge.get(&[a, b, b]) * m(b);
        }
        let vec: [Jet; 2] = std::array::from_fn(|c| {
            let mut x = ga.get(&[a, c]) * m(c);
            if c == a {
                x += kj.alpha;
            }
            x
        });
        let mut p = av(a) * vh * (2.0 * i);
        for c in 0..2 {
            for b in 0..2 {
                let eps = sig.eps(c, b);
                if eps != 0.0 {
                    p += ge.get(&[a, b, c]) * (eps / 3.0);
                }
            }
        }
        CliffordElement { s, v: vec, p }
    });

    let mut gs = kj.gprime + kj.alpha * v * i;
    for a in 0..2 {
        gs += av(a) * dv[a] * (3.0 * i);
    }
    let gv: [Jet; 2] = std::array::from_fn(|a| {
        let mut x = r * av(a) * (-0.25 * m(a));
        for b in 0..2 {
            let eps = sig.eps(a, b);
            if eps != 0.0 {
                x += qf * av(b) * (i * eps);
            }
            x += e(a, b) * dv[b] * (i * m(a));
        }
        for c in 0..2 {
            let eps = sig.eps(a, c);
            if eps == 0.0 {
                continue;
            }
            for b in 0..2 {
                x += e(c, b) * dvh[b] * (i * (sign.value() * eta * eps));
            }
        }
        x
    });
    let mut inner = zero;
    for c in 0..2 {
        for a in 0..2 {
            let eps_ca = sig.eps(c, a);
            if eps_ca == 0.0 {
                continue;
            }
            inner += gz.get(&[a, c]) * eps_ca;
            inner += av(a) * dv[c] * (-2.0 * i * m(c) * eps_ca);
            for b in 0..2 {
                let em = sig.eps_mixed(c, b);
                if em != 0.0 {
                    inner += qf * e(a, b) * (-2.0 * i * em * eps_ca);
                }
            }
        }
    }
    let mut gp = inner * 0.25 + kj.alpha * vh * i;
    for a in 0..2 {
        gp += av(a) * dvh[a] * i;
    }
    SecondOrderCoeffs { e: e_coef, f: f_coef, g: CliffordElement { s: gs, v: gv, p: gp } }
}

/// A first-order operator `K̂ = 𝔽^a D_a + 𝔾` with `𝔽^a = ξ^a I + a γ^a` and
/// `𝔾 = (ω + i a V) I + (¼ ∇^c ξ^a ε_ca + i a V̂) γ`; `a = 0` gives the
/// non-trivial form `(ξ^a D_a + ω) I + ¼ ∇^c ξ^a ε_ca γ`.
#[derive(Debug, Clone)]
pub struct FirstOrderOp {
    pub xi: [Expr; 2],
    pub xi_form: TensorForm,
    pub omega: Expr,
    pub a: Complex64,
    pub params: Params,
}

impl FirstOrderOp {
    /// Checks the operator in strict mode: `ξ` must be a Killing vector with
    /// `ξ·∇F = ξ·∇V = ξ·∇V̂ = 0` and `∇_c ω = −iqF ε_ac ξ^a` at every point.
    /// The trivial part `a` is not constrained.
    pub fn build(self, sys: &DiracSystem, mode: BuildMode, points: &[(f64, f64)], tol: &Tolerance) -> Result<Self, OperatorError> {
        if mode == BuildMode::Strict {
            for &pt in points {
                let local = sys.local(pt, EVAL_ORDER)?;
                let xi = self.xi_at(&local.geo)?;
                let omega = self.omega.eval_jet(pt, &self.params, EVAL_ORDER)?;
                reject_violations(&crate::conditions::check_first_order(&local, &xi, &omega), tol)?;
            }
        }
        Ok(self)
    }

    pub fn xi_at(&self, geo: &GeometryJet) -> Result<FrameTensor, ExprError> {
        let order = geo.frame[0][0].order();
        let p = geo.point;
        let xi = [self.xi[0].eval_jet(p, &self.params, order)?, self.xi[1].eval_jet(p, &self.params, order)?];
        Ok(vector_to_frame(geo, xi, self.xi_form))
    }

    /// `¼ ∇^c ξ^a ε_ca`.
    pub fn spin_part(geo: &GeometryJet, xi: &FrameTensor) -> Jet {
        let g = geo.grad(xi);
        let mut acc = Jet::zero_like(&g.c[0]);
        for c in 0..2 {
            for a in 0..2 {
                let eps = geo.sig.eps(c, a);
                if eps != 0.0 {
                    acc += g.get(&[a, c]) * (0.25 * eps);
                }
            }
        }
        acc
    }
}

impl SpinorOperator for FirstOrderOp {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        check_order(psi, 1, "first-order operator")?;
        let xi = self.xi_at(&local.geo)?;
        let order = local.geo.frame[0][0].order();
        let omega = self.omega.eval_jet(local.geo.point, &self.params, order)?;
        let i = ci(0.0, 1.0);
        let d = local.d1(psi);
        let g = CliffordElement {
            s: omega + local.fields.v * (i * self.a),
            v: [Jet::zero_like(&omega); 2],
            p: Self::spin_part(&local.geo, &xi) + local.fields.vhat * (i * self.a),
        };
        let mut out = local.clifford_apply(&g, psi);
        for a in 0..2 {
            let mut vec = [Jet::zero_like(&omega); 2];
            vec[a] = Jet::constant(self.a, order);
            let f = CliffordElement { s: xi.c[a], v: vec, p: Jet::zero_like(&omega) };
            out = add(out, local.clifford_apply(&f, &d.c[a]));
        }
        Ok(out)
    }

    fn degree(&self) -> usize {
        1
    }
}

/// Where the Killing data of a second-order operator comes from.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum KillingSource {
    Data(KillingData),
    /// The trivial operator `K̂⁽¹⁾ 𝔻` expressed as Killing data.
    TrivialFromFirstOrder(FirstOrderOp),
}

impl KillingSource {
    pub fn at(&self, local: &Local) -> Result<KillingJet, OperatorError> {
        let geo = &local.geo;
        let order = geo.frame[0][0].order();
        match self {
            KillingSource::Data(kd) => Ok(kd.at(geo, order)?),
            KillingSource::TrivialFromFirstOrder(op) => {
                let sig = local.sig();
                let i = ci(0.0, 1.0);
                let a = op.a;
                let xi = op.xi_at(geo)?;
                let omega = op.omega.eval_jet(geo.point, &op.params, order)?;
                let v = local.fields.v;
                let vh = local.fields.vhat;
                let r = geo.scalar_curvature;
                let e = FrameTensor::matrix(std::array::from_fn(|p| {
                    std::array::from_fn(|q| Jet::constant(i * a * sig.metric(p, q), order))
                }));
                let spin4 = FirstOrderOp::spin_part(geo, &xi);
                Ok(KillingJet {
                    e,
                    alpha_vec: xi.scale(i * 0.5),
                    zeta: FrameTensor::vector([-(v * xi.c[0]), -(v * xi.c[1])]),
                    alpha: omega * i - v * (2.0 * a),
                    gprime: r * (-0.25 * i * a) + v * v * (i * a) + vh * vh * (i * sig.eta() * a)
                        + spin4 * vh * sig.eta(),
                })
            }
        }
    }
}

/// `𝕂 = 𝔼^{ab} D_ab + 𝔽^a D_a + 𝔾` from Killing data.
#[derive(Debug, Clone)]
pub struct SecondOrderOp {
    pub source: KillingSource,
    pub sign: VhatSign,
}

impl SecondOrderOp {
    /// Builds the operator; in strict mode the determining equations must hold
    /// at every point of `points` within `tol`.
    pub fn build(
        sys: &DiracSystem,
        source: KillingSource,
        sign: VhatSign,
        mode: BuildMode,
        points: &[(f64, f64)],
        tol: &Tolerance,
    ) -> Result<Self, OperatorError> {
        if mode == BuildMode::Strict {
            for &pt in points {
                let local = sys.local(pt, EVAL_ORDER)?;
                let kj = source.at(&local)?;
                reject_violations(&crate::conditions::check_determining(&local, &kj), tol)?;
            }
        }
        Ok(SecondOrderOp { source, sign })
    }

    pub fn coefficients(&self, local: &Local) -> Result<SecondOrderCoeffs, OperatorError> {
        Ok(sosop_coefficients(local, &self.source.at(local)?, self.sign))
    }
}

impl SpinorOperator for SecondOrderOp {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        self.coefficients(local)?.apply(local, psi)
    }

    fn degree(&self) -> usize {
        2
    }
}

fn reject_violations(residuals: &[Residual], tol: &Tolerance) -> Result<(), OperatorError> {
    match residuals.iter().find(|r| !is_informational(&r.label) && !r.passes(tol)) {
        Some(r) => Err(OperatorError::ConditionViolation { label: r.label.clone(), residual: r.residual }),
        None => Ok(()),
    }
}

/// Whether operators may be built from data failing their defining equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    #[default]
    Strict,
    Permissive,
}

/// Random cubic polynomial spinor `Σ c_ij (x − x_c)^i (y − y_c)^j`.
#[derive(Debug, Clone)]
pub struct PolySpinor {
    pub center: (f64, f64),
    /// Coefficients indexed by `(i, j)` with `i + j ≤ 3`, per component.
    pub coeffs: [Vec<((usize, usize), Complex64)>; 2],
}

impl PolySpinor {
    pub fn random<R: Rng>(rng: &mut R, center: (f64, f64), degree: usize) -> Self {
        let mut comp = || {
            let mut v = Vec::new();
            for d in 0..=degree {
                for j in 0..=d {
                    v.push(((d - j, j), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
            v
        };
        let first = comp();
        let second = comp();
        PolySpinor { center, coeffs: [first, second] }
    }

    /// Spinor whose only non-zero term is `½ (x − x₀)^i (y − y₀)^j s` centered at `point`.
    pub fn monomial(center: (f64, f64), i: usize, j: usize, s: [Complex64; 2]) -> Self {
        PolySpinor { center, coeffs: [vec![((i, j), s[0])], vec![((i, j), s[1])]] }
    }
}

/// A spinor field that can be expanded as jets.
pub trait SpinorField: Send + Sync {
    fn jet(&self, point: (f64, f64), order: usize) -> Result<Spinor, OperatorError>;
}

impl SpinorField for PolySpinor {
    fn jet(&self, point: (f64, f64), order: usize) -> Result<Spinor, OperatorError> {
        let x = Jet::variable(0, point.0 - self.center.0, order);
        let y = Jet::variable(1, point.1 - self.center.1, order);
        let comp = |k: usize| {
            let mut acc = Jet::zeros(order);
            for ((i, j), c) in &self.coeffs[k] {
                acc += x.powi(*i as i32) * y.powi(*j as i32) * *c;
            }
            acc
        };
        Ok([comp(0), comp(1)])
    }
}

/// A spinor given by two expressions.
#[derive(Debug, Clone)]
pub struct ExprSpinor {
    pub psi: [Expr; 2],
    pub params: Params,
}

impl SpinorField for ExprSpinor {
    fn jet(&self, point: (f64, f64), order: usize) -> Result<Spinor, OperatorError> {
        Ok([self.psi[0].eval_jet(point, &self.params, order)?, self.psi[1].eval_jet(point, &self.params, order)?])
    }
}

/// Spinor value at the expansion point.
pub fn value(psi: &Spinor) -> [Complex64; 2] {
    [psi[0].value(), psi[1].value()]
}

/// Euclidean norm of the spinor value.
pub fn value_norm(psi: &Spinor) -> f64 {
    let v = value(psi);
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Largest partial derivative of the spinor through order three; the scale
/// against which operator residuals on test spinors are measured.
pub fn jet_norm(psi: &Spinor) -> f64 {
    let mut m: f64 = 0.0;
    for comp in psi {
        let top = comp.order().min(3);
        for d in 0..=top {
            for j in 0..=d {
                m = m.max(comp.partial(d - j, j).norm());
            }
        }
    }
    m
}

/// `(K ψ)(p)` for spinors `½ (x^μ − p^μ)(x^ν − p^ν) s` isolates the principal
/// part: returns `E^{ab}` as matrices, from `E^{μν} = E^{ab} e_a^μ e_b^ν`.
pub fn principal_symbol(op: &dyn SpinorOperator, local: &Local) -> Result<[[Mat2; 2]; 2], OperatorError> {
    let p = local.geo.point;
    let basis = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    let mut coord = [[[[Complex64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    // (K ψ)(p) = E^{μν} ∂_μ∂_ν ψ: xx and yy monomials isolate the diagonal, xy the sum of the off-diagonal pair
    for (col, s) in basis.iter().enumerate() {
        let xx = PolySpinor::monomial(p, 2, 0, [s[0] * 0.5, s[1] * 0.5]).jet(p, EVAL_ORDER)?;
        let yy = PolySpinor::monomial(p, 0, 2, [s[0] * 0.5, s[1] * 0.5]).jet(p, EVAL_ORDER)?;
        let xy = PolySpinor::monomial(p, 1, 1, *s).jet(p, EVAL_ORDER)?;
        let kxx = value(&op.apply(local, &xx)?);
        let kyy = value(&op.apply(local, &yy)?);
        let kxy = value(&op.apply(local, &xy)?);
        for row in 0..2 {
            coord[0][0][row][col] = kxx[row];
            coord[1][1][row][col] = kyy[row];
            coord[0][1][row][col] = kxy[row] * 0.5;
            coord[1][0][row][col] = kxy[row] * 0.5;
        }
    }
    let geo = &local.geo;
    let mut frame = [[[[Complex64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for mu in 0..2 {
                for nu in 0..2 {
                    let w = geo.coframe[a][mu].value() * geo.coframe[b][nu].value();
                    for r in 0..2 {
                        for c in 0..2 {
                            frame[a][b][r][c] += coord[mu][nu][r][c] * w;
                        }
                    }
                }
            }
        }
    }
    Ok(frame)
}

/// `P ψ` for a spinor jet.
pub fn transform_spinor(p: &Mat2, psi: &Spinor) -> Spinor {
    Local::mat_apply(p, psi)
}

/// Product of two constant matrices (re-exported for callers composing bases).
pub fn compose_basis(a: &Mat2, b: &Mat2) -> Mat2 {
    mat_mul(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::SampleBox;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Expr {
        parse(s, &[]).unwrap()
    }

    fn flat(sig: Signature) -> DiracSystem {
        let m = SpinManifold::new(
            sig,
            [[p("1"), p("0")], [p("0"), p("1")]],
            "flat",
            SampleBox::new((-1.0, 1.0), (-1.0, 1.0)),
            Params::new(),
        );
        DiracSystem::new(m, ExternalFields::free())
    }

    #[test]
    fn dirac_kills_constants_on_flat_chart() {
        let sys = flat(Signature::LORENTZIAN);
        let local = sys.local((0.2, 0.3), EVAL_ORDER).unwrap();
        let psi = [Jet::real(1.0, 4), Jet::constant(ci(0.3, -2.0), 4)];
        let out = DiracOperator.apply(&local, &psi).unwrap();
        assert!(value_norm(&out) == 0.0);
    }

    #[test]
    fn scalar_operator_commutes() {
        let sys = flat(Signature::RIEMANNIAN);
        let local = sys.local((0.2, 0.3), EVAL_ORDER).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = PolySpinor::random(&mut rng, (0.0, 0.0), 3).jet((0.2, 0.3), EVAL_ORDER).unwrap();
        let k = ScalarOperator(ci(2.0, 1.0));
        let r = commutator_residual(&k, &DiracOperator, &local, &psi).unwrap();
        assert!(value_norm(&r) < 1e-13 * jet_norm(&psi));
    }

    #[test]
    fn metric_killing_data_gives_laplacian_symbol() {
        let sys = flat(Signature::RIEMANNIAN);
        let local = sys.local((0.1, 0.1), EVAL_ORDER).unwrap();
        let mut kd = KillingData::zero();
        kd.e = [[p("i*2"), p("0")], [p("0"), p("i*2")]];
        let op = SecondOrderOp { source: KillingSource::Data(kd), sign: VhatSign::Minus };
        let sym = principal_symbol(&op, &local).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let expected = if a == b { ci(0.0, 2.0) } else { ci(0.0, 0.0) };
                assert!((sym[a][b][0][0] - expected).norm() < 1e-13);
                assert!(sym[a][b][0][1].norm() < 1e-13);
            }
        }
    }
}
