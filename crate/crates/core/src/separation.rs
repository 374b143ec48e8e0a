//! Separation of variables in the first-order scheme
//!
//! ```text
//! 𝔻₅ = [[0, X₂(x)], [X₃(x), 0]] ∂_x + diag(Y₁(y), Y₄(y)) ∂_y + [[C₁(y), C₂(x)], [C₃(x), C₄(y)]],
//! ```
//!
//! in which the Dirac operator factors as `𝔻 = diag(R₁, R₂) 𝔻₅` with
//! `R₂ = R₁(y)`, `X₃ = −X₂`, `Y₄ = −Y₁` and `Y_j = i Ȳ_j`. A spinor
//! `ψ = (a₁(x) b₁(y), a₂(x) b₂(y))` solving `𝔻₅ ψ = μ ψ` satisfies
//!
//! ```text
//! (X₃∂_x + C₃) a₁ = ν₂ a₂,        (Y₁∂_y + C₁ − μ) b₁ = −ν₁ b₂,
//! (X₂∂_x + C₂) a₂ = ν₁ a₁,        (Y₄∂_y + C₄ − μ) b₂ = −ν₂ b₁,
//! ```
//!
//! and the decoupling operator `diag((X₂∂+C₂)(X₃∂+C₃), (X₃∂+C₃)(X₂∂+C₂))`
//! has eigenvalue `ν = ν₁ν₂`. With `X₂ = −ik` and `R₁ = 1/β(y)` two chart
//! families remain: Liouville (`Ȳ₁ = 1`, metric `β²(η dx² + dy²)`) and polar
//! (`Ȳ₁ = β`, metric `η β² dx² + dy²`). In both, the potentials separable in the
//! scheme are
//!
//! ```text
//! qA_x = (C₃ − C₂)/(2k),   V = −(C₁ + C₄)/(2β),   V̂ = (C₂ + C₃)/(2kηβ),
//! qA_y = ½ (C₁ − C₄ − iβ′/β)           (Liouville)
//! qA_y = (C₁ − C₄ − iβ′)/(2β)           (polar)
//! ```
//!
//! The eigenvalue problem solved by separated spinors is `R₁⁻¹ 𝔻 ψ = μ ψ`.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::Signature;
use crate::expr::{Expr, ExprError, Params};
use crate::fields::ExternalFields;
use crate::geometry::{SampleBox, SpinManifold};
use crate::jet::Jet;
use crate::operators::{jet_norm, value_norm, DiracOperator, DiracSystem, ExprSpinor, Local, OperatorError, Spinor, SpinorField, SpinorOperator, EVAL_ORDER};

#[derive(Debug, Error)]
pub enum SeparationError {
    #[error("not separable: entry {entry}: {reason}")]
    NotSeparable { entry: String, reason: String },
    #[error("RK4 did not converge: endpoint change {change:.3e} with {steps} steps")]
    StepFailure { steps: usize, change: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Chart family of a separable scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Liouville,
    Polar,
}

fn ci(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The scheme functions as expressions over the chart.
#[derive(Debug, Clone)]
pub struct SchemeD5 {
    pub kind: ChartKind,
    pub sig: Signature,
    pub beta: Expr,
    pub x2: Expr,
    pub x3: Expr,
    /// `Ȳ₁`, with `Y₁ = i Ȳ₁`.
    pub y1bar: Expr,
    /// `Ȳ₄`, with `Y₄ = i Ȳ₄`.
    pub y4bar: Expr,
    pub r1: Expr,
    pub r2: Expr,
    pub c1: Expr,
    pub c2: Expr,
    pub c3: Expr,
    pub c4: Expr,
    pub params: Params,
}

impl SchemeD5 {
    /// Scheme with the normalization `X₂ = −ik`, `R₁ = 1/β` of the chart family.
    pub fn new(kind: ChartKind, sig: Signature, beta: Expr, c: [Expr; 4], params: Params) -> Self {
        let k = sig.k();
        let r1 = Expr::real(1.0) / beta.clone();
        let y1bar = match kind {
            ChartKind::Liouville => Expr::real(1.0),
            ChartKind::Polar => beta.clone(),
        };
        let [c1, c2, c3, c4] = c;
        SchemeD5 {
            kind,
            sig,
            beta,
            x2: Expr::constant(-ci(0.0, 1.0) * k),
            x3: Expr::constant(ci(0.0, 1.0) * k),
            y4bar: -y1bar.clone(),
            y1bar,
            r2: r1.clone(),
            r1,
            c1,
            c2,
            c3,
            c4,
            params,
        }
    }

    /// Scheme for given scalar and pseudoscalar potentials in the gauge where
    /// the decoupled equations have no first-order terms: `C₂ = C₃ = kηβV̂` and
    /// `C₁ = C₄ = −βV` (Liouville) or `C₁,₄ = −βV ∓ iβ′/2` (polar), that is
    /// `qA_x = 0` and `qA_y = −iβ′/(2β)` (Liouville) or `−iβ′/β` (polar).
    /// `βV` must depend on `y` only and `βV̂` on `x` only.
    pub fn from_potentials(kind: ChartKind, sig: Signature, beta: Expr, v: Expr, vhat: Expr, params: Params) -> Self {
        let cy = -(beta.clone() * v);
        let cx = beta.clone() * vhat * (sig.k() * sig.eta());
        let (c1, c4) = match kind {
            ChartKind::Liouville => (cy.clone(), cy),
            ChartKind::Polar => {
                let shift = beta.derivative(1) * ci(0.0, 0.5);
                (cy.clone() - shift.clone(), cy + shift)
            }
        };
        SchemeD5::new(kind, sig, beta, [c1, cx.clone(), cx, c4], params)
    }

    /// `e_a^μ` with `e_0^y = R₁Ȳ₁`, `e_1^x = (i/k) R₁ X₂` and the rest zero.
    pub fn frame(&self) -> [[Expr; 2]; 2] {
        let ik = ci(0.0, 1.0) / self.sig.k();
        [
            [Expr::zero(), self.r1.clone() * self.y1bar.clone()],
            [self.r1.clone() * self.x2.clone() * ik, Expr::zero()],
        ]
    }

    pub fn manifold(&self, name: &str, sample_box: SampleBox) -> SpinManifold {
        SpinManifold::new(self.sig, self.frame(), name, sample_box, self.params.clone())
    }

    /// Separable potentials of the scheme, with `q = 1`.
    pub fn potentials(&self) -> ExternalFields {
        let k = self.sig.k();
        let eta = self.sig.eta();
        let beta = self.beta.clone();
        let dbeta = beta.derivative(1);
        let half = Expr::real(0.5);
        let i = ci(0.0, 1.0);
        let ax = (self.c3.clone() - self.c2.clone()) * (0.5 / k);
        let diff = self.c1.clone() - self.c4.clone();
        let ay = match self.kind {
            ChartKind::Liouville => half * (diff - dbeta / beta.clone() * i),
            ChartKind::Polar => (diff - dbeta * i) / (Expr::real(2.0) * beta.clone()),
        };
        let v = -((self.c1.clone() + self.c4.clone()) / (Expr::real(2.0) * beta.clone()));
        let vhat = (self.c2.clone() + self.c3.clone()) / (beta * (Complex64::new(2.0 * eta, 0.0) * k));
        ExternalFields {
            a: [ax, ay],
            q: ci(1.0, 0.0),
            v,
            vhat,
            va: None,
            params: self.params.clone(),
        }
    }

    /// Dirac system of the scheme: chart, frame and separable potentials.
    pub fn system(&self, name: &str, sample_box: SampleBox) -> DiracSystem {
        DiracSystem::new(self.manifold(name, sample_box), self.potentials())
    }

    fn jet(&self, e: &Expr, point: (f64, f64), order: usize) -> Result<Jet, ExprError> {
        e.eval_jet(point, &self.params, order)
    }

    /// Scheme functions as jets at a point.
    pub fn at(&self, point: (f64, f64), order: usize) -> Result<SchemePoint, ExprError> {
        let i = ci(0.0, 1.0);
        Ok(SchemePoint {
            x2: self.jet(&self.x2, point, order)?,
            x3: self.jet(&self.x3, point, order)?,
            y1: self.jet(&self.y1bar, point, order)? * i,
            y4: self.jet(&self.y4bar, point, order)? * i,
            r1: self.jet(&self.r1, point, order)?,
            r2: self.jet(&self.r2, point, order)?,
            c: [
                [self.jet(&self.c1, point, order)?, self.jet(&self.c2, point, order)?],
                [self.jet(&self.c3, point, order)?, self.jet(&self.c4, point, order)?],
            ],
        })
    }

    /// Killing data whose second-order operator equals the decoupling operator:
    /// `e_xx = −ηβ⁴` and `g′ = ¼((C₂+C₃)² + s)` with `s = (β′/β)²` (Liouville)
    /// or `(β′)²` (polar).
    pub fn killing_data(&self) -> crate::operators::KillingData {
        use crate::operators::{KillingData, TensorForm};
        let beta = self.beta.clone();
        let dbeta = beta.derivative(1);
        let s = match self.kind {
            ChartKind::Liouville => (dbeta / beta.clone()).powf(2.0),
            ChartKind::Polar => dbeta.powf(2.0),
        };
        let sum = self.c2.clone() + self.c3.clone();
        let mut kd = KillingData::zero();
        kd.e_form = TensorForm::CoordLower;
        kd.vec_form = TensorForm::CoordUpper;
        kd.e[0][0] = beta.powf(4.0) * Complex64::new(-self.sig.eta(), 0.0);
        kd.gprime = Expr::real(0.25) * (sum.clone() * sum + s);
        kd.params = self.params.clone();
        kd
    }

    /// Coefficients `(p₂, p₁, p₀)` of the decoupled equation
    /// `p₂ z″ + p₁ z′ + p₀ z = ν z` for one factor, with the other coordinate
    /// held at `fixed`.
    pub fn decoupled_coefficients(&self, which: Factor, mu: Complex64, t: f64, fixed: f64) -> Result<[Complex64; 3], ExprError> {
        let i = ci(0.0, 1.0);
        let (point, axis) = match which {
            Factor::A1 | Factor::A2 => ((t, fixed), 0),
            Factor::B1 | Factor::B2 => ((fixed, t), 1),
        };
        let j = |e: &Expr| self.jet(e, point, 1);
        // (P ∂ + Q)(S ∂ + T) z = P S z″ + (P S′ + P T + Q S) z′ + (P T′ + Q T) z
        let (p, q, s, tt) = match which {
            Factor::A1 => (j(&self.x2)?, j(&self.c2)?, j(&self.x3)?, j(&self.c3)?),
            Factor::A2 => (j(&self.x3)?, j(&self.c3)?, j(&self.x2)?, j(&self.c2)?),
            Factor::B1 => (j(&self.y4bar)? * i, j(&self.c4)? - mu, j(&self.y1bar)? * i, j(&self.c1)? - mu),
            Factor::B2 => (j(&self.y1bar)? * i, j(&self.c1)? - mu, j(&self.y4bar)? * i, j(&self.c4)? - mu),
        };
        let (p, q, s0, t0) = (p.value(), q.value(), s.value(), tt.value());
        let ds = s.d(axis).value();
        let dt = tt.d(axis).value();
        Ok([p * s0, p * ds + p * t0 + q * s0, p * dt + q * t0])
    }

    /// Inner first-order factor `S ∂ + T` of a decoupled equation, evaluated
    /// at `t` with the other coordinate held at `fixed`.
    fn inner_factor(&self, which: Factor, mu: Complex64, t: f64, fixed: f64) -> Result<(Complex64, Complex64), ExprError> {
        let i = ci(0.0, 1.0);
        let v = |e: &Expr, point: (f64, f64)| e.eval(point, &self.params);
        Ok(match which {
            Factor::A1 => (v(&self.x3, (t, fixed))?, v(&self.c3, (t, fixed))?),
            Factor::A2 => (v(&self.x2, (t, fixed))?, v(&self.c2, (t, fixed))?),
            Factor::B1 => (v(&self.y1bar, (fixed, t))? * i, v(&self.c1, (fixed, t))? - mu),
            Factor::B2 => (v(&self.y4bar, (fixed, t))? * i, v(&self.c4, (fixed, t))? - mu),
        })
    }

    /// Exponent `w = −T/S` of the `ν = 0` solution `z⁰ = exp(∫w)`, which spans
    /// the kernel of the inner factor `S ∂ + T`. In the gauge of
    /// [`SchemeD5::from_potentials`] on a Liouville chart this is
    /// `w = iηβV̂` (a₁), `−iηβV̂` (a₂), `−i(βV+μ)` (b₁) and `i(βV+μ)` (b₂).
    pub fn nu_zero_exponent(&self, which: Factor, mu: Complex64, t: f64, fixed: f64) -> Result<Complex64, ExprError> {
        let (s, tt) = self.inner_factor(which, mu, t, fixed)?;
        Ok(-tt / s)
    }

    /// `(z⁰, z⁰′)` at `interval.1` for `z⁰ = exp(∫ w)` normalized to 1 at
    /// `interval.0`, with the integral by composite Simpson on `n` panels.
    pub fn nu_zero_solution(&self, which: Factor, mu: Complex64, fixed: f64, interval: (f64, f64), n: usize) -> Result<[Complex64; 2], ExprError> {
        let n = 2 * n.max(1);
        let (t0, t1) = interval;
        let h = (t1 - t0) / n as f64;
        let mut acc = ci(0.0, 0.0);
        for j in 0..=n {
            let weight = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += self.nu_zero_exponent(which, mu, t0 + j as f64 * h, fixed)? * weight;
        }
        let z = (acc * (h / 3.0)).exp();
        Ok([z, z * self.nu_zero_exponent(which, mu, t1, fixed)?])
    }

    /// Coefficients `(p₂, p₁, p₀)` of the decoupled equations as expanded in
    /// terms of the potentials, valid in the gauge of
    /// [`SchemeD5::from_potentials`]:
    ///
    /// ```text
    /// −η(a₁,₂″ + β(βV̂² ∓ iη∂_xV̂) a₁,₂) = ν a₁,₂
    /// b₁,₂″ + (±i(βV)′ + (βV+μ)²) b₁,₂ = ν b₁,₂                          (Liouville)
    /// β²b₁,₂″ + (¼β′² − ½ββ″ ± iβ(βV)′ + (βV+μ)²) b₁,₂ = ν b₁,₂          (polar)
    /// ```
    pub fn expanded_coefficients(&self, which: Factor, mu: Complex64, t: f64, fixed: f64) -> Result<[Complex64; 3], ExprError> {
        let i = ci(0.0, 1.0);
        let eta = self.sig.eta();
        let f = self.potentials();
        let zero = ci(0.0, 0.0);
        match which {
            Factor::A1 | Factor::A2 => {
                let sign = if which == Factor::A1 { -1.0 } else { 1.0 };
                let point = (t, fixed);
                let beta = self.jet(&self.beta, point, 1)?.value();
                let vh = f.vhat.eval_jet(point, &self.params, 1)?;
                let p0 = beta * (beta * vh.value() * vh.value() + i * eta * sign * vh.d(0).value()) * (-eta);
                Ok([ci(-eta, 0.0), zero, p0])
            }
            Factor::B1 | Factor::B2 => {
                let sign = if which == Factor::B1 { 1.0 } else { -1.0 };
                let point = (fixed, t);
                let beta = self.jet(&self.beta, point, 2)?;
                let bv = beta * f.v.eval_jet(point, &self.params, 2)?;
                let s = bv.value() + mu;
                let dbv = bv.d(1).value();
                let (b0, b1, b2) = (beta.value(), beta.d(1).value(), beta.d(1).d(1).value());
                Ok(match self.kind {
                    ChartKind::Liouville => [ci(1.0, 0.0), zero, i * sign * dbv + s * s],
                    ChartKind::Polar => [b0 * b0, zero, b1 * b1 * 0.25 - b0 * b2 * 0.5 + i * sign * b0 * dbv + s * s],
                })
            }
        }
    }
}

/// Scheme functions at a point (`Y` already includes the factor `i`).
#[derive(Debug, Clone)]
pub struct SchemePoint {
    pub x2: Jet,
    pub x3: Jet,
    pub y1: Jet,
    pub y4: Jet,
    pub r1: Jet,
    pub r2: Jet,
    pub c: [[Jet; 2]; 2],
}

impl SchemePoint {
    /// Named values in the order `X₂ X₃ Y₁ Y₄ C₁ C₂ C₃ C₄ R₁ R₂`.
    pub fn values(&self) -> [(&'static str, Complex64); 10] {
        [
            ("X2", self.x2.value()),
            ("X3", self.x3.value()),
            ("Y1", self.y1.value()),
            ("Y4", self.y4.value()),
            ("C1", self.c[0][0].value()),
            ("C2", self.c[0][1].value()),
            ("C3", self.c[1][0].value()),
            ("C4", self.c[1][1].value()),
            ("R1", self.r1.value()),
            ("R2", self.r2.value()),
        ]
    }
}

/// Matrix coefficients of `𝔻 = M_x ∂_x + M_y ∂_y + C̃` at a point.
pub struct DiracMatrices {
    pub mx: [[Jet; 2]; 2],
    pub my: [[Jet; 2]; 2],
    pub c: [[Jet; 2]; 2],
}

/// Reads `M_x`, `M_y` and `C̃` off the Dirac operator by applying it to
/// constant and linear spinors.
pub fn dirac_matrices(local: &Local, order: usize) -> Result<DiracMatrices, OperatorError> {
    let point = local.geo.point;
    let one = Jet::constant(ci(1.0, 0.0), order);
    let zero = Jet::zeros(order);
    let lin = [Jet::variable(0, 0.0, order), Jet::variable(1, 0.0, order)];
    let _ = point;
    let mut mx = [[zero; 2]; 2];
    let mut my = [[zero; 2]; 2];
    let mut c = [[zero; 2]; 2];
    for col in 0..2 {
        let mut s = [zero, zero];
        s[col] = one;
        let d0 = DiracOperator.apply(local, &s)?;
        for row in 0..2 {
            c[row][col] = d0[row];
        }
        for (axis, m) in [(0usize, &mut mx), (1usize, &mut my)] {
            let mut ls = [zero, zero];
            ls[col] = lin[axis];
            let d1 = DiracOperator.apply(local, &ls)?;
            for row in 0..2 {
                m[row][col] = d1[row] - lin[axis].truncate(d0[row].order()) * d0[row];
            }
        }
    }
    Ok(DiracMatrices { mx, my, c })
}

/// Factorizes `𝔻` at a point as `diag(R₁, R₂) 𝔻₅` with `X₂ = −ik`, `X₃ = ik`,
/// and checks the structure of the scheme: vanishing entries, `R₂ = R₁`,
/// `Y₄ = −Y₁`, and the coordinate dependence of every scheme function.
pub fn factor_dirac(sys: &DiracSystem, point: (f64, f64)) -> Result<SchemePoint, SeparationError> {
    let local = sys.local(point, EVAL_ORDER)?;
    let m = dirac_matrices(&local, EVAL_ORDER)?;
    let k = sys.sig().k();
    let i = ci(0.0, 1.0);
    let scale = m
        .mx
        .iter()
        .chain(m.my.iter())
        .chain(m.c.iter())
        .flat_map(|r| r.iter())
        .map(|j| j.value().norm())
        .fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let small = |j: &Jet| j.value().norm() <= tol && j.d(0).value().norm() <= tol && j.d(1).value().norm() <= tol;
    let fail = |entry: &str, reason: &str| SeparationError::NotSeparable { entry: entry.into(), reason: reason.into() };
    for (name, j) in [("Mx[0][0]", &m.mx[0][0]), ("Mx[1][1]", &m.mx[1][1]), ("My[0][1]", &m.my[0][1]), ("My[1][0]", &m.my[1][0])] {
        if !small(j) {
            return Err(fail(name, "must vanish in the scheme"));
        }
    }
    let x2 = Jet::constant(-i * k, m.c[0][0].order());
    let x3 = Jet::constant(i * k, m.c[0][0].order());
    let r1 = m.mx[0][1] / x2;
    let r2 = m.mx[1][0] / x3;
    if r1.value().norm() < tol || r2.value().norm() < tol {
        return Err(fail("R1", "the x-derivative block is degenerate"));
    }
    let y1 = m.my[0][0] / r1;
    let y4 = m.my[1][1] / r2;
    let c = [[m.c[0][0] / r1, m.c[0][1] / r1], [m.c[1][0] / r2, m.c[1][1] / r2]];
    let rel = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-9 * a.norm().max(b.norm()).max(1.0);
    if !rel(r1.value(), r2.value()) {
        return Err(fail("R2", "differs from R1"));
    }
    if !rel(y4.value(), -y1.value()) {
        return Err(fail("Y4", "differs from -Y1"));
    }
    let indep = |j: &Jet, axis: usize| j.d(axis).value().norm() <= 1e-9 * j.value().norm().max(1.0);
    for (name, j, axis, coord) in [
        ("R1", &r1, 0, "x"),
        ("Y1", &y1, 0, "x"),
        ("C1", &c[0][0], 0, "x"),
        ("C4", &c[1][1], 0, "x"),
        ("C2", &c[0][1], 1, "y"),
        ("C3", &c[1][0], 1, "y"),
    ] {
        if !indep(j, axis) {
            return Err(fail(name, &format!("depends on {coord}")));
        }
    }
    Ok(SchemePoint { x2, x3, y1, y4, r1, r2, c })
}

/// `R₁⁻¹ 𝔻`, the operator whose eigenvalue is `μ` for separated spinors.
#[derive(Debug, Clone)]
pub struct ReducedDirac {
    pub r1: Expr,
    pub params: Params,
}

impl SpinorOperator for ReducedDirac {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        let d = DiracOperator.apply(local, psi)?;
        let r = self.r1.eval_jet(local.geo.point, &self.params, d[0].order())?;
        Ok([d[0] / r, d[1] / r])
    }

    fn degree(&self) -> usize {
        1
    }
}

/// `𝔻₅` assembled directly from the scheme functions.
#[derive(Debug, Clone)]
pub struct SchemeOperator {
    pub scheme: SchemeD5,
}

impl SpinorOperator for SchemeOperator {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        let order = psi[0].order().saturating_sub(1);
        let s = self.scheme.at(local.geo.point, order)?;
        let dx = [psi[0].d(0), psi[1].d(0)];
        let dy = [psi[0].d(1), psi[1].d(1)];
        let p = [psi[0].truncate(order), psi[1].truncate(order)];
        Ok([
            s.x2 * dx[1] + s.y1 * dy[0] + s.c[0][0] * p[0] + s.c[0][1] * p[1],
            s.x3 * dx[0] + s.y4 * dy[1] + s.c[1][0] * p[0] + s.c[1][1] * p[1],
        ])
    }

    fn degree(&self) -> usize {
        1
    }
}

/// The decoupling operator `diag((X₂∂+C₂)(X₃∂+C₃), (X₃∂+C₃)(X₂∂+C₂))`.
#[derive(Debug, Clone)]
pub struct DecouplingOperator {
    pub scheme: SchemeD5,
}

impl SpinorOperator for DecouplingOperator {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        let order = psi[0].order();
        let s = self.scheme.at(local.geo.point, order)?;
        let step = |x: &Jet, c: &Jet, u: &Jet| {
            let du = u.d(0);
            *x * du + *c * u.truncate(du.order())
        };
        let (c2, c3) = (s.c[0][1], s.c[1][0]);
        Ok([
            step(&s.x2, &c2, &step(&s.x3, &c3, &psi[0])),
            step(&s.x3, &c3, &step(&s.x2, &c2, &psi[1])),
        ])
    }

    fn degree(&self) -> usize {
        2
    }
}

/// The expanded form
/// `η[(−∂²_x + 2iqA_x∂_x + iq∂_xA_x + q²A_x² − β²V̂²) I + iηβ ∂_xV̂ σ₃]`
/// of the decoupling operator, evaluated from the fields of a system.
#[derive(Debug, Clone)]
pub struct ExpandedDecoupling {
    pub beta: Expr,
    pub params: Params,
}

impl SpinorOperator for ExpandedDecoupling {
    fn apply(&self, local: &Local, psi: &Spinor) -> Result<Spinor, OperatorError> {
        let sig = local.sig();
        let eta = sig.eta();
        let i = ci(0.0, 1.0);
        let order = psi[0].order() - 2;
        let f = &local.fields;
        let beta = self.beta.eval_jet(local.geo.point, &self.params, order + 1)?;
        let qa = f.qa[0];
        let vh = f.vhat;
        let scalar = qa.d(0).truncate(order) * i + (qa * qa).truncate(order) - (beta * beta * vh * vh).truncate(order);
        let split = (beta * vh.d(0)).truncate(order) * (i * eta);
        let comp = |u: &Jet, sign: f64| {
            let ux = u.d(0);
            (-ux.d(0) + (qa.truncate(order + 1) * ux).truncate(order) * (2.0 * i) + scalar * u.truncate(order) + split * u.truncate(order) * sign) * eta
        };
        Ok([comp(&psi[0], 1.0), comp(&psi[1], -1.0)])
    }

    fn degree(&self) -> usize {
        2
    }
}

/// Residuals of the four separated equations and the two product relations
/// for factors `a_j(x)` and `b_j(y)` given as jets at a point.
pub fn separated_residuals(
    s: &SchemePoint,
    a: &[Jet; 2],
    b: &[Jet; 2],
    mu: Complex64,
    nu1: Complex64,
    nu2: Complex64,
) -> [Complex64; 6] {
    let v = |j: &Jet| j.value();
    let dx = |j: &Jet| j.d(0).value();
    let dy = |j: &Jet| j.d(1).value();
    let (c1, c2, c3, c4) = (v(&s.c[0][0]), v(&s.c[0][1]), v(&s.c[1][0]), v(&s.c[1][1]));
    let (x2, x3, y1, y4) = (v(&s.x2), v(&s.x3), v(&s.y1), v(&s.y4));
    let la1 = x3 * dx(&a[0]) + c3 * v(&a[0]);
    let la2 = x2 * dx(&a[1]) + c2 * v(&a[1]);
    let lb1 = y1 * dy(&b[0]) + (c1 - mu) * v(&b[0]);
    let lb2 = y4 * dy(&b[1]) + (c4 - mu) * v(&b[1]);
    let nu = nu1 * nu2;
    [
        la1 - nu2 * v(&a[1]),
        la2 - nu1 * v(&a[0]),
        lb1 + nu1 * v(&b[1]),
        lb2 + nu2 * v(&b[0]),
        nu * v(&a[0]) * v(&b[0]) + la2 * lb2,
        nu * v(&a[1]) * v(&b[1]) + la1 * lb1,
    ]
}

/// Principal square root.
fn csqrt(z: Complex64) -> Complex64 {
    z.sqrt()
}

/// A separated spinor `ψ = (a₁(x) b₁(y), a₂(x) b₂(y))` with eigenvalues `μ` of
/// `R₁⁻¹𝔻` and `ν = ν₁ν₂` of the decoupling operator.
pub trait SeparatedSolution {
    fn mu(&self) -> Complex64;
    fn nu(&self) -> Complex64;
    /// Separation constants `(ν₁, ν₂)` with `ν₁ν₂ = ν`.
    fn separation_constants(&self) -> (Complex64, Complex64);
    /// Factors `a_j`, `b_j` as jets at a point.
    fn factors(&self, point: (f64, f64), order: usize) -> ([Jet; 2], [Jet; 2]);
    /// The spinor as expressions, for use with operators.
    fn spinor(&self) -> ExprSpinor;
    /// Branch and convention warnings for the chosen constants.
    fn notes(&self) -> Vec<String>;
    /// Completeness determinant at a point, when the solution exposes a
    /// parameter family.
    fn completeness(&self, _point: (f64, f64)) -> Option<Complex64> {
        None
    }
}

/// Whether `z` lies on the negative real axis, the cut of the principal root.
fn on_cut(z: Complex64) -> bool {
    z.re < 0.0 && z.im.abs() <= 1e-14 * z.re.abs()
}

fn common_notes(mu: Complex64, nu: Complex64, k: Complex64, khat: Complex64) -> Vec<String> {
    let mut out = vec![format!("k̂ = {khat} (signature constant k = {k})")];
    if mu.norm() == 0.0 {
        out.push("μ = 0: the separability conditions are sufficient only".into());
    }
    if on_cut(nu) {
        out.push("√ν on the branch cut; principal branch used".into());
    }
    out
}

/// Closed-form separated spinor for vanishing scalar and pseudoscalar
/// potentials in the Liouville gauge `qA_x = 0`, `qA_y = −iβ′/(2β)`:
///
/// ```text
/// ψ₁ = (c₁ e^{√ν x/k̂} + c₂ e^{−√ν x/k̂}) (d₁ sin(√(μ²−ν) y) + d₂ cos(√(μ²−ν) y))
/// ψ₂ = (c₃ e^{√ν x/k̂} + c₄ e^{−√ν x/k̂}) (d₃ sin(√(μ²−ν) y) + d₄ cos(√(μ²−ν) y))
/// ```
///
/// with `c₃ = iν^{−½}c₁`, `c₄ = −iν^{−½}c₂`, `d₃ = d₁μ + id₂√(μ²−ν)` and
/// `d₄ = d₂μ − id₁√(μ²−ν)`. `k̂` defaults to the signature constant `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSolution {
    pub mu: Complex64,
    pub nu: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub k: Complex64,
    pub khat: Complex64,
}

/// Constants of a closed-form solution that are fixed by the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependentConstants {
    pub c3: Complex64,
    pub c4: Complex64,
    pub d3: Complex64,
    pub d4: Complex64,
}

impl FreeSolution {
    pub fn new(sig: Signature, mu: f64, nu: f64) -> Self {
        FreeSolution {
            mu: ci(mu, 0.0),
            nu: ci(nu, 0.0),
            c1: ci(1.0, 0.0),
            c2: ci(0.5, 0.0),
            d1: ci(1.0, 0.0),
            d2: ci(0.3, 0.0),
            k: sig.k(),
            khat: sig.k(),
        }
    }

    pub fn frequency(&self) -> Complex64 {
        csqrt(self.mu * self.mu - self.nu)
    }

    pub fn rate(&self) -> Complex64 {
        csqrt(self.nu) / self.khat
    }

    pub fn dependent(&self) -> DependentConstants {
        let i = ci(0.0, 1.0);
        let s = csqrt(self.nu);
        let w = self.frequency();
        DependentConstants {
            c3: i * self.c1 / s,
            c4: -i * self.c2 / s,
            d3: self.d1 * self.mu + i * self.d2 * w,
            d4: self.d2 * self.mu - i * self.d1 * w,
        }
    }

    /// Logarithmic derivatives `(a₁′/a₁, a₂′/a₂, b₁′/b₁, b₂′/b₂)` as functions of
    /// `(c₁/c₂, d₁/d₂, μ, ν)`, for the completeness determinant.
    pub fn log_derivatives(&self, point: (f64, f64)) -> impl Fn(&[Complex64; 4]) -> [Complex64; 4] + '_ {
        move |p: &[Complex64; 4]| {
            let s = FreeSolution {
                c1: p[0],
                c2: ci(1.0, 0.0),
                d1: p[1],
                d2: ci(1.0, 0.0),
                mu: p[2],
                nu: p[3],
                k: self.k,
                khat: self.khat,
            };
            let (a, b) = s.factors(point, 1);
            [
                a[0].d(0).value() / a[0].value(),
                a[1].d(0).value() / a[1].value(),
                b[0].d(1).value() / b[0].value(),
                b[1].d(1).value() / b[1].value(),
            ]
        }
    }

    /// Parameter point `(c₁/c₂, d₁/d₂, μ, ν)`.
    pub fn parameters(&self) -> [Complex64; 4] {
        [self.c1 / self.c2, self.d1 / self.d2, self.mu, self.nu]
    }
}

impl SeparatedSolution for FreeSolution {
    fn mu(&self) -> Complex64 {
        self.mu
    }

    fn completeness(&self, point: (f64, f64)) -> Option<Complex64> {
        Some(completeness_determinant(self.log_derivatives(point), self.parameters(), 1e-5))
    }

    fn nu(&self) -> Complex64 {
        self.nu
    }

    fn notes(&self) -> Vec<String> {
        let mut out = common_notes(self.mu, self.nu, self.k, self.khat);
        if on_cut(self.mu * self.mu - self.nu) {
            out.push("√(μ²−ν) on the branch cut; principal branch used".into());
        }
        out
    }

    fn separation_constants(&self) -> (Complex64, Complex64) {
        (ci(1.0, 0.0), self.nu)
    }

    fn factors(&self, point: (f64, f64), order: usize) -> ([Jet; 2], [Jet; 2]) {
        let d = self.dependent();
        let x = Jet::variable(0, point.0, order);
        let y = Jet::variable(1, point.1, order);
        let r = self.rate();
        let w = self.frequency();
        let ep = (x * r).exp();
        let em = (x * (-r)).exp();
        let sn = (y * w).sin();
        let cs = (y * w).cos();
        (
            [ep * self.c1 + em * self.c2, ep * d.c3 + em * d.c4],
            [sn * self.d1 + cs * self.d2, sn * d.d3 + cs * d.d4],
        )
    }

    fn spinor(&self) -> ExprSpinor {
        let d = self.dependent();
        let names = ["r", "w", "c1", "c2", "c3", "c4", "d1", "d2", "d3", "d4"];
        let vals = [self.rate(), self.frequency(), self.c1, self.c2, d.c3, d.c4, self.d1, self.d2, d.d3, d.d4];
        let params: Params = names.iter().map(|n| n.to_string()).zip(vals).collect();
        let p = |s: &str| crate::expr::parse(s, &names).expect("closed form parses");
        ExprSpinor {
            psi: [
                p("(c1*exp(r*x)+c2*exp(-r*x))*(d1*sin(w*y)+d2*cos(w*y))"),
                p("(c3*exp(r*x)+c4*exp(-r*x))*(d3*sin(w*y)+d4*cos(w*y))"),
            ],
            params,
        }
    }
}

/// Closed-form separated spinor for the polar chart `β = y` with `V = h/y`,
/// `V̂ = 0` and the gauge `qA_x = 0`, `qA_y = −i/y`:
///
/// ```text
/// ψ₁ = (c₅ e^{√ν x/k} + c₆ e^{−√ν x/k̂}) (c₁ y^{½+w} + c₂ y^{½−w})
/// ψ₂ = (ic₅ e^{√ν x/k} − ic₆ e^{−√ν x/k̂}) ((h+μ−iw)/√ν c₁ y^{½+w} + (h+μ+iw)/√ν c₂ y^{½−w})
/// ```
///
/// with `w = √(ν − (h+μ)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerSolution {
    pub h: Complex64,
    pub mu: Complex64,
    pub nu: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub c5: Complex64,
    pub c6: Complex64,
    pub k: Complex64,
    pub khat: Complex64,
}

impl KeplerSolution {
    pub fn new(sig: Signature, h: f64, mu: f64, nu: f64) -> Self {
        KeplerSolution {
            h: ci(h, 0.0),
            mu: ci(mu, 0.0),
            nu: ci(nu, 0.0),
            c1: ci(1.0, 0.0),
            c2: ci(0.4, 0.0),
            c5: ci(1.0, 0.0),
            c6: ci(0.7, 0.0),
            k: sig.k(),
            khat: sig.k(),
        }
    }

    pub fn w(&self) -> Complex64 {
        let s = self.h + self.mu;
        csqrt(self.nu - s * s)
    }

    /// Couplings `(h+μ−iw)/√ν` and `(h+μ+iw)/√ν`.
    pub fn couplings(&self) -> (Complex64, Complex64) {
        let i = ci(0.0, 1.0);
        let s = csqrt(self.nu);
        let w = self.w();
        ((self.h + self.mu - i * w) / s, (self.h + self.mu + i * w) / s)
    }
}

impl SeparatedSolution for KeplerSolution {
    fn mu(&self) -> Complex64 {
        self.mu
    }

    fn nu(&self) -> Complex64 {
        self.nu
    }

    fn notes(&self) -> Vec<String> {
        let s = self.h + self.mu;
        let mut out = common_notes(self.mu, self.nu, self.k, self.khat);
        if on_cut(self.nu - s * s) {
            out.push("w = √(ν−(h+μ)²) on the branch cut; principal branch used (oscillatory radial part)".into());
        }
        out
    }

    fn separation_constants(&self) -> (Complex64, Complex64) {
        let s = csqrt(self.nu);
        (s, s)
    }

    fn factors(&self, point: (f64, f64), order: usize) -> ([Jet; 2], [Jet; 2]) {
        let i = ci(0.0, 1.0);
        let x = Jet::variable(0, point.0, order);
        let y = Jet::variable(1, point.1, order);
        let s = csqrt(self.nu);
        let ep = (x * (s / self.k)).exp();
        let em = (x * (-s / self.khat)).exp();
        let w = self.w();
        let yp = y.powc(ci(0.5, 0.0) + w);
        let ym = y.powc(ci(0.5, 0.0) - w);
        let (g1, g2) = self.couplings();
        (
            [ep * self.c5 + em * self.c6, ep * (i * self.c5) - em * (i * self.c6)],
            [yp * self.c1 + ym * self.c2, yp * (g1 * self.c1) + ym * (g2 * self.c2)],
        )
    }

    fn spinor(&self) -> ExprSpinor {
        let i = ci(0.0, 1.0);
        let s = csqrt(self.nu);
        let w = self.w();
        let (g1, g2) = self.couplings();
        let names = ["rp", "rm", "pp", "pm", "c1", "c2", "c5", "c6", "g1", "g2", "i5", "i6"];
        let vals = [
            s / self.k,
            -s / self.khat,
            ci(0.5, 0.0) + w,
            ci(0.5, 0.0) - w,
            self.c1,
            self.c2,
            self.c5,
            self.c6,
            g1,
            g2,
            i * self.c5,
            -i * self.c6,
        ];
        let params: Params = names.iter().map(|n| n.to_string()).zip(vals).collect();
        let p = |s: &str| crate::expr::parse(s, &names).expect("closed form parses");
        ExprSpinor {
            psi: [
                p("(c5*exp(rp*x)+c6*exp(rm*x))*(c1*y^pp+c2*y^pm)"),
                p("(i5*exp(rp*x)+i6*exp(rm*x))*(g1*c1*y^pp+g2*c2*y^pm)"),
            ],
            params,
        }
    }
}

/// Which separated factor a decoupled equation governs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    A1,
    A2,
    B1,
    B2,
}

/// Sampled solution of a decoupled equation.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub z: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    pub steps: usize,
}

/// Fixed-step RK4 on `z″ = f(t, z, z′)` with `n` steps, returning the states
/// at `samples + 1` evenly spaced output points.
fn rk4<F>(f: &F, t0: f64, t1: f64, init: [Complex64; 2], n: usize, samples: usize) -> Result<OdeSolution, ExprError>
where
    F: Fn(f64, Complex64, Complex64) -> Result<Complex64, ExprError>,
{
    let h = (t1 - t0) / n as f64;
    let stride = n / samples;
    let (mut z, mut dz) = (init[0], init[1]);
    let mut out = OdeSolution { t: vec![t0], z: vec![z], dz: vec![dz], steps: n };
    for step in 0..n {
        let t = t0 + step as f64 * h;
        let k1 = (dz, f(t, z, dz)?);
        let k2 = (dz + k1.1 * (h / 2.0), f(t + h / 2.0, z + k1.0 * (h / 2.0), dz + k1.1 * (h / 2.0))?);
        let k3 = (dz + k2.1 * (h / 2.0), f(t + h / 2.0, z + k2.0 * (h / 2.0), dz + k2.1 * (h / 2.0))?);
        let k4 = (dz + k3.1 * h, f(t + h, z + k3.0 * h, dz + k3.1 * h)?);
        z += (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
        dz += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
        if (step + 1) % stride == 0 {
            out.t.push(t0 + (step + 1) as f64 * h);
            out.z.push(z);
            out.dz.push(dz);
        }
    }
    Ok(out)
}

/// Integrates `z″ = f(t, z, z′)` with RK4, doubling the step count until the
/// endpoint changes by less than `1e-9` (relative to its size, floor 1).
pub fn integrate_second_order<F>(f: F, interval: (f64, f64), init: [Complex64; 2], samples: usize) -> Result<OdeSolution, SeparationError>
where
    F: Fn(f64, Complex64, Complex64) -> Result<Complex64, ExprError>,
{
    let samples = samples.max(1);
    let mut n = samples * 16;
    let mut prev = rk4(&f, interval.0, interval.1, init, n, samples)?;
    let mut change = f64::INFINITY;
    while n <= samples * (1 << 16) {
        n *= 2;
        let next = rk4(&f, interval.0, interval.1, init, n, samples)?;
        let a = *prev.z.last().unwrap();
        let b = *next.z.last().unwrap();
        change = (a - b).norm() / b.norm().max(1.0);
        prev = next;
        if change < 1e-9 {
            return Ok(prev);
        }
    }
    Err(SeparationError::StepFailure { steps: n, change })
}

/// Solves the decoupled equation of `which` along `interval` with the other
/// coordinate fixed, starting from `init = (z, z′)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_decoupled_rk4(
    scheme: &SchemeD5,
    which: Factor,
    mu: Complex64,
    nu: Complex64,
    fixed: f64,
    interval: (f64, f64),
    init: [Complex64; 2],
    samples: usize,
) -> Result<OdeSolution, SeparationError> {
    let f = |t: f64, z: Complex64, dz: Complex64| {
        let [p2, p1, p0] = scheme.decoupled_coefficients(which, mu, t, fixed)?;
        Ok((nu * z - p1 * dz - p0 * z) / p2)
    };
    integrate_second_order(f, interval, init, samples)
}

/// Largest relative eigen residuals `‖(R₁⁻¹𝔻 − μ)ψ‖/‖ψ‖` and
/// `‖(K₅ − ν)ψ‖/‖ψ‖` over `points`, with `K₅` the decoupling operator and
/// `‖·‖` the jet norm of `ψ`.
pub fn eigen_residuals(
    system: &DiracSystem,
    scheme: &SchemeD5,
    psi: &dyn SpinorField,
    mu: Complex64,
    nu: Complex64,
    points: &[(f64, f64)],
) -> Result<(f64, f64), OperatorError> {
    let red = ReducedDirac { r1: scheme.r1.clone(), params: scheme.params.clone() };
    let k5 = DecouplingOperator { scheme: scheme.clone() };
    let (mut a, mut b): (f64, f64) = (0.0, 0.0);
    for &pt in points {
        let local = system.local(pt, EVAL_ORDER)?;
        let j = psi.jet(pt, EVAL_ORDER)?;
        let n = jet_norm(&j);
        let r = red.apply(&local, &j)?;
        let k = k5.apply(&local, &j)?;
        let dev = |o: &Spinor, c: Complex64| {
            value_norm(&[o[0] - j[0].truncate(o[0].order()) * c, o[1] - j[1].truncate(o[1].order()) * c])
        };
        a = a.max(dev(&r, mu) / n);
        b = b.max(dev(&k, nu) / n);
    }
    Ok((a, b))
}

/// CSV grid `x,y,re_psi1,im_psi1,re_psi2,im_psi2` of a spinor field, rows
/// ordered with `x` outermost.
pub fn grid_csv(psi: &dyn SpinorField, xs: &[f64], ys: &[f64]) -> Result<String, OperatorError> {
    let mut out = String::from("x,y,re_psi1,im_psi1,re_psi2,im_psi2\n");
    for &x in xs {
        for &y in ys {
            let v = psi.jet((x, y), 0)?;
            let (a, b) = (v[0].value(), v[1].value());
            out.push_str(&format!("{x},{y},{},{},{},{}\n", a.re, a.im, b.re, b.im));
        }
    }
    Ok(out)
}

/// Completeness determinant `det ∂(log-derivatives)/∂(parameters)` by central
/// differences with step `h`.
pub fn completeness_determinant<F>(f: F, params: [Complex64; 4], h: f64) -> Complex64
where
    F: Fn(&[Complex64; 4]) -> [Complex64; 4],
{
    let mut m = Matrix4::<Complex64>::zeros();
    for col in 0..4 {
        let mut plus = params;
        let mut minus = params;
        plus[col] += h;
        minus[col] -= h;
        let (fp, fm) = (f(&plus), f(&minus));
        for row in 0..4 {
            m[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    m.determinant()
}
