//! External fields coupled to the spinor: an electromagnetic potential `A_μ`
//! with charge `q`, a scalar potential `V` and a pseudoscalar potential `V̂`.
//!
//! The matrix potential is `𝐕 = V I + V_a γ^a + V̂ γ`. Since `i γ^a D_a`
//! contributes `q A_a γ^a`, a vector part `V_a` is indistinguishable from a
//! shifted electromagnetic potential `q Ã_a = q A_a − V_a`; it is absorbed on
//! evaluation so that downstream code only sees `V I + V̂ γ`.

use num_complex::Complex64;
use thiserror::Error;

use crate::clifford::CliffordElement;
use crate::expr::{Expr, ExprError, Params};
use crate::geometry::GeometryJet;
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldsError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("a vector potential can only be absorbed into A when the charge is non-zero")]
    ChargeRequired,
}

/// External field data as expressions over the chart.
#[derive(Debug, Clone)]
pub struct ExternalFields {
    /// Coordinate components `A_x`, `A_y`.
    pub a: [Expr; 2],
    pub q: Complex64,
    pub v: Expr,
    pub vhat: Expr,
    /// Optional vector potential, frame components `V_a` (index down).
    pub va: Option<[Expr; 2]>,
    pub params: Params,
}

impl ExternalFields {
    /// No fields at all.
    pub fn free() -> Self {
        ExternalFields {
            a: [Expr::zero(), Expr::zero()],
            q: Complex64::new(1.0, 0.0),
            v: Expr::zero(),
            vhat: Expr::zero(),
            va: None,
            params: Params::new(),
        }
    }

    /// Field jets at the geometry's expansion point.
    pub fn at(&self, geo: &GeometryJet, order: usize) -> Result<FieldJet, FieldsError> {
        let p = geo.point;
        let mut qa = [
            self.a[0].eval_jet(p, &self.params, order)? * self.q,
            self.a[1].eval_jet(p, &self.params, order)? * self.q,
        ];
        if let Some(va) = &self.va {
            if self.q.norm() == 0.0 {
                return Err(FieldsError::ChargeRequired);
            }
            let va = [va[0].eval_jet(p, &self.params, order)?, va[1].eval_jet(p, &self.params, order)?];
            for (mu, slot) in qa.iter_mut().enumerate() {
                *slot -= geo.coframe[0][mu] * va[0] + geo.coframe[1][mu] * va[1];
            }
        }
        let v = self.v.eval_jet(p, &self.params, order)?;
        let vhat = self.vhat.eval_jet(p, &self.params, order)?;
        let qf_xy = qa[1].d(0) - qa[0].d(1);
        let qf = geo.frame_two_form(&qf_xy);
        Ok(FieldJet { qa, v, vhat, qf_xy, qf, q: self.q })
    }
}

/// External fields as jets about a point, after vector-potential absorption.
#[derive(Debug, Clone)]
pub struct FieldJet {
    /// `q A_μ` (coordinate components).
    pub qa: [Jet; 2],
    pub v: Jet,
    pub vhat: Jet,
    /// `q F_xy` with `F_μν = ∂_μ A_ν − ∂_ν A_μ`.
    pub qf_xy: Jet,
    /// `q F` where `F_ab = F ε_ab` in frame indices.
    pub qf: Jet,
    pub q: Complex64,
}

impl FieldJet {
    /// `𝐕 = V I + V̂ γ`.
    pub fn matrix_potential(&self) -> CliffordElement<Jet> {
        CliffordElement { s: self.v, v: [Jet::zero_like(&self.v); 2], p: self.vhat }
    }

    /// The frame scalar `F` (requires `q ≠ 0`).
    pub fn field_strength(&self) -> Option<Jet> {
        if self.q.norm() == 0.0 {
            None
        } else {
            Some(self.qf / self.q)
        }
    }
}
