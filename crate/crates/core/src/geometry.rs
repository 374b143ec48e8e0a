//! Spin frames and the geometry they induce.
//!
//! A chart carries a spin frame `e_a^μ` (`frame[a][μ]`). Its inverse `e^a_μ`
//! induces the metric `g_μν = e^a_μ η_ab e^b_ν`, the Levi-Civita connection
//! `Γ^α_βμ` and the spin connection
//!
//! ```text
//! Γ^{ab}_μ = e^a_α (Γ^α_βμ e^{bβ} + ∂_μ e^{bα}),
//! ```
//!
//! which makes the frame parallel: `∂_μ e_a^ν + Γ^ν_λμ e_a^λ − Γ^b_aμ e_b^ν = 0`
//! with `Γ^b_aμ = Γ^{bc}_μ η_ca`. In two dimensions `Γ^{ab}_μ` has a single
//! independent component `Γ^{01}_μ`, so the curvature is abelian,
//! `R^{01}_μν = ∂_μ Γ^{01}_ν − ∂_ν Γ^{01}_μ`, and the scalar curvature is the
//! full contraction `R = R^{ab}_ab = 2 R^{01}_01`. Since `ε^{ab} ε_ab = 2η`, this
//! means `R^{ab}_cd = ½ η R ε^{ab} ε_cd`; in Lorentzian signature the
//! normalization `½ R ε^{ab} ε_cd` would flip the sign of every curvature term
//! in the symmetry-operator coefficients.
//!
//! Everything is evaluated as Taylor jets about one point. Each derivative
//! costs one order, so a frame evaluated at order `N` yields connections at
//! order `N − 1` and curvature at order `N − 2`.

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::clifford::{DiracRep, Signature};
use crate::expr::{Expr, ExprError, Params};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("singular frame at ({x}, {y}): |det e| = {det:e}")]
    SingularFrame { x: f64, y: f64, det: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Rectangle `[x0, x1] × [y0, y1]` of admissible sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl SampleBox {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        SampleBox { x, y }
    }

    /// Shrinks the box by `margin` on every side.
    pub fn shrink(&self, margin: f64) -> Self {
        SampleBox { x: (self.x.0 + margin, self.x.1 - margin), y: (self.y.0 + margin, self.y.1 - margin) }
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x.0 && p.0 <= self.x.1 && p.1 >= self.y.0 && p.1 <= self.y.1
    }
}

/// A chart with a spin frame given by expressions.
#[derive(Debug, Clone)]
pub struct SpinManifold {
    pub sig: Signature,
    /// `frame[a][μ] = e_a^μ`.
    pub frame: [[Expr; 2]; 2],
    pub chart_name: String,
    pub sample_box: SampleBox,
    pub params: Params,
}

impl SpinManifold {
    pub fn new(sig: Signature, frame: [[Expr; 2]; 2], chart_name: &str, sample_box: SampleBox, params: Params) -> Self {
        SpinManifold { sig, frame, chart_name: chart_name.to_string(), sample_box, params }
    }

    /// All geometric data at `point` with the frame expanded to `order`.
    pub fn geometry_at(&self, point: (f64, f64), order: usize) -> Result<GeometryJet, GeometryError> {
        assert!(order >= 2, "geometry needs frame jets of order at least 2");
        let mut frame = [[Jet::zeros(order); 2]; 2];
        for (a, row) in frame.iter_mut().enumerate() {
            for (mu, slot) in row.iter_mut().enumerate() {
                *slot = self.frame[a][mu].eval_jet(point, &self.params, order)?;
            }
        }
        GeometryJet::from_frame(self.sig, point, frame)
    }
}

/// Geometric quantities as jets about a single point.
#[derive(Debug, Clone)]
pub struct GeometryJet {
    pub sig: Signature,
    pub point: (f64, f64),
    /// `e_a^μ`, indexed `[a][μ]`.
    pub frame: [[Jet; 2]; 2],
    /// `e^a_μ`, indexed `[a][μ]`.
    pub coframe: [[Jet; 2]; 2],
    pub metric: [[Jet; 2]; 2],
    pub metric_inv: [[Jet; 2]; 2],
    /// `Γ^α_βμ`, indexed `[α][β][μ]`.
    pub christoffel: [[[Jet; 2]; 2]; 2],
    /// `Γ^{ab}_μ`, indexed `[a][b][μ]`.
    pub spin: [[[Jet; 2]; 2]; 2],
    /// `R^{01}_xy`.
    pub curvature: Jet,
    /// Scalar curvature `R`.
    pub scalar_curvature: Jet,
    /// `det e_a^μ`.
    pub frame_det: Jet,
}

fn det2(m: &[[Jet; 2]; 2]) -> Jet {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl GeometryJet {
    pub fn from_frame(sig: Signature, point: (f64, f64), frame: [[Jet; 2]; 2]) -> Result<Self, GeometryError> {
        let det = det2(&frame);
        if det.value().norm() < 1e-10 || !det.value().norm().is_finite() {
            return Err(GeometryError::SingularFrame { x: point.0, y: point.1, det: det.value().norm() });
        }
        let inv_det = det.recip();
        // coframe = (E⁻¹)ᵀ for E[a][μ] = e_a^μ
        let coframe = [
            [frame[1][1] * inv_det, -frame[1][0] * inv_det],
            [-frame[0][1] * inv_det, frame[0][0] * inv_det],
        ];
        let eta = |a: usize| Complex64::new(sig.metric(a, a), 0.0);
        let mut metric = [[Jet::zero(); 2]; 2];
        let mut metric_inv = [[Jet::zero(); 2]; 2];
        for mu in 0..2 {
            for nu in 0..2 {
                metric[mu][nu] = (0..2).map(|a| coframe[a][mu] * coframe[a][nu] * eta(a)).sum();
                metric_inv[mu][nu] = (0..2).map(|a| frame[a][mu] * frame[a][nu] * eta(a)).sum();
            }
        }
        let dg: [[[Jet; 2]; 2]; 2] =
            std::array::from_fn(|l| std::array::from_fn(|m| std::array::from_fn(|b| metric[l][m].d(b))));
        let mut christoffel = [[[Jet::zero(); 2]; 2]; 2];
        for (alpha, block) in christoffel.iter_mut().enumerate() {
            for (beta, row) in block.iter_mut().enumerate() {
                for (mu, slot) in row.iter_mut().enumerate() {
                    *slot = (0..2)
                        .map(|l| metric_inv[alpha][l] * (dg[l][mu][beta] + dg[l][beta][mu] - dg[beta][mu][l]))
                        .sum::<Jet>()
                        * 0.5;
                }
            }
        }
        let mut spin = [[[Jet::zero(); 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for mu in 0..2 {
                    let mut acc = Jet::zero();
                    for alpha in 0..2 {
                        let mut inner = frame[b][alpha].d(mu);
                        for beta in 0..2 {
                            inner += christoffel[alpha][beta][mu] * frame[b][beta];
                        }
                        acc += coframe[a][alpha] * inner;
                    }
                    spin[a][b][mu] = acc * eta(b);
                }
            }
        }
        let curvature = spin[0][1][1].d(0) - spin[0][1][0].d(1);
        let scalar_curvature = curvature * det * 2.0;
        Ok(GeometryJet {
            sig,
            point,
            frame,
            coframe,
            metric,
            metric_inv,
            christoffel,
            spin,
            curvature,
            scalar_curvature,
            frame_det: det,
        })
    }

    /// `Γ^a_bμ = Γ^{ac}_μ η_cb`.
    pub fn spin_mixed(&self, a: usize, b: usize, mu: usize) -> Jet {
        self.spin[a][b][mu] * self.sig.metric(b, b)
    }

    /// Frame derivative `e_a^μ ∂_μ f`.
    pub fn frame_d(&self, f: &Jet, a: usize) -> Jet {
        self.frame[a][0] * f.d(0) + self.frame[a][1] * f.d(1)
    }

    /// `R^{01}_{ab}` in frame indices.
    pub fn frame_curvature(&self) -> Jet {
        self.curvature * self.frame_det
    }

    /// Coordinate Levi-Civita tensor `ε_μν = e^a_μ e^b_ν ε_ab`, component `ε_xy`.
    pub fn eps_coord_xy(&self) -> Jet {
        det2(&self.coframe) * self.sig.orientation()
    }

    /// Converts coordinate covector components `w_μ` to frame components `w_a`.
    pub fn to_frame_covector(&self, w: &[Jet; 2]) -> [Jet; 2] {
        std::array::from_fn(|a| self.frame[a][0] * w[0] + self.frame[a][1] * w[1])
    }

    /// Frame-index scalar `F` with `F_ab = F ε_ab`, from `F_xy`.
    pub fn frame_two_form(&self, f_xy: &Jet) -> Jet {
        *f_xy * self.frame_det * self.sig.orientation()
    }

    /// Covariant derivative `∇^c T^{a…}` of a frame tensor with upper indices;
    /// the derivative index is appended last and raised.
    pub fn grad(&self, t: &FrameTensor) -> FrameTensor {
        let rank = t.rank;
        let mut out = FrameTensor::zeros(rank + 1);
        let eta = self.sig;
        for idx in 0..(1 << rank) {
            let mut coord = [Jet::zero(), Jet::zero()];
            for (mu, slot) in coord.iter_mut().enumerate() {
                let mut acc = t.c[idx].d(mu);
                for slot_k in 0..rank {
                    let a = t.index_at(idx, slot_k);
                    for d in 0..2 {
                        let src = FrameTensor::replace(idx, rank, slot_k, d);
                        acc += self.spin_mixed(a, d, mu) * t.c[src];
                    }
                }
                *slot = acc;
            }
            for c in 0..2 {
                let val = (self.frame[c][0] * coord[0] + self.frame[c][1] * coord[1]) * eta.metric(c, c);
                out.c[(idx << 1) | c] = val;
            }
        }
        out
    }

    /// `D_c T_{a…}` for a spinor-valued frame tensor with lower indices; the
    /// derivative index becomes the first index of the result. `qa[μ] = q A_μ`.
    pub fn spinor_cov(&self, rep: &DiracRep, t: &SpinorTensor, qa: &[Jet; 2]) -> SpinorTensor {
        let rank = t.rank;
        let mut out = SpinorTensor::zeros(rank + 1);
        let half_o = Complex64::new(0.5 * self.sig.orientation(), 0.0);
        let i = Complex64::new(0.0, 1.0);
        for idx in 0..(1 << rank) {
            let mut coord = [[Jet::zero(); 2]; 2];
            for (mu, slot) in coord.iter_mut().enumerate() {
                let psi = t.c[idx];
                let g = rep.gamma;
                let spin_term = self.spin[0][1][mu] * half_o;
                let mut acc: [Jet; 2] = std::array::from_fn(|r| {
                    psi[r].d(mu) + spin_term * (g[r][0] * psi[0] + g[r][1] * psi[1]) - qa[mu] * psi[r] * i
                });
                for slot_k in 0..rank {
                    let a = t.index_at(idx, slot_k);
                    for d in 0..2 {
                        let src = FrameTensor::replace(idx, rank, slot_k, d);
                        let w = self.spin_mixed(d, a, mu);
                        for r in 0..2 {
                            acc[r] -= w * t.c[src][r];
                        }
                    }
                }
                *slot = acc;
            }
            for c in 0..2 {
                let val: [Jet; 2] = std::array::from_fn(|r| self.frame[c][0] * coord[0][r] + self.frame[c][1] * coord[1][r]);
                out.c[(c << rank) | idx] = val;
            }
        }
        out
    }

    /// Coordinate metricity `∇_λ g_μν = ∂_λ g_μν − Γ^σ_λμ g_σν − Γ^σ_λν g_μσ`
    /// at the expansion point: the largest component modulus and the largest
    /// summand modulus.
    pub fn metricity(&self) -> (f64, f64) {
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for l in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let mut terms = vec![self.metric[m][n].d(l).value()];
                    for s in 0..2 {
                        terms.push(-(self.christoffel[s][l][m].value() * self.metric[s][n].value()));
                        terms.push(-(self.christoffel[s][l][n].value() * self.metric[m][s].value()));
                    }
                    let sum: Complex64 = terms.iter().sum();
                    worst = worst.max(sum.norm());
                    scale = terms.iter().fold(scale, |acc, t| acc.max(t.norm()));
                }
            }
        }
        (worst, scale)
    }

    /// Symmetrized covariant derivative `∇^{(a} v^{b)}` of a frame vector.
    pub fn killing_vector_residual(&self, v: &FrameTensor) -> FrameTensor {
        self.grad(v).symmetrize()
    }

    /// Symmetrized covariant derivative `∇^{(c} e^{ab)}` of a symmetric frame tensor.
    pub fn killing_tensor_residual(&self, e: &FrameTensor) -> FrameTensor {
        self.grad(e).symmetrize()
    }
}

/// Frame tensor with all indices up; component `(a₁, …, a_r)` lives at the
/// bit pattern `a₁ … a_r` (most significant first).
#[derive(Debug, Clone)]
pub struct FrameTensor {
    pub rank: usize,
    pub c: Vec<Jet>,
}

impl FrameTensor {
    pub fn zeros(rank: usize) -> Self {
        FrameTensor { rank, c: vec![Jet::zero(); 1 << rank] }
    }

    pub fn scalar(f: Jet) -> Self {
        FrameTensor { rank: 0, c: vec![f] }
    }

    pub fn vector(v: [Jet; 2]) -> Self {
        FrameTensor { rank: 1, c: v.to_vec() }
    }

    pub fn matrix(m: [[Jet; 2]; 2]) -> Self {
        FrameTensor { rank: 2, c: vec![m[0][0], m[0][1], m[1][0], m[1][1]] }
    }

    pub fn offset(indices: &[usize]) -> usize {
        indices.iter().fold(0, |acc, &i| (acc << 1) | i)
    }

    pub fn get(&self, indices: &[usize]) -> Jet {
        assert_eq!(indices.len(), self.rank);
        self.c[Self::offset(indices)]
    }

    fn index_at(&self, idx: usize, slot: usize) -> usize {
        (idx >> (self.rank - 1 - slot)) & 1
    }

    fn replace(idx: usize, rank: usize, slot: usize, value: usize) -> usize {
        let bit = rank - 1 - slot;
        (idx & !(1 << bit)) | (value << bit)
    }

    /// Average over all index permutations.
    pub fn symmetrize(&self) -> FrameTensor {
        let rank = self.rank;
        let perms = permutations(rank);
        let norm = 1.0 / perms.len() as f64;
        let mut out = FrameTensor::zeros(rank);
        for idx in 0..(1 << rank) {
            let digits: Vec<usize> = (0..rank).map(|k| self.index_at(idx, k)).collect();
            let mut acc = Jet::zero();
            for p in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| digits[k]).collect();
                acc += self.c[Self::offset(&permuted)];
            }
            out.c[idx] = acc * norm;
        }
        out
    }

    /// Largest modulus over components of the value at the point.
    pub fn max_value(&self) -> f64 {
        self.c.iter().map(|j| j.value().norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &FrameTensor) -> FrameTensor {
        assert_eq!(self.rank, other.rank);
        FrameTensor { rank: self.rank, c: self.c.iter().zip(&other.c).map(|(a, b)| *a - *b).collect() }
    }

    pub fn scale(&self, f: Complex64) -> FrameTensor {
        FrameTensor { rank: self.rank, c: self.c.iter().map(|a| *a * f).collect() }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Spinor-valued frame tensor with lower indices, laid out like [`FrameTensor`].
#[derive(Debug, Clone)]
pub struct SpinorTensor {
    pub rank: usize,
    pub c: Vec<[Jet; 2]>,
}

impl SpinorTensor {
    pub fn zeros(rank: usize) -> Self {
        SpinorTensor { rank, c: vec![[Jet::zero(); 2]; 1 << rank] }
    }

    pub fn spinor(psi: [Jet; 2]) -> Self {
        SpinorTensor { rank: 0, c: vec![psi] }
    }

    fn index_at(&self, idx: usize, slot: usize) -> usize {
        (idx >> (self.rank - 1 - slot)) & 1
    }

    pub fn get(&self, indices: &[usize]) -> [Jet; 2] {
        assert_eq!(indices.len(), self.rank);
        self.c[FrameTensor::offset(indices)]
    }
}

/// Value of a spinor jet pair at the expansion point.
pub fn spinor_value(psi: &[Jet; 2]) -> [Complex64; 2] {
    [psi[0].value(), psi[1].value()]
}

/// Euclidean norm of a spinor value.
pub fn spinor_norm(psi: &[Complex64; 2]) -> f64 {
    (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn manifold(sig: Signature, e: [[&str; 2]; 2]) -> SpinManifold {
        let p = |s: &str| parse(s, &[]).unwrap();
        SpinManifold::new(
            sig,
            [[p(e[0][0]), p(e[0][1])], [p(e[1][0]), p(e[1][1])]],
            "test",
            SampleBox::new((-1.0, 1.0), (0.2, 2.0)),
            Params::new(),
        )
    }

    #[test]
    fn flat_cartesian_has_no_connection() {
        let m = manifold(Signature::RIEMANNIAN, [["1", "0"], ["0", "1"]]);
        let g = m.geometry_at((0.3, 0.5), 4).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for mu in 0..2 {
                    assert!(g.christoffel[a][b][mu].is_zero());
                    assert!(g.spin[a][b][mu].is_zero());
                }
            }
        }
        assert!(g.scalar_curvature.is_zero());
    }

    #[test]
    fn polar_christoffel_symbols() {
        // g_xx = y², g_yy = 1 with e_0 = ∂_y, e_1 = (1/y) ∂_x
        let m = manifold(Signature::RIEMANNIAN, [["0", "1"], ["1/y", "0"]]);
        let g = m.geometry_at((0.1, 1.7), 4).unwrap();
        let y = 1.7;
        assert!((g.christoffel[0][0][1].value() - 1.0 / y).norm() < 1e-14);
        assert!((g.christoffel[1][0][0].value() + y).norm() < 1e-14);
        assert!(g.scalar_curvature.value().norm() < 1e-14);
    }

    #[test]
    fn sphere_scalar_curvature_is_two() {
        let m = manifold(Signature::RIEMANNIAN, [["0", "1"], ["1/sin(y)", "0"]]);
        for y in [0.4, 1.1, 2.5] {
            let g = m.geometry_at((0.2, y), 4).unwrap();
            assert!((g.scalar_curvature.value() - 2.0).norm() < 1e-12, "{}", g.scalar_curvature.value());
        }
    }

    #[test]
    fn spin_connection_antisymmetric() {
        let m = manifold(Signature::LORENTZIAN, [["exp(-y)", "0.1*x"], ["0.2*y", "exp(-y)*(1+x^2)"]]);
        let g = m.geometry_at((0.3, 0.4), 4).unwrap();
        for mu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let s = g.spin[a][b][mu] + g.spin[b][a][mu];
                    assert!(s.norm_inf() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn singular_frame_rejected() {
        let m = manifold(Signature::RIEMANNIAN, [["y", "0"], ["0", "1"]]);
        assert!(matches!(m.geometry_at((0.0, 0.0), 3), Err(GeometryError::SingularFrame { .. })));
    }

    #[test]
    fn symmetrize_rank_three() {
        let mut t = FrameTensor::zeros(3);
        t.c[FrameTensor::offset(&[0, 0, 1])] = Jet::real(3.0, 2);
        let s = t.symmetrize();
        assert!((s.get(&[0, 1, 0]).value() - 1.0).norm() < 1e-15);
        assert!((s.get(&[1, 0, 0]).value() - 1.0).norm() < 1e-15);
    }
}
