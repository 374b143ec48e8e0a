//! The two-dimensional Clifford algebra `C(η)` and its spinor representations.
//!
//! Frame indices run over `a = 0, 1` with `η_ab = diag(1, η)`, where the scalar
//! `η = det η_ab` is `+1` for Riemannian and `-1` for Lorentzian signature. The
//! frame Levi-Civita symbol has `ε_01 = o` with orientation `o = ±1`, and frame
//! indices are raised with `η^{ab}`, so `ε^{ab} = η ε_ab`.
//!
//! Every 2×2 complex matrix is uniquely `s I + v_a γ^a + p γ`, with the
//! pseudoscalar `γ = ε_01 γ_0 γ_1`. In this basis the algebra closes through
//!
//! ```text
//! γ_a γ_b = η_ab I + ε_ab γ,   γ_c γ = −γ γ_c = η ε_ca γ^a,   γ² = −η I,
//! ```
//!
//! which is what [`Signature::mul`] implements without touching matrices.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 2×2 complex matrix, row major.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliffordError {
    #[error("change-of-basis matrix is singular (|det| = {0:e})")]
    SingularP(f64),
}

/// Field values the Clifford coefficients may take: plain numbers or jets.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Zero + From<Complex64>
{
}

impl<T> Scalar for T where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> + Zero + From<Complex64>
{
}

fn cs<T: Scalar>(v: f64) -> T {
    T::from(Complex64::new(v, 0.0))
}

/// Metric signature and orientation of the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    /// Determinant of `η_ab`: `+1` Riemannian, `-1` Lorentzian.
    pub eta: i8,
    /// The value of `ε_01`.
    pub orientation: i8,
}

impl Signature {
    pub const RIEMANNIAN: Signature = Signature { eta: 1, orientation: 1 };
    pub const LORENTZIAN: Signature = Signature { eta: -1, orientation: 1 };

    pub fn new(eta: i8, orientation: i8) -> Self {
        assert!(eta == 1 || eta == -1, "eta must be ±1");
        assert!(orientation == 1 || orientation == -1, "orientation must be ±1");
        Signature { eta, orientation }
    }

    pub fn eta(&self) -> f64 {
        self.eta as f64
    }

    pub fn orientation(&self) -> f64 {
        self.orientation as f64
    }

    /// `k = √(−η)`: `i` for Riemannian, `1` for Lorentzian signature.
    pub fn k(&self) -> Complex64 {
        if self.eta == 1 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    /// `η_ab`, which equals `η^{ab}`.
    pub fn metric(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => 1.0,
            (1, 1) => self.eta(),
            _ => 0.0,
        }
    }

    /// `ε_ab`.
    pub fn eps(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 1) => self.orientation(),
            (1, 0) => -self.orientation(),
            _ => 0.0,
        }
    }

    /// `ε^{ab} = η ε_ab`.
    pub fn eps_up(&self, a: usize, b: usize) -> f64 {
        self.eta() * self.eps(a, b)
    }

    /// `ε^a{}_b = η^{ac} ε_cb`.
    pub fn eps_mixed(&self, a: usize, b: usize) -> f64 {
        self.metric(a, a) * self.eps(a, b)
    }

    /// Product in the `{I, γ^a, γ}` basis.
    pub fn mul<T: Scalar>(&self, a: &CliffordElement<T>, b: &CliffordElement<T>) -> CliffordElement<T> {
        let eta = self.eta();
        let mut s = a.s * b.s - cs::<T>(eta) * a.p * b.p;
        let mut p = a.s * b.p + a.p * b.s;
        for i in 0..2 {
            for j in 0..2 {
                let g = self.metric(i, j);
                if g != 0.0 {
                    s = s + cs::<T>(g) * a.v[i] * b.v[j];
                }
                let e = self.eps_up(i, j);
                if e != 0.0 {
                    p = p + cs::<T>(e) * a.v[i] * b.v[j];
                }
            }
        }
        let mut v = [a.s * b.v[0] + b.s * a.v[0], a.s * b.v[1] + b.s * a.v[1]];
        for (d, vd) in v.iter_mut().enumerate() {
            for c in 0..2 {
                let e = self.eps_mixed(c, d);
                if e != 0.0 {
                    *vd = *vd + cs::<T>(eta * e) * (b.p * a.v[c] - a.p * b.v[c]);
                }
            }
        }
        CliffordElement { s, v, p }
    }

    /// Lowers (or raises) a frame vector index.
    pub fn lower<T: Scalar>(&self, v: [T; 2]) -> [T; 2] {
        [v[0], cs::<T>(self.eta()) * v[1]]
    }
}

/// `s I + v_a γ^a + p γ` with the vector index stored lowered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordElement<T> {
    pub s: T,
    pub v: [T; 2],
    pub p: T,
}

impl<T: Scalar> CliffordElement<T> {
    pub fn zero() -> Self {
        CliffordElement { s: T::zero(), v: [T::zero(); 2], p: T::zero() }
    }

    pub fn scalar(s: T) -> Self {
        CliffordElement { s, ..Self::zero() }
    }

    pub fn identity() -> Self {
        Self::scalar(cs(1.0))
    }

    /// `v_a γ^a` from lowered components.
    pub fn vector(v: [T; 2]) -> Self {
        CliffordElement { v, ..Self::zero() }
    }

    pub fn pseudo(p: T) -> Self {
        CliffordElement { p, ..Self::zero() }
    }

    /// The basis element `γ_a` (index down), i.e. `η_ab γ^b`.
    pub fn gamma_lower(sig: &Signature, a: usize) -> Self {
        let mut v = [T::zero(); 2];
        v[a] = cs(sig.metric(a, a));
        Self::vector(v)
    }

    /// The basis element `γ^a`.
    pub fn gamma_upper(a: usize) -> Self {
        let mut v = [T::zero(); 2];
        v[a] = cs(1.0);
        Self::vector(v)
    }

    pub fn scale(&self, f: T) -> Self {
        CliffordElement { s: f * self.s, v: [f * self.v[0], f * self.v[1]], p: f * self.p }
    }

    pub fn map<U>(&self, mut f: impl FnMut(T) -> U) -> CliffordElement<U> {
        CliffordElement { s: f(self.s), v: [f(self.v[0]), f(self.v[1])], p: f(self.p) }
    }
}

impl<T: Scalar> Add for CliffordElement<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CliffordElement { s: self.s + o.s, v: [self.v[0] + o.v[0], self.v[1] + o.v[1]], p: self.p + o.p }
    }
}

impl<T: Scalar> Sub for CliffordElement<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CliffordElement { s: self.s - o.s, v: [self.v[0] - o.v[0], self.v[1] - o.v[1]], p: self.p - o.p }
    }
}

impl<T: Scalar> Neg for CliffordElement<T> {
    type Output = Self;
    fn neg(self) -> Self {
        CliffordElement { s: -self.s, v: [-self.v[0], -self.v[1]], p: -self.p }
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn mat_scale(a: &Mat2, s: Complex64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn mat_sub(a: &Mat2, b: &Mat2) -> Mat2 {
    mat_add(a, &mat_scale(b, Complex64::new(-1.0, 0.0)))
}

pub fn mat_identity() -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::zero();
    [[one, zero], [zero, one]]
}

pub fn mat_det(a: &Mat2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat_trace(a: &Mat2) -> Complex64 {
    a[0][0] + a[1][1]
}

/// Inverse, or `None` when the determinant vanishes.
pub fn mat_inv(a: &Mat2) -> Option<Mat2> {
    let det = mat_det(a);
    if det.norm() == 0.0 {
        return None;
    }
    let inv = det.inv();
    Some([[a[1][1] * inv, -a[0][1] * inv], [-a[1][0] * inv, a[0][0] * inv]])
}

/// Largest entry modulus of a matrix difference.
pub fn mat_dist(a: &Mat2, b: &Mat2) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// Concrete Dirac matrices `γ^0`, `γ^1` and `γ` for a signature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracRep {
    pub sig: Signature,
    /// `γ^a` with the frame index up.
    pub gamma_up: [Mat2; 2],
    pub gamma: Mat2,
}

impl DiracRep {
    /// The standard representation `γ^0 = diag(1, −1)`, `γ^1 = [[0, −k], [k, 0]]`.
    pub fn dirac(sig: Signature) -> Self {
        let k = sig.k();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::zero();
        let g0 = [[one, zero], [zero, -one]];
        let g1 = [[zero, -k], [k, zero]];
        let lower1 = mat_scale(&g1, Complex64::new(sig.eta(), 0.0));
        let gamma = mat_scale(&mat_mul(&g0, &lower1), Complex64::new(sig.orientation(), 0.0));
        DiracRep { sig, gamma_up: [g0, g1], gamma }
    }

    /// `γ_a = η_ab γ^b`.
    pub fn gamma_down(&self, a: usize) -> Mat2 {
        mat_scale(&self.gamma_up[a], Complex64::new(self.sig.metric(a, a), 0.0))
    }

    /// The representation `P γ P⁻¹`, acting on spinors `ψ' = P ψ`.
    pub fn conjugate(&self, p: &Mat2) -> Result<DiracRep, CliffordError> {
        let det = mat_det(p).norm();
        if det < 1e-14 {
            return Err(CliffordError::SingularP(det));
        }
        let pinv = mat_inv(p).ok_or(CliffordError::SingularP(det))?;
        let conj = |m: &Mat2| mat_mul(&mat_mul(p, m), &pinv);
        Ok(DiracRep {
            sig: self.sig,
            gamma_up: [conj(&self.gamma_up[0]), conj(&self.gamma_up[1])],
            gamma: conj(&self.gamma),
        })
    }

    pub fn materialize(&self, e: &CliffordElement<Complex64>) -> Mat2 {
        let mut m = mat_scale(&mat_identity(), e.s);
        m = mat_add(&m, &mat_scale(&self.gamma_up[0], e.v[0]));
        m = mat_add(&m, &mat_scale(&self.gamma_up[1], e.v[1]));
        mat_add(&m, &mat_scale(&self.gamma, e.p))
    }

    /// Unique coefficients of `m` in the `{I, γ^a, γ}` basis, from traces.
    pub fn decompose(&self, m: &Mat2) -> CliffordElement<Complex64> {
        let half = Complex64::new(0.5, 0.0);
        CliffordElement {
            s: mat_trace(m) * half,
            v: [
                mat_trace(&mat_mul(m, &self.gamma_down(0))) * half,
                mat_trace(&mat_mul(m, &self.gamma_down(1))) * half,
            ],
            p: mat_trace(&mat_mul(m, &self.gamma)) * half * (-self.sig.eta()),
        }
    }

    /// `E ψ` for a Clifford element with field-valued coefficients.
    pub fn apply<T: Scalar>(&self, e: &CliffordElement<T>, psi: &[T; 2]) -> [T; 2] {
        let mut out = [T::zero(); 2];
        for (i, slot) in out.iter_mut().enumerate() {
            for (j, pj) in psi.iter().enumerate() {
                let mut entry = if i == j { e.s } else { T::zero() };
                for a in 0..2 {
                    let g = self.gamma_up[a][i][j];
                    if !g.is_zero() {
                        entry = entry + T::from(g) * e.v[a];
                    }
                }
                let g = self.gamma[i][j];
                if !g.is_zero() {
                    entry = entry + T::from(g) * e.p;
                }
                *slot = *slot + entry * *pj;
            }
        }
        out
    }

    /// `γ_ab = ½ [γ_a, γ_b]`.
    pub fn gamma_ab(&self, a: usize, b: usize) -> Mat2 {
        let ga = self.gamma_down(a);
        let gb = self.gamma_down(b);
        mat_scale(&mat_sub(&mat_mul(&ga, &gb), &mat_mul(&gb, &ga)), Complex64::new(0.5, 0.0))
    }
}

/// Maximal deviation of each algebraic identity of the representation.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub clifford_relation: f64,
    pub pseudoscalar_definition: f64,
    pub pseudoscalar_square: f64,
    pub vector_pseudoscalar: f64,
    pub vector_product: f64,
    pub bivector_vector_commutator: f64,
    pub bivector_commutator: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        [
            self.clifford_relation,
            self.pseudoscalar_definition,
            self.pseudoscalar_square,
            self.vector_pseudoscalar,
            self.vector_product,
            self.bivector_vector_commutator,
            self.bivector_commutator,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates both sides of every product identity of the algebra in `rep`.
pub fn commutator_identity_check(rep: &DiracRep) -> IdentityReport {
    let sig = rep.sig;
    let c = |v: f64| Complex64::new(v, 0.0);
    let id = mat_identity();
    let g = |a| rep.gamma_down(a);
    let comm = |a: &Mat2, b: &Mat2| mat_sub(&mat_mul(a, b), &mat_mul(b, a));
    let up = |a: usize| rep.gamma_up[a];

    let mut r = IdentityReport {
        clifford_relation: 0.0,
        pseudoscalar_definition: mat_dist(&rep.gamma, &mat_scale(&mat_mul(&g(0), &g(1)), c(sig.orientation()))),
        pseudoscalar_square: mat_dist(&mat_mul(&rep.gamma, &rep.gamma), &mat_scale(&id, c(-sig.eta()))),
        vector_pseudoscalar: 0.0,
        vector_product: 0.0,
        bivector_vector_commutator: 0.0,
        bivector_commutator: 0.0,
    };
    for a in 0..2 {
        for b in 0..2 {
            let anti = mat_add(&mat_mul(&g(a), &g(b)), &mat_mul(&g(b), &g(a)));
            r.clifford_relation = r.clifford_relation.max(mat_dist(&anti, &mat_scale(&id, c(2.0 * sig.metric(a, b)))));
            let rhs = mat_add(&mat_scale(&id, c(sig.metric(a, b))), &mat_scale(&rep.gamma, c(sig.eps(a, b))));
            r.vector_product = r.vector_product.max(mat_dist(&mat_mul(&g(a), &g(b)), &rhs));
        }
    }
    for cc in 0..2 {
        let mut rhs = [[Complex64::zero(); 2]; 2];
        for a in 0..2 {
            rhs = mat_add(&rhs, &mat_scale(&up(a), c(sig.eta() * sig.eps(cc, a))));
        }
        let left = mat_mul(&g(cc), &rep.gamma);
        let right = mat_scale(&mat_mul(&rep.gamma, &g(cc)), c(-1.0));
        r.vector_pseudoscalar = r.vector_pseudoscalar.max(mat_dist(&left, &rhs)).max(mat_dist(&right, &rhs));
    }
    for cc in 0..2 {
        for d in 0..2 {
            let gcd = rep.gamma_ab(cc, d);
            for a in 0..2 {
                let rhs = mat_sub(
                    &mat_scale(&g(cc), c(2.0 * sig.metric(a, d))),
                    &mat_scale(&g(d), c(2.0 * sig.metric(a, cc))),
                );
                r.bivector_vector_commutator = r.bivector_vector_commutator.max(mat_dist(&comm(&gcd, &g(a)), &rhs));
                for b in 0..2 {
                    let terms = [
                        (2.0 * sig.metric(cc, b), rep.gamma_ab(a, d)),
                        (2.0 * sig.metric(a, cc), rep.gamma_ab(d, b)),
                        (-2.0 * sig.metric(d, b), rep.gamma_ab(a, cc)),
                        (-2.0 * sig.metric(d, a), rep.gamma_ab(cc, b)),
                    ];
                    let rhs = terms
                        .iter()
                        .fold([[Complex64::zero(); 2]; 2], |acc, (f, m)| mat_add(&acc, &mat_scale(m, c(*f))));
                    r.bivector_commutator =
                        r.bivector_commutator.max(mat_dist(&comm(&gcd, &rep.gamma_ab(a, b)), &rhs));
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigs() -> Vec<Signature> {
        let mut v = Vec::new();
        for eta in [1, -1] {
            for o in [1, -1] {
                v.push(Signature::new(eta, o));
            }
        }
        v
    }

    #[test]
    fn lorentzian_matrices() {
        let rep = DiracRep::dirac(Signature::LORENTZIAN);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::zero();
        assert_eq!(rep.gamma_up[1], [[zero, -one], [one, zero]]);
        assert_eq!(rep.gamma, [[zero, one], [one, zero]]);
    }

    #[test]
    fn riemannian_pseudoscalar_matches_display() {
        let rep = DiracRep::dirac(Signature::RIEMANNIAN);
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::zero();
        assert_eq!(rep.gamma, [[zero, -i], [-i, zero]]);
    }

    #[test]
    fn identities_exact_for_dirac_rep() {
        for sig in sigs() {
            let report = commutator_identity_check(&DiracRep::dirac(sig));
            assert_eq!(report.max(), 0.0, "{sig:?}: {report:?}");
        }
    }

    #[test]
    fn basis_products() {
        for sig in sigs() {
            let g: CliffordElement<Complex64> = CliffordElement::pseudo(Complex64::new(1.0, 0.0));
            let sq = sig.mul(&g, &g);
            assert_eq!(sq, CliffordElement::scalar(Complex64::new(-sig.eta(), 0.0)));
            let g0 = CliffordElement::gamma_lower(&sig, 0);
            let g1 = CliffordElement::gamma_lower(&sig, 1);
            assert_eq!(sig.mul(&g0, &g1), CliffordElement::pseudo(Complex64::new(sig.eps(0, 1), 0.0)));
        }
    }

    #[test]
    fn decompose_basis() {
        let rep = DiracRep::dirac(Signature::LORENTZIAN);
        let e = rep.decompose(&mat_identity());
        assert_eq!(e, CliffordElement::identity());
        let e = rep.decompose(&rep.gamma_up[0]);
        assert_eq!(e, CliffordElement::gamma_upper(0));
    }

    #[test]
    fn conjugation_rejects_singular() {
        let rep = DiracRep::dirac(Signature::RIEMANNIAN);
        let one = Complex64::new(1.0, 0.0);
        assert!(rep.conjugate(&[[one, one], [one, one]]).is_err());
        let diag = [[one, Complex64::zero()], [Complex64::zero(), Complex64::new(0.0, 1.0)]];
        let conj = rep.conjugate(&diag).unwrap();
        assert!(commutator_identity_check(&conj).max() < 1e-15);
    }
}
