//! Truncated bivariate Taylor jets over ℂ.
//!
//! A [`Jet`] holds the Taylor coefficients of a complex field in the two chart
//! coordinates `(x, y)` about a fixed expansion point, truncated at a total
//! degree (`order`). Arithmetic truncates to the smaller order of its operands,
//! and differentiation lowers the order by one, so every derived quantity
//! carries exactly the derivative depth it legitimately owns.
//!
//! Coefficients are stored normalized, `c[i,j] = ∂ₓⁱ∂ᵧʲ f / (i! j!)`, so the
//! product is plain polynomial multiplication. [`Jet3`] is the
//! partial-derivative view (value, gradient, Hessian, third partials) used at
//! the public evaluation boundary.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_traits::{One, Zero};

/// Highest total derivative degree a jet can carry.
pub const MAX_ORDER: usize = 5;
const NCOEF: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const fn count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

const EXPONENTS: [(usize, usize); NCOEF] = {
    let mut table = [(0usize, 0usize); NCOEF];
    let mut d = 0;
    while d <= MAX_ORDER {
        let mut j = 0;
        while j <= d {
            table[index(d - j, j)] = (d - j, j);
            j += 1;
        }
        d += 1;
    }
    table
};

const FACTORIAL: [f64; MAX_ORDER + 1] = {
    let mut f = [1.0; MAX_ORDER + 1];
    let mut k = 1;
    while k <= MAX_ORDER {
        f[k] = f[k - 1] * k as f64;
        k += 1;
    }
    f
};

/// Truncated Taylor expansion of a complex field about a point.
#[derive(Clone, Copy)]
pub struct Jet {
    order: u8,
    c: [Complex64; NCOEF],
}

impl Jet {
    pub fn constant(value: Complex64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [Complex64::new(0.0, 0.0); NCOEF];
        c[0] = value;
        Jet { order: order as u8, c }
    }

    pub fn real(value: f64, order: usize) -> Self {
        Self::constant(Complex64::new(value, 0.0), order)
    }

    pub fn zeros(order: usize) -> Self {
        Self::constant(Complex64::new(0.0, 0.0), order)
    }

    /// The coordinate function `x` (axis 0) or `y` (axis 1) expanded at `at`.
    pub fn variable(axis: usize, at: f64, order: usize) -> Self {
        let mut jet = Self::real(at, order);
        if order >= 1 {
            let k = if axis == 0 { index(1, 0) } else { index(0, 1) };
            jet.c[k] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    /// Builds a jet from partial derivatives `∂ₓⁱ∂ᵧʲ f` supplied by `partial(i, j)`.
    pub fn from_partials(order: usize, mut partial: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut jet = Self::zeros(order);
        for k in 0..count(order) {
            let (i, j) = EXPONENTS[k];
            jet.c[k] = partial(i, j) / (FACTORIAL[i] * FACTORIAL[j]);
        }
        jet
    }

    /// Zero with the same order as `other`.
    pub fn zero_like(other: &Jet) -> Jet {
        Jet::zeros(other.order())
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// Normalized Taylor coefficient of `dxⁱ dyʲ`.
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        assert!(i + j <= self.order(), "coefficient ({i},{j}) beyond jet order {}", self.order);
        self.c[index(i, j)]
    }

    /// The partial derivative `∂ₓⁱ∂ᵧʲ f` at the expansion point.
    pub fn partial(&self, i: usize, j: usize) -> Complex64 {
        self.coeff(i, j) * (FACTORIAL[i] * FACTORIAL[j])
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        let mut out = Self::zeros(order);
        let n = count(order);
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    /// Partial derivative along `axis`; the result has one order less.
    pub fn d(&self, axis: usize) -> Self {
        let order = self
            .order()
            .checked_sub(1)
            .expect("cannot differentiate an order-0 jet");
        let mut out = Self::zeros(order);
        for k in 0..count(order) {
            let (i, j) = EXPONENTS[k];
            out.c[k] = if axis == 0 {
                self.c[index(i + 1, j)] * (i + 1) as f64
            } else {
                self.c[index(i, j + 1)] * (j + 1) as f64
            };
        }
        out
    }

    pub fn dx(&self) -> Self {
        self.d(0)
    }

    pub fn dy(&self) -> Self {
        self.d(1)
    }

    pub fn is_finite(&self) -> bool {
        self.c[..count(self.order())]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest coefficient modulus; used for scale estimates.
    pub fn norm_inf(&self) -> f64 {
        self.c[..count(self.order())]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Evaluates the truncated polynomial at displacement `(dx, dy)`.
    pub fn eval_at(&self, dx: f64, dy: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..count(self.order()) {
            let (i, j) = EXPONENTS[k];
            sum += self.c[k] * dx.powi(i as i32) * dy.powi(j as i32);
        }
        sum
    }

    /// `f(self)` given the derivatives `f⁽ᵏ⁾(u₀)` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[Complex64]) -> Self {
        let order = self.order();
        assert!(derivs.len() > order, "need {} derivatives for composition", order + 1);
        let mut h = *self;
        h.c[0] = Complex64::new(0.0, 0.0);
        let mut acc = Self::constant(derivs[order] / FACTORIAL[order], order);
        for k in (0..order).rev() {
            acc *= h;
            acc.c[0] += derivs[k] / FACTORIAL[k];
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let u0 = self.value();
        let order = self.order();
        let mut derivs = Vec::with_capacity(order + 1);
        let inv = u0.inv();
        let mut p = inv;
        let mut sign = 1.0;
        for k in 0..=order {
            derivs.push(p * sign * FACTORIAL[k]);
            p *= inv;
            sign = -sign;
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    /// Natural logarithm on the principal branch.
    pub fn ln(&self) -> Self {
        let u0 = self.value();
        let mut derivs = vec![u0.ln()];
        let inv = u0.inv();
        let mut p = inv;
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            derivs.push(p * sign * FACTORIAL[k - 1]);
            p *= inv;
        }
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order()).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order()).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&(0..=self.order()).map(|k| if k % 2 == 0 { s } else { c }).collect::<Vec<_>>())
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&(0..=self.order()).map(|k| if k % 2 == 0 { c } else { s }).collect::<Vec<_>>())
    }

    /// `self^p` on the principal branch; `self` must not vanish at the point.
    pub fn powc(&self, p: Complex64) -> Self {
        let u0 = self.value();
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut falling = Complex64::new(1.0, 0.0);
        for k in 0..=self.order() {
            derivs.push(falling * u0.powc(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&derivs)
    }

    /// Integer power by repeated multiplication; exact at zero for `n ≥ 0`.
    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut result = Self::constant(Complex64::new(1.0, 0.0), self.order());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result *= base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    pub fn sqrt(&self) -> Self {
        self.powc(Complex64::new(0.5, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for z in out.c[..count(self.order())].iter_mut() {
            *z *= s;
        }
        out
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet[o{}](", self.order)?;
        for k in 0..count(self.order()) {
            let (i, j) = EXPONENTS[k];
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "x{i}y{j}: {}", self.c[k])?;
        }
        write!(f, ")")
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.c[..count(self.order())] == other.c[..count(other.order())]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let mut out = Jet::zeros(order);
        for k in 0..count(order) {
            out.c[k] = self.c[k] + rhs.c[k];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let mut out = Jet::zeros(order);
        for k in 0..count(order) {
            out.c[k] = self.c[k] - rhs.c[k];
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let mut out = Jet::zeros(order);
        for ka in 0..count(order) {
            let a = self.c[ka];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let (ia, ja) = EXPONENTS[ka];
            let rest = order - (ia + ja);
            for kb in 0..count(rest) {
                let (ib, jb) = EXPONENTS[kb];
                out.c[index(ia + ib, ja + jb)] += a * rhs.c[kb];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: Complex64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for Complex64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

impl Add<Complex64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Complex64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<Complex64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Complex64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Div<Complex64> for Jet {
    type Output = Jet;
    fn div(self, rhs: Complex64) -> Jet {
        self.scale(rhs.inv())
    }
}

impl From<Complex64> for Jet {
    /// A constant of maximal order; it never limits the order of a combination.
    fn from(value: Complex64) -> Self {
        Jet::constant(value, MAX_ORDER)
    }
}

impl Zero for Jet {
    fn zero() -> Self {
        Jet::zeros(MAX_ORDER)
    }
    fn is_zero(&self) -> bool {
        self.c[..count(self.order())].iter().all(|z| z.is_zero())
    }
}

impl One for Jet {
    fn one() -> Self {
        Jet::real(1.0, MAX_ORDER)
    }
}

impl Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::zero(), |a, b| a + b)
    }
}

/// Value and partial derivatives through order three.
///
/// Mixed partials are stored once: `dd = [xx, xy, yy]`,
/// `ddd = [xxx, xxy, xyy, yyy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub value: Complex64,
    pub d: [Complex64; 2],
    pub dd: [Complex64; 3],
    pub ddd: [Complex64; 4],
}

impl Jet3 {
    /// `∂ₓⁱ∂ᵧʲ` for `i + j ≤ 3`.
    pub fn partial(&self, i: usize, j: usize) -> Complex64 {
        match i + j {
            0 => self.value,
            1 => self.d[j],
            2 => self.dd[j],
            3 => self.ddd[j],
            n => panic!("Jet3 has no partial of order {n}"),
        }
    }

    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        match i + j {
            0 => self.value = v,
            1 => self.d[j] = v,
            2 => self.dd[j] = v,
            _ => self.ddd[j] = v,
        }
    }

    pub fn to_jet(&self) -> Jet {
        Jet::from_partials(3, |i, j| self.partial(i, j))
    }
}

impl From<&Jet> for Jet3 {
    fn from(jet: &Jet) -> Self {
        assert!(jet.order() >= 3, "Jet3 needs an order-3 jet, got order {}", jet.order());
        let mut out = Jet3 {
            value: jet.value(),
            d: [Complex64::zero(); 2],
            dd: [Complex64::zero(); 3],
            ddd: [Complex64::zero(); 4],
        };
        for total in 1..=3 {
            for j in 0..=total {
                out.set(total - j, j, jet.partial(total - j, j));
            }
        }
        out
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: Jet3) -> Jet3 {
        self.value += rhs.value;
        for k in 0..2 {
            self.d[k] += rhs.d[k];
        }
        for k in 0..3 {
            self.dd[k] += rhs.dd[k];
        }
        for k in 0..4 {
            self.ddd[k] += rhs.ddd[k];
        }
        self
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    FACTORIAL[n] / (FACTORIAL[k] * FACTORIAL[n - k])
}

impl Mul for Jet3 {
    type Output = Jet3;
    /// General Leibniz rule `∂^(i,j)(fg) = Σ C(i,p) C(j,q) ∂^(p,q)f ∂^(i-p,j-q)g`.
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut out = Jet3 {
            value: Complex64::zero(),
            d: [Complex64::zero(); 2],
            dd: [Complex64::zero(); 3],
            ddd: [Complex64::zero(); 4],
        };
        for total in 0..=3 {
            for j in 0..=total {
                let i = total - j;
                let mut acc = Complex64::zero();
                for p in 0..=i {
                    for q in 0..=j {
                        acc += self.partial(p, q) * rhs.partial(i - p, j - q) * (binomial(i, p) * binomial(j, q));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}
