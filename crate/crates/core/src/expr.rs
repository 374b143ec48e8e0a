//! A small expression language for chart functions, potentials and Killing data.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?            (right associative)
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! Identifiers are the coordinates `x` and `y`, the imaginary unit `i`, the
//! constant `pi`, the functions `sin cos sinh cosh exp ln sqrt`, and any
//! parameter declared at parse time. Exponents may not depend on `x` or `y`;
//! they are evaluated once, and integer exponents use exact repeated
//! multiplication. Evaluation produces a [`Jet`] of the requested order with
//! principal branches for `ln`, `sqrt` and fractional powers.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::jet::{Jet, Jet3};

/// Late-bound parameter values.
pub type Params = BTreeMap<String, Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("parameter `{0}` has no value")]
    UnboundParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    /// Coordinate `x` (0) or `y` (1).
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with an exponent that is constant over the chart.
    Pow(Box<Expr>, Box<Expr>),
}

/// Parses `source`, accepting the listed parameter names as identifiers.
pub fn parse(source: &str, params: &[&str]) -> Result<Expr, ExprError> {
    let mut parser = Parser { src: source.as_bytes(), pos: 0, params };
    parser.skip_ws();
    if parser.pos == parser.src.len() {
        return Err(parser.error("empty expression"));
    }
    let expr = parser.sum()?;
    parser.skip_ws();
    if parser.pos != parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.unary()?;
            if exponent.depends_on(0) || exponent.depends_on(1) {
                return Err(ExprError::Syntax {
                    position: at,
                    message: "exponent must not depend on x or y".into(),
                });
            }
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>()
            .map(|v| Expr::Const(Complex64::new(v, 0.0)))
            .map_err(|_| ExprError::Syntax { position: start, message: format!("malformed number `{text}`") })
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error(&format!("expected `(` after `{name}`")));
            }
            let arg = self.sum()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name {
            "x" => Ok(Expr::Var(0)),
            "y" => Ok(Expr::Var(1)),
            "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
            "pi" => Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
            _ if self.params.contains(&name) => Ok(Expr::Param(name.to_string())),
            _ => Err(ExprError::UnknownIdentifier(name.to_string())),
        }
    }
}

impl Expr {
    pub fn constant(value: Complex64) -> Self {
        Expr::Const(value)
    }

    pub fn real(value: f64) -> Self {
        Expr::Const(Complex64::new(value, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    /// Whether the expression syntactically involves coordinate `axis`.
    pub fn depends_on(&self, axis: usize) -> bool {
        match self {
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Var(a) => *a == axis,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on(axis),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => a.depends_on(axis) || b.depends_on(axis),
        }
    }

    /// Names of the parameters referenced by the expression.
    pub fn parameters(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(name) => out.push(name.clone()),
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Evaluates the expression as a jet of the given order at `point`.
    pub fn eval_jet(&self, point: (f64, f64), params: &Params, order: usize) -> Result<Jet, ExprError> {
        let jet = match self {
            Expr::Const(c) => Jet::constant(*c, order),
            Expr::Var(axis) => Jet::variable(*axis, if *axis == 0 { point.0 } else { point.1 }, order),
            Expr::Param(name) => Jet::constant(
                *params.get(name).ok_or_else(|| ExprError::UnboundParameter(name.clone()))?,
                order,
            ),
            Expr::Neg(e) => -e.eval_jet(point, params, order)?,
            Expr::Call(func, arg) => {
                let u = arg.eval_jet(point, params, order)?;
                let u0 = u.value();
                match func {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Exp => u.exp(),
                    Func::Ln => {
                        if u0.norm() == 0.0 {
                            return Err(ExprError::Domain("ln of zero".into()));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u0.norm() == 0.0 && order > 0 {
                            return Err(ExprError::Domain("sqrt is not differentiable at zero".into()));
                        }
                        u.sqrt()
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.eval_jet(point, params, order)?;
                let b = b.eval_jet(point, params, order)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value().norm() == 0.0 {
                            return Err(ExprError::Domain("division by zero".into()));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, exponent) => {
                let p = exponent.eval_jet(point, params, 0)?.value();
                let b = base.eval_jet(point, params, order)?;
                let is_int = p.im == 0.0 && p.re.fract() == 0.0 && p.re.abs() <= 64.0;
                if is_int && p.re >= 0.0 {
                    b.powi(p.re as i32)
                } else if b.value().norm() == 0.0 {
                    return Err(ExprError::Domain(format!("power {p} of zero")));
                } else if is_int {
                    b.powi(p.re as i32)
                } else {
                    b.powc(p)
                }
            }
        };
        if !jet.is_finite() {
            return Err(ExprError::Domain(format!("non-finite value at ({}, {})", point.0, point.1)));
        }
        Ok(jet)
    }

    /// Value and partials through order three.
    pub fn eval_jet3(&self, point: (f64, f64), params: &Params) -> Result<Jet3, ExprError> {
        Ok(Jet3::from(&self.eval_jet(point, params, 3)?))
    }

    /// Plain value at a point.
    pub fn eval(&self, point: (f64, f64), params: &Params) -> Result<Complex64, ExprError> {
        Ok(self.eval_jet(point, params, 0)?.value())
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    let re = |f: &mut fmt::Formatter<'_>, v: f64| {
        if v < 0.0 {
            write!(f, "(-{})", -v)
        } else {
            write!(f, "{v}")
        }
    };
    if c.im == 0.0 {
        re(f, c.re)
    } else if c.re == 0.0 && c.im == 1.0 {
        write!(f, "i")
    } else {
        write!(f, "(")?;
        re(f, c.re)?;
        write!(f, "+")?;
        re(f, c.im)?;
        write!(f, "*i)")
    }
}

/// Builders used to assemble derived expressions programmatically.
impl Expr {
    pub fn var(axis: usize) -> Self {
        Expr::Var(axis)
    }

    pub fn param(name: &str) -> Self {
        Expr::Param(name.to_string())
    }

    pub fn call(func: Func, arg: Expr) -> Self {
        Expr::Call(func, Box::new(arg))
    }

    pub fn pow(self, exponent: Expr) -> Self {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn powf(self, exponent: f64) -> Self {
        self.pow(Expr::real(exponent))
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(v, 0.0))
    }

    /// Exact partial derivative with respect to coordinate `axis`, with the
    /// trivial simplifications `0 + e`, `1 · e` and `0 · e` applied.
    pub fn derivative(&self, axis: usize) -> Expr {
        if !self.depends_on(axis) {
            return Expr::zero();
        }
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::zero(),
            Expr::Var(a) => Expr::real(if *a == axis { 1.0 } else { 0.0 }),
            Expr::Neg(e) => -e.derivative(axis),
            Expr::Call(func, e) => {
                let inner = (**e).clone();
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, inner),
                    Func::Cos => -Expr::call(Func::Sin, inner),
                    Func::Sinh => Expr::call(Func::Cosh, inner),
                    Func::Cosh => Expr::call(Func::Sinh, inner),
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::real(1.0) / inner,
                    Func::Sqrt => Expr::real(0.5) / self.clone(),
                };
                outer * e.derivative(axis)
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.derivative(axis), b.derivative(axis));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => da + db,
                    BinOp::Sub => da - db,
                    BinOp::Mul => da * b + a * db,
                    BinOp::Div => (da * b.clone() - a * db) / b.powf(2.0),
                }
            }
            Expr::Pow(base, exponent) => {
                let n = (**exponent).clone();
                let reduced = Expr::Binary(BinOp::Sub, Box::new(n.clone()), Box::new(Expr::real(1.0)));
                n * (**base).clone().pow(reduced) * base.derivative(axis)
            }
        }
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        if self.is_const(0.0) {
            self
        } else {
            Expr::Neg(Box::new(self))
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        if self.is_const(0.0) {
            rhs
        } else if rhs.is_const(0.0) {
            self
        } else {
            Expr::Binary(BinOp::Add, Box::new(self), Box::new(rhs))
        }
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_const(0.0) {
            self
        } else if self.is_const(0.0) {
            -rhs
        } else {
            Expr::Binary(BinOp::Sub, Box::new(self), Box::new(rhs))
        }
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_const(0.0) || rhs.is_const(0.0) {
            Expr::zero()
        } else if self.is_const(1.0) {
            rhs
        } else if rhs.is_const(1.0) {
            self
        } else {
            Expr::Binary(BinOp::Mul, Box::new(self), Box::new(rhs))
        }
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        if rhs.is_const(1.0) {
            self
        } else {
            Expr::Binary(BinOp::Div, Box::new(self), Box::new(rhs))
        }
    }
}

impl std::ops::Mul<Complex64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Complex64) -> Expr {
        Expr::Const(rhs) * self
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized output that parses back to the same tree shape.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var(0) => write!(f, "x"),
            Expr::Var(_) => write!(f, "y"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a}{sym}{b})")
            }
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn symbolic_derivative_matches_jets() {
        let mut params = Params::new();
        params.insert("h".into(), c(0.7));
        for src in ["sin(x*y)+exp(y)/x", "sqrt(1+x^2)*cosh(y)", "ln(2+y)^2.5-h/y", "-x^3*sinh(x-y)", "cos(h*x)^-1"] {
            let e = parse(src, &["h"]).unwrap();
            for axis in 0..2 {
                let d = e.derivative(axis);
                let p = (0.4, 0.9);
                let expect = e.eval_jet(p, &params, 3).unwrap().d(axis);
                let got = d.eval_jet(p, &params, 2).unwrap();
                for (i, j) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                    assert!((expect.partial(i, j) - got.partial(i, j)).norm() < 1e-10, "{src} axis {axis}");
                }
            }
        }
    }

    #[test]
    fn builders_simplify_trivial_terms() {
        let y = Expr::var(1);
        assert_eq!(Expr::zero() + y.clone(), y);
        assert_eq!(Expr::real(1.0) * y.clone(), y);
        assert_eq!(Expr::zero() * y.clone(), Expr::zero());
        assert_eq!(Expr::real(3.0).derivative(1), Expr::zero());
    }

    #[test]
    fn precedence_shapes() {
        let e = parse("y^2 + 1", &[]).unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Pow(Box::new(Expr::Var(1)), Box::new(Expr::real(2.0)))),
                Box::new(Expr::real(1.0))
            )
        );
        assert_eq!(parse("sin(y)", &[]).unwrap(), Expr::Call(Func::Sin, Box::new(Expr::Var(1))));
        assert_eq!(
            parse("h/y", &["h"]).unwrap(),
            Expr::Binary(BinOp::Div, Box::new(Expr::Param("h".into())), Box::new(Expr::Var(1)))
        );
        let neg_sq = parse("-y^2", &[]).unwrap();
        assert!(matches!(neg_sq, Expr::Neg(_)));
        let right = parse("2^3^2", &[]).unwrap();
        assert_eq!(right.eval((0.0, 0.0), &Params::new()).unwrap(), c(512.0));
    }

    #[test]
    fn errors_are_positioned_and_typed() {
        assert!(matches!(parse("", &[]), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("1 +", &[]), Err(ExprError::Syntax { position: 3, .. })));
        assert_eq!(parse("z + 1", &[]), Err(ExprError::UnknownIdentifier("z".into())));
        assert!(matches!(parse("y^x", &[]), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(y", &[]), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn derivative_examples() {
        let p = Params::new();
        let j = parse("y^2", &[]).unwrap().eval_jet3((0.0, 3.0), &p).unwrap();
        assert_eq!((j.value, j.d[1], j.dd[2], j.ddd[3]), (c(9.0), c(6.0), c(2.0), c(0.0)));
        let s = parse("sin(y)", &[]).unwrap().eval_jet3((0.0, 0.0), &p).unwrap();
        assert!((s.d[1] - c(1.0)).norm() < 1e-15 && (s.ddd[3] + c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let p = Params::new();
        for src in ["ln(y)", "1/y", "y^0.5", "sqrt(y)"] {
            let e = parse(src, &[]).unwrap();
            assert!(matches!(e.eval_jet((1.0, 0.0), &p, 3), Err(ExprError::Domain(_))), "{src}");
        }
        let e = parse("h*y", &["h"]).unwrap();
        assert_eq!(e.eval((0.0, 1.0), &p), Err(ExprError::UnboundParameter("h".into())));
    }

    #[test]
    fn print_parse_fixed_point() {
        for src in ["-y^2+3*x/(1-y)", "exp(-x)*sqrt(1+y^2)", "2^-1", "i*h - 0.1*x", "1e-3*y^(1/3)"] {
            let once = parse(src, &["h"]).unwrap();
            let printed = once.to_string();
            let twice = parse(&printed, &["h"]).unwrap();
            assert_eq!(twice.to_string(), printed);
        }
    }
}
