//! Expression trees in `(t, x_1, ..., x_d)` built from polynomials, `sin`,
//! `cos` and `exp`, with exact symbolic differentiation.
//!
//! Text syntax: numbers, `t`, `x1`..`xd`, `pi`, the binary operators
//! `+ - * / ^` (integer exponents only) and the functions `sin`, `cos`,
//! `exp`. Coordinates are 1-based in text and 0-based in [`Expr::Coord`].

use std::fmt;

use crate::error::{Error, Result};
use crate::func::{Jet, SmoothFn, SpaceTimeFn};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Time,
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Powi(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

/// Differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Time,
    Coord(usize),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn t() -> Expr {
        Expr::Time
    }

    pub fn x(i: usize) -> Expr {
        Expr::Coord(i)
    }

    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 1.0)
    }

    pub fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            _ if self.is_zero() => rhs,
            _ if rhs.is_zero() => self,
            _ => Expr::Add(Box::new(self), Box::new(rhs)),
        }
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            _ if rhs.is_zero() => self,
            _ if self.is_zero() => rhs.neg(),
            _ => Expr::Sub(Box::new(self), Box::new(rhs)),
        }
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            _ if self.is_zero() || rhs.is_zero() => Expr::Const(0.0),
            _ if self.is_one() => rhs,
            _ if rhs.is_one() => self,
            _ => Expr::Mul(Box::new(self), Box::new(rhs)),
        }
    }

    pub fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a / b),
            _ if self.is_zero() => Expr::Const(0.0),
            _ if rhs.is_one() => self,
            _ => Expr::Div(Box::new(self), Box::new(rhs)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn powi(self, n: i32) -> Expr {
        match (n, self.as_const()) {
            (0, _) => Expr::Const(1.0),
            (1, _) => self,
            (_, Some(v)) => Expr::Const(v.powi(n)),
            _ => Expr::Powi(Box::new(self), n),
        }
    }

    pub fn sin(self) -> Expr {
        match self.as_const() {
            Some(v) => Expr::Const(v.sin()),
            None => Expr::Sin(Box::new(self)),
        }
    }

    pub fn cos(self) -> Expr {
        match self.as_const() {
            Some(v) => Expr::Const(v.cos()),
            None => Expr::Cos(Box::new(self)),
        }
    }

    pub fn exp(self) -> Expr {
        match self.as_const() {
            Some(v) => Expr::Const(v.exp()),
            None => Expr::Exp(Box::new(self)),
        }
    }

    /// Evaluates the expression. Coordinates beyond `x.len()` read as zero.
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Time => t,
            Expr::Coord(i) => x.get(*i).copied().unwrap_or(0.0),
            Expr::Add(a, b) => a.eval(t, x) + b.eval(t, x),
            Expr::Sub(a, b) => a.eval(t, x) - b.eval(t, x),
            Expr::Mul(a, b) => a.eval(t, x) * b.eval(t, x),
            Expr::Div(a, b) => a.eval(t, x) / b.eval(t, x),
            Expr::Neg(a) => -a.eval(t, x),
            Expr::Powi(a, n) => a.eval(t, x).powi(*n),
            Expr::Sin(a) => a.eval(t, x).sin(),
            Expr::Cos(a) => a.eval(t, x).cos(),
            Expr::Exp(a) => a.eval(t, x).exp(),
        }
    }

    pub fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Time => Expr::Const(if v == Var::Time { 1.0 } else { 0.0 }),
            Expr::Coord(i) => Expr::Const(if v == Var::Coord(*i) { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => a.diff(v).add(b.diff(v)),
            Expr::Sub(a, b) => a.diff(v).sub(b.diff(v)),
            Expr::Mul(a, b) => a.diff(v).mul((**b).clone()).add((**a).clone().mul(b.diff(v))),
            Expr::Div(a, b) => {
                let num = a.diff(v).mul((**b).clone()).sub((**a).clone().mul(b.diff(v)));
                num.div((**b).clone().powi(2))
            }
            Expr::Neg(a) => a.diff(v).neg(),
            Expr::Powi(a, n) => Expr::Const(*n as f64).mul((**a).clone().powi(n - 1)).mul(a.diff(v)),
            Expr::Sin(a) => (**a).clone().cos().mul(a.diff(v)),
            Expr::Cos(a) => (**a).clone().sin().neg().mul(a.diff(v)),
            Expr::Exp(a) => self.clone().mul(a.diff(v)),
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Time => v == Var::Time,
            Expr::Coord(i) => v == Var::Coord(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.depends_on(v) || b.depends_on(v),
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.depends_on(v),
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Const(_) | Expr::Time => None,
            Expr::Coord(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_coord(), b.max_coord()) {
                    (Some(p), Some(q)) => Some(p.max(q)),
                    (p, q) => p.or(q),
                }
            }
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.max_coord(),
        }
    }

    /// True when the expression is free of `t` and every coordinate.
    pub fn is_constant(&self) -> bool {
        !self.depends_on(Var::Time) && self.max_coord().is_none()
    }

    /// Precomputes the derivative trees needed for a second-order jet in `d` dimensions.
    pub fn jet_of(self, d: usize) -> ExprJet {
        ExprJet::new(self, d)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => {
                if *v < 0.0 {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Time => write!(f, "t"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Powi(a, n) => {
                if *n < 0 {
                    write!(f, "({a}^(0 - {}))", -n)
                } else {
                    write!(f, "({a}^{n})")
                }
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl SpaceTimeFn for Expr {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        Expr::eval(self, t, x)
    }
}

/// An expression together with its first and second derivative trees.
#[derive(Debug, Clone)]
pub struct ExprJet {
    d: usize,
    value: Expr,
    dt: Expr,
    grad: Vec<Expr>,
    hess: Vec<Expr>,
}

impl ExprJet {
    pub fn new(value: Expr, d: usize) -> Self {
        let dt = value.diff(Var::Time);
        let grad: Vec<Expr> = (0..d).map(|i| value.diff(Var::Coord(i))).collect();
        let mut hess = vec![Expr::Const(0.0); d * d];
        for i in 0..d {
            for j in i..d {
                let h = grad[i].diff(Var::Coord(j));
                hess[i * d + j] = h.clone();
                hess[j * d + i] = h;
            }
        }
        ExprJet {
            d,
            value,
            dt,
            grad,
            hess,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.value
    }

    pub fn dt_expr(&self) -> &Expr {
        &self.dt
    }

    pub fn grad_expr(&self, i: usize) -> &Expr {
        &self.grad[i]
    }

    pub fn hess_expr(&self, i: usize, j: usize) -> &Expr {
        &self.hess[i * self.d + j]
    }
}

impl SpaceTimeFn for ExprJet {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        self.value.eval(t, x)
    }

    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        Some(self)
    }
}

impl SmoothFn for ExprJet {
    fn dim(&self) -> usize {
        self.d
    }

    fn jet(&self, t: f64, x: &[f64]) -> Jet {
        Jet {
            value: self.value.eval(t, x),
            dt: self.dt.eval(t, x),
            grad: self.grad.iter().map(|e| e.eval(t, x)).collect(),
            hess: self.hess.iter().map(|e| e.eval(t, x)).collect(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: msg.to_string(),
        }
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(self.unary()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.unary()?;
            let n = exponent
                .as_const()
                .filter(|v| v.fract() == 0.0 && v.abs() <= 64.0)
                .ok_or(Error::Parse {
                    offset: at,
                    message: "exponent must be a small integer constant".into(),
                })?;
            return Ok(base.powi(n as i32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign =
                (c == b'+' || c == b'-') && self.pos > start && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map(Expr::Const).map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match name {
            "t" => Ok(Expr::Time),
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "sin" | "cos" | "exp" => {
                if !self.eat(b'(') {
                    return Err(self.err("expected `(` after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(match name {
                    "sin" => arg.sin(),
                    "cos" => arg.cos(),
                    _ => arg.exp(),
                })
            }
            _ => {
                if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    if idx >= 1 {
                        return Ok(Expr::Coord(idx - 1));
                    }
                }
                Err(Error::Parse {
                    offset: start,
                    message: format!("unknown identifier `{name}`"),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("2*x1^2 - sin(t) + exp(x2)/4").unwrap();
        let v = e.eval(0.5, &[3.0, 0.0]);
        assert!((v - (18.0 - 0.5f64.sin() + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn scientific_notation_and_unary_minus() {
        let e = Expr::parse("-1.5e-1 * -x1").unwrap();
        assert!((e.eval(0.0, &[2.0]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse("x0").is_err());
        assert!(Expr::parse("x1 +").is_err());
        assert!(Expr::parse("x1^x2").is_err());
        assert!(Expr::parse("foo(1)").is_err());
        assert!(Expr::parse("(x1").is_err());
    }

    #[test]
    fn derivative_of_product() {
        // d/dx1 (x1^3 cos(x2)) = 3 x1^2 cos(x2)
        let e = Expr::parse("x1^3*cos(x2)").unwrap();
        let d = e.diff(Var::Coord(0));
        let x = [1.3, 0.7];
        assert!((d.eval(0.0, &x) - 3.0 * 1.3f64.powi(2) * 0.7f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn constness() {
        assert!(Expr::parse("2*pi + 1").unwrap().is_constant());
        assert!(!Expr::parse("t").unwrap().is_constant());
        assert!(!Expr::parse("x2 * 0 + x1").unwrap().is_constant());
        assert!(Expr::parse("x2 * 0").unwrap().is_constant());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-3.0f64..3.0).prop_map(Expr::Const),
            Just(Expr::Time),
            (0usize..2).prop_map(Expr::Coord),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
                inner.clone().prop_map(|a| a.sin()),
                inner.clone().prop_map(|a| a.cos()),
                (inner.clone(), 0i32..4).prop_map(|(a, n)| a.powi(n)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr(), t in 0.0f64..2.0, x1 in -2.0f64..2.0, x2 in 0.0f64..2.0) {
            let back = Expr::parse(&e.to_string()).unwrap();
            let a = e.eval(t, &[x1, x2]);
            let b = back.eval(t, &[x1, x2]);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn symbolic_derivative_matches_finite_difference(e in arb_expr(), t in 0.1f64..1.0, x1 in -1.0f64..1.0, x2 in 0.5f64..1.5) {
            let h = 1e-5;
            let d = e.diff(Var::Coord(0)).eval(t, &[x1, x2]);
            let fd = (e.eval(t, &[x1 + h, x2]) - e.eval(t, &[x1 - h, x2])) / (2.0 * h);
            prop_assert!((d - fd).abs() <= 1e-4 * (1.0 + d.abs()));
        }
    }
}
