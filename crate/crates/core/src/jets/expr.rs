//! Closed-form meromorphic expressions in one complex variable `z`.
//!
//! Grammar accepted by [`AnalyticExpr::parse`]:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | number 'i' | 'i' | 'z' | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `integer` may carry a sign or be parenthesized (`z^-2`, `z^(-2)`).
//! A complex literal such as `1.5-2i` is the sum of a real and an imaginary literal.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    Var,
    Add(AnalyticExpr, AnalyticExpr),
    Sub(AnalyticExpr, AnalyticExpr),
    Mul(AnalyticExpr, AnalyticExpr),
    Div(AnalyticExpr, AnalyticExpr),
    Neg(AnalyticExpr),
    Pow(AnalyticExpr, i32),
    Exp(AnalyticExpr),
}

/// Immutable expression tree; clones share structure.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticExpr(Arc<Node>);

/// Read-only view of the top node, used by the series evaluator.
pub(crate) enum View<'a> {
    Const(Complex64),
    Var,
    Add(&'a AnalyticExpr, &'a AnalyticExpr),
    Sub(&'a AnalyticExpr, &'a AnalyticExpr),
    Mul(&'a AnalyticExpr, &'a AnalyticExpr),
    Div(&'a AnalyticExpr, &'a AnalyticExpr),
    Neg(&'a AnalyticExpr),
    Pow(&'a AnalyticExpr, i32),
    Exp(&'a AnalyticExpr),
}

// Sample points used to certify that a denominator is not identically zero.
const PROBE_POINTS: [(f64, f64); 3] = [(0.3137, 0.2718), (-0.5772, 0.1414), (0.0871, -0.6917)];

impl AnalyticExpr {
    fn wrap(node: Node) -> Self {
        AnalyticExpr(Arc::new(node))
    }

    pub fn var() -> Self {
        Self::wrap(Node::Var)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn exp(&self) -> Self {
        Self::wrap(Node::Exp(self.clone()))
    }

    pub fn powi(&self, n: i32) -> Self {
        Self::wrap(Node::Pow(self.clone(), n))
    }

    /// Quotient node; rejects a denominator that vanishes identically.
    pub fn checked_div(&self, den: &AnalyticExpr) -> Result<Self> {
        if den.is_identically_zero() {
            return Err(Error::InvalidParameter(format!(
                "denominator `{den}` is identically zero"
            )));
        }
        Ok(Self::wrap(Node::Div(self.clone(), den.clone())))
    }

    pub(crate) fn view(&self) -> View<'_> {
        match &*self.0 {
            Node::Const(c) => View::Const(*c),
            Node::Var => View::Var,
            Node::Add(a, b) => View::Add(a, b),
            Node::Sub(a, b) => View::Sub(a, b),
            Node::Mul(a, b) => View::Mul(a, b),
            Node::Div(a, b) => View::Div(a, b),
            Node::Neg(a) => View::Neg(a),
            Node::Pow(a, n) => View::Pow(a, *n),
            Node::Exp(a) => View::Exp(a),
        }
    }

    fn is_identically_zero(&self) -> bool {
        PROBE_POINTS
            .iter()
            .all(|&(x, y)| self.eval(Complex64::new(x, y)) == Complex64::new(0.0, 0.0))
    }

    /// Direct pointwise evaluation. Poles yield non-finite values.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var => z,
            Node::Add(a, b) => a.eval(z) + b.eval(z),
            Node::Sub(a, b) => a.eval(z) - b.eval(z),
            Node::Mul(a, b) => a.eval(z) * b.eval(z),
            Node::Div(a, b) => a.eval(z) / b.eval(z),
            Node::Neg(a) => -a.eval(z),
            Node::Pow(a, n) => a.eval(z).powi(*n),
            Node::Exp(a) => a.eval(z).exp(),
        }
    }

    /// Replaces every occurrence of `z` by `replacement`.
    pub fn substitute(&self, replacement: &AnalyticExpr) -> AnalyticExpr {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var => replacement.clone(),
            Node::Add(a, b) => Self::wrap(Node::Add(a.substitute(replacement), b.substitute(replacement))),
            Node::Sub(a, b) => Self::wrap(Node::Sub(a.substitute(replacement), b.substitute(replacement))),
            Node::Mul(a, b) => Self::wrap(Node::Mul(a.substitute(replacement), b.substitute(replacement))),
            Node::Div(a, b) => Self::wrap(Node::Div(a.substitute(replacement), b.substitute(replacement))),
            Node::Neg(a) => Self::wrap(Node::Neg(a.substitute(replacement))),
            Node::Pow(a, n) => Self::wrap(Node::Pow(a.substitute(replacement), *n)),
            Node::Exp(a) => Self::wrap(Node::Exp(a.substitute(replacement))),
        }
    }

    /// The reflected function `conj ∘ f ∘ conj`: every constant is conjugated.
    pub fn reflect(&self) -> AnalyticExpr {
        match &*self.0 {
            Node::Const(c) => Self::constant(c.conj()),
            Node::Var => self.clone(),
            Node::Add(a, b) => Self::wrap(Node::Add(a.reflect(), b.reflect())),
            Node::Sub(a, b) => Self::wrap(Node::Sub(a.reflect(), b.reflect())),
            Node::Mul(a, b) => Self::wrap(Node::Mul(a.reflect(), b.reflect())),
            Node::Div(a, b) => Self::wrap(Node::Div(a.reflect(), b.reflect())),
            Node::Neg(a) => Self::wrap(Node::Neg(a.reflect())),
            Node::Pow(a, n) => Self::wrap(Node::Pow(a.reflect(), *n)),
            Node::Exp(a) => Self::wrap(Node::Exp(a.reflect())),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Var => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => 1 + a.size(),
        }
    }

    /// Returns the value if the expression does not involve `z`.
    pub fn as_constant(&self) -> Option<Complex64> {
        if self.has_var() {
            return None;
        }
        let v = self.eval(Complex64::new(0.0, 0.0));
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }

    fn has_var(&self) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.has_var() || b.has_var(),
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => a.has_var(),
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }
}

impl std::str::FromStr for AnalyticExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Add for AnalyticExpr {
    type Output = AnalyticExpr;
    fn add(self, rhs: Self) -> Self {
        Self::wrap(Node::Add(self, rhs))
    }
}

impl Sub for AnalyticExpr {
    type Output = AnalyticExpr;
    fn sub(self, rhs: Self) -> Self {
        Self::wrap(Node::Sub(self, rhs))
    }
}

impl Mul for AnalyticExpr {
    type Output = AnalyticExpr;
    fn mul(self, rhs: Self) -> Self {
        Self::wrap(Node::Mul(self, rhs))
    }
}

impl Div for AnalyticExpr {
    type Output = AnalyticExpr;
    /// Panics when the denominator is identically zero; use
    /// [`AnalyticExpr::checked_div`] for untrusted input.
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by an identically zero expression")
    }
}

impl Neg for AnalyticExpr {
    type Output = AnalyticExpr;
    fn neg(self) -> Self {
        Self::wrap(Node::Neg(self))
    }
}

fn fmt_complex(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => write!(f, "({})", c.re),
        (true, false) => write!(f, "({}i)", c.im),
        (false, false) => {
            let sign = if c.im.is_sign_negative() { '-' } else { '+' };
            write!(f, "({}{}{}i)", c.re, sign, c.im.abs())
        }
    }
}

impl fmt::Display for AnalyticExpr {
    /// Fully parenthesized form that [`AnalyticExpr::parse`] reads back exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => fmt_complex(*c, f),
            Node::Var => write!(f, "z"),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, n) => write!(f, "({a}^({n}))"),
            Node::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<AnalyticExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs + self.term()?;
            } else if self.eat(b'-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<AnalyticExpr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs * self.unary()?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let den = self.unary()?;
                lhs = lhs.checked_div(&den).map_err(|e| Error::Parse {
                    pos: at,
                    msg: e.to_string(),
                })?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<AnalyticExpr> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<AnalyticExpr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let n = self.integer()?;
            Ok(base.powi(n))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32> {
        if self.eat(b'(') {
            let n = self.integer()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')' after exponent"));
            }
            return Ok(n);
        }
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let n: i32 = text.parse().map_err(|_| self.err("exponent out of range"))?;
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<AnalyticExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(AnalyticExpr::var())
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(AnalyticExpr::constant(Complex64::new(0.0, 1.0)))
            }
            Some(b'e') if self.src[self.pos..].starts_with(b"exp") => {
                self.pos += 3;
                if !self.eat(b'(') {
                    return Err(self.err("expected '(' after exp"));
                }
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e.exp())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<AnalyticExpr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        // exponent part only when a digit follows, so `2exp(z)` is not misread
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.src.get(look), Some(b'+') | Some(b'-')) {
                look += 1;
            }
            if self.src.get(look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                digits(self);
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })?;
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            Ok(AnalyticExpr::constant(Complex64::new(0.0, value)))
        } else {
            Ok(AnalyticExpr::real(value))
        }
    }
}
