//! Truncated Laurent series about a base point.
//!
//! Coefficients are Taylor-normalized: the entry for exponent `k` is
//! `f^(k)(z0) / k!` for the regular part, so derivatives are recovered by
//! multiplying with `k!`. A series knows its coefficients for exponents
//! `val .. val + len`; everything below `val` is a known zero.

use num_complex::Complex64;

use super::expr::{AnalyticExpr, View};
use crate::error::{Error, Result};

/// Relative size below which a sum's leading coefficient counts as cancelled.
pub const CANCEL_TOL: f64 = 1e-12;
/// Distance (in the coordinate) below which a nearby zero counts as sitting on the base point.
pub const VANISH_TOL: f64 = 1e-12;
/// Largest jet order served by [`eval_jet`].
pub const MAX_ORDER: usize = 8;
const MAX_WORKING_LEN: usize = 48;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    base: Complex64,
    val: i32,
    coeffs: Vec<Complex64>,
}

impl Laurent {
    pub fn constant(base: Complex64, c: Complex64, len: usize) -> Self {
        let mut coeffs = vec![ZERO; len];
        if len > 0 {
            coeffs[0] = c;
        }
        Laurent { base, val: 0, coeffs }.strip_zeros()
    }

    /// The coordinate function `z` expanded at `base`.
    pub fn variable(base: Complex64, len: usize) -> Self {
        let mut coeffs = vec![ZERO; len];
        if len > 0 {
            coeffs[0] = base;
        }
        if len > 1 {
            coeffs[1] = Complex64::new(1.0, 0.0);
        }
        Laurent { base, val: 0, coeffs }.strip_zeros()
    }

    /// Builds a series from Taylor coefficients `coeffs[k]` at exponent `k`.
    pub fn from_taylor(base: Complex64, coeffs: Vec<Complex64>) -> Self {
        Laurent { base, val: 0, coeffs }.strip_zeros()
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    /// Lowest exponent carried explicitly.
    pub fn valuation(&self) -> i32 {
        self.val
    }

    /// First exponent whose coefficient is unknown.
    pub fn known_until(&self) -> i32 {
        self.val + self.coeffs.len() as i32
    }

    /// Coefficient of `(z - z0)^k`; `None` past the known range.
    pub fn coeff(&self, k: i32) -> Option<Complex64> {
        if k < self.val {
            Some(ZERO)
        } else if k < self.known_until() {
            Some(self.coeffs[(k - self.val) as usize])
        } else {
            None
        }
    }

    /// True when every coefficient with negative exponent is zero.
    pub fn is_regular(&self) -> bool {
        (self.val..0.min(self.known_until())).all(|k| self.coeff(k) == Some(ZERO))
    }

    /// Value at the base point; fails on a pole.
    pub fn value(&self) -> Result<Complex64> {
        if !self.is_regular() {
            return Err(Error::PoleAtPoint(self.base));
        }
        self.coeff(0).ok_or(Error::PoleAtPoint(self.base))
    }

    fn strip_zeros(mut self) -> Self {
        let lead = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        self.coeffs.drain(..lead);
        self.val += lead as i32;
        self
    }

    /// Drops leading coefficients that belong to a zero within [`VANISH_TOL`]
    /// of the base point: `c_k` is dropped when `|c_k| <= tol^(j-k) |c_j|` for the
    /// next nonzero `c_j`.
    fn normalize(mut self) -> Self {
        self = self.strip_zeros();
        loop {
            if self.coeffs.is_empty() {
                return self;
            }
            let lead = self.coeffs[0].norm();
            let next = self.coeffs.iter().enumerate().skip(1).find(|(_, c)| **c != ZERO);
            match next {
                Some((j, c)) if lead <= VANISH_TOL.powi(j as i32) * c.norm() => {
                    self.coeffs[0] = ZERO;
                    self = self.strip_zeros();
                }
                _ => return self,
            }
        }
    }

    pub fn neg(&self) -> Self {
        Laurent {
            base: self.base,
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Laurent {
            base: self.base,
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
        .strip_zeros()
    }

    pub fn add(&self, other: &Laurent) -> Self {
        Laurent::sum(&[self, other], CANCEL_TOL)
    }

    pub fn sub(&self, other: &Laurent) -> Self {
        Laurent::sum(&[self, &other.neg()], CANCEL_TOL)
    }

    /// Sum of several series. Leading coefficients that cancel to within
    /// `cancel_tol` of the largest contributing term are set to exactly zero,
    /// so removable singularities disappear instead of leaving roundoff poles.
    pub fn sum(terms: &[&Laurent], cancel_tol: f64) -> Self {
        let base = terms.first().map_or(ZERO, |t| t.base);
        let lo = terms.iter().map(|t| t.val).min().unwrap_or(0);
        let hi = terms.iter().map(|t| t.known_until()).min().unwrap_or(0);
        if hi <= lo {
            return Laurent { base, val: hi, coeffs: Vec::new() };
        }
        let mut coeffs = Vec::with_capacity((hi - lo) as usize);
        let mut scales = Vec::with_capacity((hi - lo) as usize);
        for k in lo..hi {
            let mut acc = ZERO;
            let mut scale = 0.0f64;
            for t in terms {
                let c = t.coeff(k).expect("within known range");
                acc += c;
                scale = scale.max(c.norm());
            }
            coeffs.push(acc);
            scales.push(scale);
        }
        let mut out = Laurent { base, val: lo, coeffs };
        let mut lead = 0;
        while lead < out.coeffs.len() && out.coeffs[lead].norm() <= cancel_tol * scales[lead] {
            lead += 1;
        }
        out.coeffs.drain(..lead);
        out.val += lead as i32;
        out
    }

    pub fn mul(&self, other: &Laurent) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![ZERO; len];
        for (k, out) in coeffs.iter_mut().enumerate() {
            *out = (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum();
        }
        Laurent { base: self.base, val: self.val + other.val, coeffs }.strip_zeros()
    }

    /// Quotient with common-order cancellation of zeros at the base point.
    /// Fails with `PoleAtPoint` only when the divisor carries no nonzero
    /// known coefficient.
    pub fn div(&self, other: &Laurent) -> Result<Self> {
        let num = self.clone().normalize();
        let den = other.clone().normalize();
        if den.coeffs.is_empty() {
            return Err(Error::PoleAtPoint(self.base));
        }
        let val = num.val - den.val;
        if num.coeffs.is_empty() {
            return Ok(Laurent { base: self.base, val: num.known_until() - den.val, coeffs: Vec::new() });
        }
        let len = num.coeffs.len().min(den.coeffs.len());
        let d0 = den.coeffs[0];
        let mut q: Vec<Complex64> = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = num.coeffs[k];
            for j in 1..=k {
                acc -= den.coeffs[j] * q[k - j];
            }
            q.push(acc / d0);
        }
        Ok(Laurent { base: self.base, val, coeffs: q }.strip_zeros())
    }

    pub fn recip(&self) -> Result<Self> {
        let one = Laurent::constant(self.base, Complex64::new(1.0, 0.0), self.coeffs.len().max(1));
        one.div(self)
    }

    /// Expands `exp(f)`; `f` must be regular at the base.
    pub fn exp(&self) -> Result<Self> {
        if !self.is_regular() {
            return Err(Error::PoleAtPoint(self.base));
        }
        let n = self.known_until().max(0) as usize;
        let a: Vec<Complex64> = (0..n as i32).map(|k| self.coeff(k).expect("known")).collect();
        let mut e = vec![ZERO; n];
        if n > 0 {
            e[0] = a[0].exp();
        }
        for k in 1..n {
            let s: Complex64 = (1..=k).map(|j| a[j] * e[k - j] * j as f64).sum();
            e[k] = s / k as f64;
        }
        Ok(Laurent { base: self.base, val: 0, coeffs: e }.strip_zeros())
    }

    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        if n == 0 {
            return Ok(Laurent::constant(self.base, Complex64::new(1.0, 0.0), self.known_until().max(1) as usize));
        }
        let mut result = Laurent::constant(self.base, Complex64::new(1.0, 0.0), self.coeffs.len().max(1));
        let mut sq = self.clone();
        let mut m = n;
        while m > 0 {
            if m & 1 == 1 {
                result = result.mul(&sq);
            }
            m >>= 1;
            if m > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(result)
    }

    /// Term-by-term derivative with respect to `z`.
    pub fn derivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut val = self.val - 1;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.val + i as i32;
            if k == 0 {
                if i == 0 {
                    val = 0;
                    continue;
                }
                coeffs.push(ZERO);
            } else {
                coeffs.push(c * k as f64);
            }
        }
        if self.val == 0 {
            val = 0;
        }
        Laurent { base: self.base, val, coeffs }.strip_zeros()
    }

    /// Taylor jet of the given order; fails on poles or insufficient precision.
    pub fn to_jet(&self, order: usize) -> Result<Jet> {
        if !self.is_regular() || self.known_until() < order as i32 + 1 {
            return Err(Error::PoleAtPoint(self.base));
        }
        let coeffs = (0..=order as i32).map(|k| self.coeff(k).expect("known")).collect();
        Ok(Jet { base: self.base, coeffs })
    }

    /// Evaluates an expression tree with every leaf expanded to `len` terms.
    pub fn eval_expr(expr: &AnalyticExpr, base: Complex64, len: usize) -> Result<Self> {
        Ok(match expr.view() {
            View::Const(c) => Laurent::constant(base, c, len),
            View::Var => Laurent::variable(base, len),
            View::Add(a, b) => Self::eval_expr(a, base, len)?.add(&Self::eval_expr(b, base, len)?),
            View::Sub(a, b) => Self::eval_expr(a, base, len)?.sub(&Self::eval_expr(b, base, len)?),
            View::Mul(a, b) => Self::eval_expr(a, base, len)?.mul(&Self::eval_expr(b, base, len)?),
            View::Div(a, b) => Self::eval_expr(a, base, len)?.div(&Self::eval_expr(b, base, len)?)?,
            View::Neg(a) => Self::eval_expr(a, base, len)?.neg(),
            View::Pow(a, n) => Self::eval_expr(a, base, len)?.powi(n)?,
            View::Exp(a) => Self::eval_expr(a, base, len)?.exp()?,
        })
    }

    /// Like [`Laurent::eval_expr`] but grows the working length until the
    /// result is known through exponent `need - 1`.
    pub fn expand(expr: &AnalyticExpr, base: Complex64, need: i32) -> Result<Self> {
        Self::grow(base, need, |len| Self::eval_expr(expr, base, len))
    }

    /// Runs `build` with increasing leaf lengths until its result is known
    /// through exponent `need - 1`.
    pub fn grow<F>(base: Complex64, need: i32, build: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<Laurent>,
    {
        let mut len = need.max(1) as usize + 4;
        loop {
            match build(len) {
                Ok(s) if s.known_until() >= need => return Ok(s),
                Ok(_) | Err(Error::PoleAtPoint(_)) if len < MAX_WORKING_LEN => {}
                Ok(_) => return Err(Error::PoleAtPoint(base)),
                Err(e) => return Err(e),
            }
            len = (len * 2).min(MAX_WORKING_LEN);
        }
    }
}

/// Taylor jet: `coeffs[k] = f^(k)(base) / k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub base: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `k`-th derivative, i.e. `k! * coeffs[k]`.
    pub fn derivative(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact
    }

    fn laurent(&self) -> Laurent {
        Laurent::from_taylor(self.base, self.coeffs.clone())
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.base != other.base || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::InvalidParameter(
                "jets must share base point and order".into(),
            ));
        }
        Ok(())
    }

    fn from_laurent(s: &Laurent, order: usize) -> Result<Jet> {
        let avail = (s.known_until().max(0) as usize).min(order + 1);
        if !s.is_regular() || avail == 0 {
            return Err(Error::PoleAtPoint(s.base));
        }
        s.to_jet(avail - 1)
    }
}

/// Taylor jet of `expr` at `z` through `order`.
pub fn eval_jet(expr: &AnalyticExpr, z: Complex64, order: usize) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(Error::OrderOverflow { requested: order, max: MAX_ORDER });
    }
    Laurent::expand(expr, z, order as i32 + 1)?.to_jet(order)
}

pub fn jet_add(a: &Jet, b: &Jet) -> Result<Jet> {
    a.check_compatible(b)?;
    Ok(Jet {
        base: a.base,
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
    })
}

pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet> {
    a.check_compatible(b)?;
    Jet::from_laurent(&a.laurent().mul(&b.laurent()), a.order())
}

/// Quotient of two jets. When both vanish at the base the common order `k`
/// is cancelled first, and the result carries `k` fewer known coefficients.
pub fn jet_div(a: &Jet, b: &Jet) -> Result<Jet> {
    a.check_compatible(b)?;
    let q = a.laurent().div(&b.laurent())?;
    Jet::from_laurent(&q, a.order())
}

pub fn jet_exp(a: &Jet) -> Result<Jet> {
    Jet::from_laurent(&a.laurent().exp()?, a.order())
}
