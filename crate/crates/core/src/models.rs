//! Catalog of model surfaces: Enneper's surface, the catenoid and helicoid,
//! and the deformed families `C_t`, `H_t` obtained by composing the Gauss
//! map with `z ↦ (t + z)/(1 - t z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geomnum::Grid;
use crate::integrate_surface::immersion_point;
use crate::jets::AnalyticExpr;
use crate::weierstrass::{entropy_coefficient, hopf_coefficient, RectDomain, WeierstrassData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Enneper { mu: f64 },
    Catenoid,
    Helicoid,
    DeformedCatenoid { t: f64 },
    DeformedHelicoid { t: f64 },
}

/// The constant `c` in `ρ/2 = c q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyRelation {
    PZero,
    PEqHalfQ,
    PEqIHalfQ,
}

impl FamilyRelation {
    pub fn coefficient(self) -> Complex64 {
        match self {
            FamilyRelation::PZero => Complex64::new(0.0, 0.0),
            FamilyRelation::PEqHalfQ => Complex64::new(0.5, 0.0),
            FamilyRelation::PEqIHalfQ => Complex64::new(0.0, 0.5),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelSurface {
    pub kind: ModelKind,
    pub data: WeierstrassData,
    pub relation: FamilyRelation,
}

fn check_t(t: f64) -> Result<f64> {
    if t.is_finite() && t.abs() < 1.0 {
        Ok(t)
    } else {
        Err(Error::InvalidParameter("t must lie in (−1,1)".into()))
    }
}

/// `G_t = (t - e^z)/(1 - t e^z)` and `(1 - t e^{-z})(1 - t e^z)/(1 - t²)`.
fn deformed_parts(t: f64) -> (AnalyticExpr, AnalyticExpr) {
    let z = AnalyticExpr::var();
    if t == 0.0 {
        return (-z.exp(), AnalyticExpr::real(1.0));
    }
    let ez = z.clone().exp();
    let emz = (-z).exp();
    let one = AnalyticExpr::real(1.0);
    let tt = AnalyticExpr::real(t);
    let g = (tt.clone() - ez.clone()) / (one.clone() - tt.clone() * ez.clone());
    let h = (one.clone() - tt.clone() * emz) * (one - tt * ez) / AnalyticExpr::real(1.0 - t * t);
    (g, h)
}

fn strip() -> RectDomain {
    RectDomain { x0: -2.0, x1: 2.0, y0: 0.0, y1: 2.0 * PI }
}

impl ModelSurface {
    pub fn new(kind: ModelKind) -> Result<Self> {
        let i = AnalyticExpr::constant(Complex64::new(0.0, 1.0));
        let (data, relation) = match kind {
            ModelKind::Enneper { mu } => {
                if !(mu.is_finite() && mu > 0.0) {
                    return Err(Error::InvalidParameter("mu must be positive".into()));
                }
                let z = AnalyticExpr::var();
                let g = z.clone() / AnalyticExpr::real(2.0 * mu * mu);
                let dom = RectDomain { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
                (WeierstrassData::new(g, z, dom)?, FamilyRelation::PZero)
            }
            ModelKind::Catenoid | ModelKind::DeformedCatenoid { .. } => {
                let t = match kind {
                    ModelKind::DeformedCatenoid { t } => check_t(t)?,
                    _ => 0.0,
                };
                let (g, h) = deformed_parts(t);
                (WeierstrassData::new(g, h, strip())?.with_period(2.0 * PI), FamilyRelation::PEqHalfQ)
            }
            ModelKind::Helicoid | ModelKind::DeformedHelicoid { .. } => {
                let t = match kind {
                    ModelKind::DeformedHelicoid { t } => check_t(t)?,
                    _ => 0.0,
                };
                let (g, h) = deformed_parts(t);
                (WeierstrassData::new(g, -(i * h), strip())?.with_period(2.0 * PI), FamilyRelation::PEqIHalfQ)
            }
        };
        Ok(ModelSurface { kind, data, relation })
    }

    /// Catalog name used on the command line.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Enneper { .. } => "enneper",
            ModelKind::Catenoid => "catenoid",
            ModelKind::Helicoid => "helicoid",
            ModelKind::DeformedCatenoid { .. } => "deformed-catenoid",
            ModelKind::DeformedHelicoid { .. } => "deformed-helicoid",
        }
    }

    /// Same model with a different parameter domain.
    pub fn on_domain(mut self, domain: RectDomain) -> Self {
        self.data.domain = domain;
        self
    }

    /// Evaluates the closed-form parametrization as printed, with the
    /// deformation terms `F_0 + (2t/(1 - t²)) (…)`.
    pub fn closed_form_point(&self, x: f64, y: f64) -> [f64; 3] {
        let (ch, sh, cy, sy) = (x.cosh(), x.sinh(), y.cos(), y.sin());
        match self.kind {
            ModelKind::Enneper { mu } => {
                let a = 2.0 * mu * mu;
                let z = Complex64::new(x, y);
                let z3 = z * z * z;
                let i = Complex64::new(0.0, 1.0);
                [
                    (0.5 * (a * z - z3 / (3.0 * a))).re,
                    (0.5 * i * (a * z + z3 / (3.0 * a))).re,
                    (0.5 * z * z).re,
                ]
            }
            ModelKind::Catenoid => [ch * cy, ch * sy, x],
            ModelKind::DeformedCatenoid { t } => {
                let c = 2.0 * t / (1.0 - t * t);
                [ch * cy, ch * sy + c * (-y + t * ch * sy), x + c * (t * x - sh * cy)]
            }
            ModelKind::Helicoid => [sh * sy, -sh * cy, y],
            ModelKind::DeformedHelicoid { t } => {
                let c = 2.0 * t / (1.0 - t * t);
                [sh * sy, -sh * cy + c * (x + t * sh * cy), y + c * (t * y - ch * sy)]
            }
        }
    }
}

/// `max |ρ/2 - c q|` over the grid nodes.
pub fn family_relation_residual(m: &ModelSurface, grid: &Grid) -> Result<f64> {
    let c = m.relation.coefficient();
    let pts: Vec<Complex64> = grid.points().collect();
    let res: Vec<f64> = pts
        .par_iter()
        .map(|&z| {
            let rho = entropy_coefficient(&m.data, z)?;
            let q = hopf_coefficient(&m.data, z)?;
            Ok((0.5 * rho - c * q).norm())
        })
        .collect::<Result<_>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Largest distance between the closed form and the Weierstrass integral
/// over the grid nodes, with both pinned to agree at `anchor`. Each node is
/// reached by a straight segment from the anchor.
pub fn closed_form_vs_weierstrass(m: &ModelSurface, grid: &Grid, anchor: Complex64) -> Result<f64> {
    let f0 = m.closed_form_point(anchor.re, anchor.im);
    let pts: Vec<Complex64> = grid.points().collect();
    let dist: Vec<f64> = pts
        .par_iter()
        .map(|&z| {
            let w = immersion_point(&m.data, &[anchor, z])?.x;
            let f = m.closed_form_point(z.re, z.im);
            let d2: f64 = (0..3).map(|k| (f0[k] + w[k] - f[k]).powi(2)).sum();
            Ok(d2.sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(dist.into_iter().fold(0.0, f64::max))
}
