//! Turning command-line strings into library inputs.

use std::path::Path;

use entropydiff::jets::AnalyticExpr;
use entropydiff::models::{ModelKind, ModelSurface};
use entropydiff::weierstrass::{RectDomain, WeierstrassData};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::SurfaceArgs;

/// Smallest distance kept between `t` and `±1`.
pub const T_MARGIN: f64 = 1e-3;

#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: u8,
}

impl CliError {
    pub fn input(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.to_string(), message: message.into(), exit: 1 }
    }

    pub fn numeric(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.to_string(), message: message.into(), exit: 2 }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::numeric("IoError", format!("{}: {e}", path.display()))
    }
}

impl From<entropydiff::Error> for CliError {
    fn from(e: entropydiff::Error) -> Self {
        let exit = if e.is_input_error() { 1 } else { 2 };
        CliError { code: e.code().to_string(), message: e.to_string(), exit }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::numeric("IoError", e.to_string())
    }
}

/// `NXxNY` in cells; the grid has one more node than cells along each axis.
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::input("InvalidParameter", format!("grid must look like 64x64, got {s:?}"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let nx: usize = a.trim().parse().map_err(|_| bad())?;
    let ny: usize = b.trim().parse().map_err(|_| bad())?;
    if nx < 8 || ny < 8 {
        return Err(CliError::input("InvalidParameter", format!("grid resolution must be at least 8x8, got {nx}x{ny}")));
    }
    Ok((nx + 1, ny + 1))
}

pub fn parse_domain(s: &str) -> Result<RectDomain, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::input("InvalidParameter", format!("domain must be x0,x1,y0,y1, got {s:?}")))?;
    if parts.len() != 4 {
        return Err(CliError::input("InvalidParameter", format!("domain must have four numbers, got {s:?}")));
    }
    Ok(RectDomain::new(parts[0], parts[1], parts[2], parts[3])?)
}

/// A constant written in the expression grammar, such as `0.5-2*i`.
pub fn parse_constant(s: &str) -> Result<Complex64, CliError> {
    AnalyticExpr::parse(s)?
        .as_constant()
        .ok_or_else(|| CliError::input("InvalidParameter", format!("{s:?} is not a constant")))
}

/// The resolved surface together with a JSON description of it.
#[derive(Debug)]
pub struct Resolved {
    pub data: WeierstrassData,
    pub model: Option<ModelSurface>,
    pub describe: Value,
}

pub fn resolve_surface(a: &SurfaceArgs) -> Result<Resolved, CliError> {
    match (&a.surface, &a.gauss, &a.height) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::input(
            "InvalidParameter",
            "give either --surface or --G/--h, not both",
        )),
        (None, None, None) => Err(CliError::input("InvalidParameter", "a surface is required: --surface NAME or --G EXPR --h EXPR")),
        (None, Some(g), Some(h)) => {
            let dom = parse_domain(a.domain.as_deref().unwrap_or("-1,1,-1,1"))?;
            let data = WeierstrassData::new(AnalyticExpr::parse(g)?, AnalyticExpr::parse(h)?, dom)?;
            let describe = json!({ "G": data.gauss.to_string(), "h": data.height.to_string(), "domain": domain_json(&dom) });
            Ok(Resolved { data, model: None, describe })
        }
        (None, _, _) => Err(CliError::input("InvalidParameter", "--G and --h must be given together")),
        (Some(name), None, None) => {
            let t = a.t.unwrap_or(0.0);
            let t_used = if t.abs() < 1.0 && t.abs() > 1.0 - T_MARGIN { t.signum() * (1.0 - T_MARGIN) } else { t };
            let kind = match name.as_str() {
                "enneper" => ModelKind::Enneper { mu: a.mu.unwrap_or(std::f64::consts::FRAC_1_SQRT_2) },
                "catenoid" => ModelKind::Catenoid,
                "helicoid" => ModelKind::Helicoid,
                "deformed-catenoid" => ModelKind::DeformedCatenoid { t: t_used },
                "deformed-helicoid" => ModelKind::DeformedHelicoid { t: t_used },
                other => {
                    return Err(CliError::input("InvalidParameter", format!("unknown surface {other:?}")));
                }
            };
            let mut model = ModelSurface::new(kind)?;
            if let Some(d) = &a.domain {
                model = model.on_domain(parse_domain(d)?);
            }
            let mut describe = json!({
                "surface": model.name(),
                "G": model.data.gauss.to_string(),
                "h": model.data.height.to_string(),
                "domain": domain_json(&model.data.domain),
            });
            match kind {
                ModelKind::Enneper { mu } => describe["mu"] = json!(mu),
                ModelKind::DeformedCatenoid { t } | ModelKind::DeformedHelicoid { t } => describe["t"] = json!(t),
                _ => {}
            }
            Ok(Resolved { data: model.data.clone(), model: Some(model), describe })
        }
    }
}

pub fn domain_json(d: &RectDomain) -> Value {
    json!([d.x0, d.x1, d.y0, d.y1])
}
