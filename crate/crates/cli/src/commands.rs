use std::collections::BTreeMap;
use std::io::BufWriter;

use entropydiff::geomnum::{Grid, Quad2dOptions};
use entropydiff::hill::{liouville_residual, reconstruct_sample, roundtrip_rho, solve_grid, HillSystem};
use entropydiff::integrate_surface::{mesh_from_hill, period_vector, sample_mesh, sidecar_json, write_obj, SurfaceMesh};
use entropydiff::jets::AnalyticExpr;
use entropydiff::models::{closed_form_vs_weierstrass, family_relation_residual, ModelKind};
use entropydiff::verify::{
    ecritical_residual, helicoid_period_report, pole_probe_report, ricci_residual, soliton_check, Report, PROBE_RADII,
};
use entropydiff::weierstrass::{
    entropy_coefficient, entropy_form_norms, hopf_coefficient, metric_sample, RectDomain, WeierstrassData,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{num, nums, SCHEMA};
use crate::inputs::{domain_json, parse_constant, parse_domain, parse_grid, resolve_surface, CliError, Resolved};
use crate::{AnalyzeArgs, MeshArgs, NormArgs, ReconstructArgs, VerifyArgs};

/// Interior points used for the reconstruction round trip.
const ROUNDTRIP_SAMPLES: usize = 50;
const FAMILY_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-6;
const DEFAULT_X_CUT: f64 = 20.0;

struct NodeSample {
    lambda_sq: f64,
    k: f64,
    q: Option<Complex64>,
    rho: Option<Complex64>,
    t: f64,
    that: f64,
    failure: Option<&'static str>,
}

fn sample_node(data: &WeierstrassData, z: Complex64) -> NodeSample {
    let mut failure = None;
    let (lambda_sq, k) = match metric_sample(data, z) {
        Ok(m) => (m.lambda_sq, m.k),
        Err(e) => {
            failure = Some(e.code());
            (f64::NAN, f64::NAN)
        }
    };
    let q = hopf_coefficient(data, z).ok();
    let rho = match entropy_coefficient(data, z) {
        Ok(r) => Some(r),
        Err(e) => {
            failure.get_or_insert(e.code());
            None
        }
    };
    let (t, that) = entropy_form_norms(data, z).unwrap_or((f64::NAN, f64::NAN));
    NodeSample { lambda_sq, k, q, rho, t, that, failure }
}

fn finite_max(v: impl Iterator<Item = f64>) -> f64 {
    v.filter(|x| x.is_finite()).fold(f64::NAN, f64::max)
}

fn finite_min(v: impl Iterator<Item = f64>) -> f64 {
    v.filter(|x| x.is_finite()).fold(f64::NAN, f64::min)
}

fn grid_json(g: &Grid, d: &RectDomain) -> Value {
    json!({ "nx": g.nx, "ny": g.ny, "domain": domain_json(d) })
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Value, CliError> {
    let Resolved { data, describe, .. } = resolve_surface(&a.surface)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let grid = Grid::new(data.domain, nx, ny)?;
    let pts: Vec<Complex64> = grid.points().collect();
    let s: Vec<NodeSample> = pts.par_iter().map(|&z| sample_node(&data, z)).collect();
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    for n in &s {
        if let Some(code) = n.failure {
            *failures.entry(code.to_string()).or_default() += 1;
        }
    }
    let re = |v: Option<Complex64>| v.map_or(f64::NAN, |c| c.re);
    let im = |v: Option<Complex64>| v.map_or(f64::NAN, |c| c.im);
    let summary = json!({
        "K_min": num(finite_min(s.iter().map(|n| n.k))),
        "K_max": num(finite_max(s.iter().map(|n| n.k))),
        "lambda_sq_min": num(finite_min(s.iter().map(|n| n.lambda_sq))),
        "lambda_sq_max": num(finite_max(s.iter().map(|n| n.lambda_sq))),
        "max_abs_q": num(finite_max(s.iter().map(|n| n.q.map_or(f64::NAN, |q| q.norm())))),
        "max_abs_rho": num(finite_max(s.iter().map(|n| n.rho.map_or(f64::NAN, |r| r.norm())))),
        "max_T": num(finite_max(s.iter().map(|n| n.t))),
        "max_That": num(finite_max(s.iter().map(|n| n.that))),
        "singular_nodes": failures,
    });
    let fields = json!({
        "x": nums(pts.iter().map(|z| z.re)),
        "y": nums(pts.iter().map(|z| z.im)),
        "lambda_sq": nums(s.iter().map(|n| n.lambda_sq)),
        "K": nums(s.iter().map(|n| n.k)),
        "q_re": nums(s.iter().map(|n| re(n.q))),
        "q_im": nums(s.iter().map(|n| im(n.q))),
        "rho_re": nums(s.iter().map(|n| re(n.rho))),
        "rho_im": nums(s.iter().map(|n| im(n.rho))),
        "T": nums(s.iter().map(|n| n.t)),
        "That": nums(s.iter().map(|n| n.that)),
    });
    Ok(json!({
        "schema": SCHEMA,
        "command": "analyze",
        "input": describe,
        "grid": grid_json(&grid, &data.domain),
        "summary": summary,
        "fields": fields,
    }))
}

/// Deterministic low-discrepancy points in the middle 60% of the domain.
fn interior_samples(d: &RectDomain, count: usize) -> Vec<Complex64> {
    const A: f64 = 0.618_033_988_749_894_8;
    const B: f64 = 0.754_877_666_246_692_7;
    (0..count)
        .map(|k| {
            let u = (0.5 + A * k as f64).fract();
            let v = (0.5 + B * k as f64).fract();
            Complex64::new(d.x0 + d.width() * (0.2 + 0.6 * u), d.y0 + d.height() * (0.2 + 0.6 * v))
        })
        .collect()
}

fn hill_system(a: &ReconstructArgs, rho: &AnalyticExpr, dom: &RectDomain) -> Result<(HillSystem, Value), CliError> {
    let constant_rho = rho.as_constant();
    if let Some(mu) = a.mu {
        if constant_rho != Some(Complex64::new(0.0, 0.0)) {
            return Err(CliError::input("InvalidParameter", "--mu selects the pair for rho = 0"));
        }
        let nu = parse_constant(a.nu.as_deref().unwrap_or("0"))?;
        return Ok((HillSystem::enneper(mu, nu)?, json!({ "pair": "enneper", "mu": mu, "nu": [nu.re, nu.im] })));
    }
    if a.phi.is_some() || a.alpha.is_some() {
        let r = constant_rho
            .ok_or_else(|| CliError::input("InvalidParameter", "--phi/--alpha select the pair for constant rho = -alpha^2"))?;
        let alpha = match &a.alpha {
            Some(s) => parse_constant(s)?,
            None => (-r).sqrt(),
        };
        if (alpha * alpha + r).norm() > 1e-12 * (1.0 + r.norm()) {
            return Err(CliError::input("InvalidParameter", format!("rho = {r} is not -alpha^2 for alpha = {alpha}")));
        }
        let phi = a.phi.unwrap_or(0.0);
        return Ok((
            HillSystem::normal_form(alpha, phi)?,
            json!({ "pair": "normal-form", "alpha": [alpha.re, alpha.im], "phi": phi }),
        ));
    }
    let base = Complex64::new(0.5 * (dom.x0 + dom.x1), 0.5 * (dom.y0 + dom.y1));
    Ok((HillSystem::canonical(rho.clone(), base), json!({ "pair": "canonical", "base": [base.re, base.im] })))
}

pub fn reconstruct(a: &ReconstructArgs) -> Result<Value, CliError> {
    let rho = AnalyticExpr::parse(&a.rho)?;
    let dom = parse_domain(&a.domain)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let grid = Grid::new(dom, nx, ny)?;
    let (sys, pair) = hill_system(a, &rho, &dom)?;
    let hg = solve_grid(&sys, grid)?;
    let recon: Vec<_> = hg.samples.iter().map(reconstruct_sample).collect();
    let trips = interior_samples(&dom, ROUNDTRIP_SAMPLES)
        .into_par_iter()
        .map(|z| roundtrip_rho(&sys, z))
        .collect::<Result<Vec<_>, _>>()?;
    let rt_max = trips.iter().map(|t| (t.rho_out - t.rho_in).norm()).fold(0.0, f64::max);
    let rt_drift = trips.iter().map(|t| t.drift).fold(0.0, f64::max);
    let liouville = liouville_residual(&hg.u_field())?;
    let mut checks = json!({
        "roundtrip_samples": trips.len(),
        "roundtrip_rho_max_error": rt_max,
        "wronskian_drift": hg.wronskian_drift.max(rt_drift),
        "liouville_max_residual": num(liouville.max),
    });
    if let (Some(mu), Some(nu)) = (a.mu, pair.get("nu")) {
        let nu = Complex64::new(nu[0].as_f64().unwrap_or(0.0), nu[1].as_f64().unwrap_or(0.0));
        let err = recon
            .iter()
            .map(|r| r.gauss.map_or(f64::INFINITY, |g| (g - (nu / mu + r.z / (2.0 * mu * mu))).norm()))
            .fold(0.0, f64::max);
        checks["enneper_gauss_max_error"] = num(err);
    }
    if let Some(path) = &a.obj {
        let mesh = mesh_from_hill(&hg, &rho);
        write_mesh(&mesh, path)?;
    }
    let g = |f: fn(Complex64) -> f64| nums(recon.iter().map(move |r| r.gauss.map_or(f64::NAN, f)));
    Ok(json!({
        "schema": SCHEMA,
        "command": "reconstruct",
        "input": { "rho": rho.to_string(), "domain": domain_json(&dom), "initial": pair },
        "hopf_convention": { "name": "PlusDzSquared", "q": 1.0 },
        "grid": grid_json(&grid, &dom),
        "checks": checks,
        "samples": {
            "x": nums(recon.iter().map(|r| r.z.re)),
            "y": nums(recon.iter().map(|r| r.z.im)),
            "G_re": g(|c| c.re),
            "G_im": g(|c| c.im),
            "h_re": nums(recon.iter().map(|r| r.height.re)),
            "h_im": nums(recon.iter().map(|r| r.height.im)),
            "lambda_sq": nums(recon.iter().map(|r| r.metric)),
        },
    }))
}

fn model_required(r: &Resolved, check: &str) -> Result<(), CliError> {
    if r.model.is_none() {
        return Err(CliError::input("InvalidParameter", format!("check {check:?} needs a catalog --surface")));
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<Value, CliError> {
    let r = resolve_surface(&a.surface)?;
    let data = &r.data;
    let dom = data.domain;
    let stencil_grid = match &a.grid {
        Some(g) => {
            let (nx, ny) = parse_grid(g)?;
            Grid::new(dom, nx, ny)?
        }
        None => Grid::with_spacing(dom, a.delta)?,
    };
    let sample_grid = match &a.grid {
        Some(_) => stencil_grid,
        None => Grid::new(dom, 33, 33)?,
    };
    let mut names: Vec<&str> = a.checks.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    names.sort_unstable();
    names.dedup();
    if names.is_empty() {
        return Err(CliError::input("InvalidParameter", "no checks requested"));
    }
    let mut reports = Vec::new();
    for name in names {
        let rep = match name {
            "ricci" => ricci_residual(data, stencil_grid)?,
            "ecritical" => ecritical_residual(data, stencil_grid)?,
            "soliton" => soliton_check(data, stencil_grid)?,
            "family" => {
                model_required(&r, name)?;
                let m = r.model.as_ref().expect("checked");
                Report::scalar("family_relation", family_relation_residual(m, &sample_grid)?, FAMILY_TOL)
            }
            "closed-form" => {
                model_required(&r, name)?;
                let m = r.model.as_ref().expect("checked");
                let origin = Complex64::new(0.0, 0.0);
                let anchor = if dom.contains(origin) { origin } else { Complex64::new(dom.x0, dom.y0) };
                let d = closed_form_vs_weierstrass(m, &sample_grid, anchor)?;
                Report::scalar("closed_form_vs_weierstrass", d, CLOSED_FORM_TOL).with_param("anchor", vec![anchor.re, anchor.im])
            }
            "period" => {
                model_required(&r, name)?;
                let m = r.model.as_ref().expect("checked");
                match m.kind {
                    ModelKind::DeformedHelicoid { t } => helicoid_period_report(data, t)?,
                    ModelKind::Helicoid => helicoid_period_report(data, 0.0)?,
                    _ => {
                        let p = data.periodic_y.ok_or_else(|| {
                            CliError::input("InvalidParameter", "the period check needs a surface on a strip quotient")
                        })?;
                        let v = period_vector(data, &[Complex64::new(0.0, 0.0), Complex64::new(0.0, p)])?;
                        let (f0, f1) = (m.closed_form_point(0.0, 0.0), m.closed_form_point(0.0, p));
                        let err = (0..3).map(|k| (v[k] - (f1[k] - f0[k])).abs()).fold(0.0, f64::max);
                        Report::scalar("period", err, CLOSED_FORM_TOL)
                            .with_fitted("period_x1", v[0])
                            .with_fitted("period_x2", v[1])
                            .with_fitted("period_x3", v[2])
                    }
                }
            }
            "pole" => {
                let center = parse_constant(a.center.as_deref().unwrap_or("0"))?;
                let expected = a
                    .expected
                    .ok_or_else(|| CliError::input("InvalidParameter", "the pole check needs --expected"))?;
                pole_probe_report(data, center, &PROBE_RADII, expected)?
            }
            other => return Err(CliError::input("InvalidParameter", format!("unknown check {other:?}"))),
        };
        reports.push(rep);
    }
    let all_pass = reports.iter().all(|r| r.pass);
    Ok(json!({
        "schema": SCHEMA,
        "command": "verify",
        "input": r.describe,
        "grid": grid_json(&stencil_grid, &dom),
        "reports": reports,
        "all_pass": all_pass,
    }))
}

pub fn norm(a: &NormArgs) -> Result<Value, CliError> {
    let r = resolve_surface(&a.surface)?;
    let d = r.data.domain;
    let dom = match (&a.surface.domain, r.data.periodic_y, a.x_cut) {
        (Some(_), _, None) => d,
        (_, Some(p), x) => {
            let x = x.unwrap_or(DEFAULT_X_CUT);
            RectDomain::new(-x, x, d.y0, d.y0 + p)?
        }
        (_, None, Some(x)) => RectDomain::new(-x, x, d.y0, d.y1)?,
        (None, None, None) => d,
    };
    let opts = Quad2dOptions { tol: a.tol, ..Default::default() };
    let q = entropydiff::verify::weighted_entropy_norm(&r.data, dom, opts)?;
    Ok(json!({
        "schema": SCHEMA,
        "command": "norm",
        "input": r.describe,
        "domain": domain_json(&dom),
        "value": q.value,
        "error_estimate": q.error,
        "panels": q.panels,
    }))
}

fn write_mesh(mesh: &SurfaceMesh, path: &std::path::Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_obj(mesh, BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

pub fn mesh(a: &MeshArgs) -> Result<Value, CliError> {
    let r = resolve_surface(&a.surface)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let mesh = sample_mesh(&r.data, nx, ny)?;
    write_mesh(&mesh, &a.obj)?;
    let moved = mesh.params.iter().zip(mesh.grid.points()).filter(|(p, z)| *p != z).count();
    Ok(json!({
        "schema": SCHEMA,
        "command": "mesh",
        "input": r.describe,
        "obj": a.obj.display().to_string(),
        "vertices": mesh.positions.len(),
        "triangles": mesh.triangles.len(),
        "perturbed_nodes": moved,
        "fields": sidecar_json(&mesh),
    }))
}
