//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::{Command, ExitCode};
use std::time::Instant;

use entropydiff::geomnum::{convergence_order, Grid, Quad2dOptions, ScalarField};
use entropydiff::hill::liouville_residual;
use entropydiff::integrate_surface::{period_vector, sample_mesh};
use entropydiff::jets::AnalyticExpr;
use entropydiff::models::{closed_form_vs_weierstrass, family_relation_residual, ModelKind, ModelSurface};
use entropydiff::verify::{
    curvature_decay_profile, ecritical_residual, hat_metric, helicoid_period_report, pole_probe_report,
    ricci_residual, soliton_check, weighted_entropy_norm, PROBE_RADII,
};
use entropydiff::weierstrass::{metric_sample, RectDomain, WeierstrassData};
use num_complex::Complex64;
use serde_json::Value;

type Outcome = Result<(bool, String), String>;

const ORIGIN: Complex64 = Complex64::new(0.0, 0.0);

fn model(kind: ModelKind) -> Result<ModelSurface, String> {
    ModelSurface::new(kind).map_err(|e| e.to_string())
}

fn data(g: &str, h: &str) -> Result<WeierstrassData, String> {
    let parse = |s: &str| AnalyticExpr::parse(s).map_err(|e| e.to_string());
    let dom = RectDomain::new(-1.0, 1.0, -1.0, 1.0).map_err(|e| e.to_string())?;
    WeierstrassData::new(parse(g)?, parse(h)?, dom).map_err(|e| e.to_string())
}

fn cli(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_entropydiff")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr).trim()));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn number(v: &Value) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("expected a number, got {v}"))
}

fn catenoid_norm() -> Outcome {
    let expected = 2.0 * 2f64.sqrt() * PI.powi(4);
    let start = Instant::now();
    let v = cli(&["norm", "--surface", "catenoid"])?;
    let secs = start.elapsed().as_secs_f64();
    let value = number(&v["value"])?;
    let rel = (value - expected).abs() / expected;
    Ok((rel < 1e-3 && secs < 5.0, format!("{value:.6} vs {expected:.6}, rel err {rel:.1e}, {secs:.2} s")))
}

fn family_relations() -> Outcome {
    let mut kinds = vec![ModelKind::Enneper { mu: FRAC_1_SQRT_2 }];
    for t in [-0.7, 0.0, 0.3, 0.9] {
        kinds.push(ModelKind::DeformedCatenoid { t });
        kinds.push(ModelKind::DeformedHelicoid { t });
    }
    let mut worst = (0.0f64, String::new());
    for kind in kinds {
        let m = model(kind)?;
        let grid = Grid::new(m.data.domain, 33, 33).map_err(|e| e.to_string())?;
        let r = family_relation_residual(&m, &grid).map_err(|e| e.to_string())?;
        if r >= worst.0 {
            worst = (r, format!("{kind:?}"));
        }
    }
    Ok((worst.0 < 1e-9, format!("max residual {:.1e} ({})", worst.0, worst.1)))
}

fn pole_coefficients() -> Outcome {
    let mut cases = Vec::new();
    for n in 1..=3 {
        let g = format!("1 + z^{}", n + 1);
        cases.push((format!("umbilic n={n}"), g, "1".to_string(), -((3 * n * n + 4 * n) as f64) / 8.0));
    }
    for (n, k) in [(1, 1), (2, 1), (3, 2), (1, 2)] {
        let expected = (((n + k + 1) * (n + k + 1) - 4 * k * k) as f64) / 8.0;
        cases.push((format!("branch n={n} k={k}"), format!("z^{k}"), format!("z^{}", n + k), expected));
    }
    let mut ok = true;
    let mut worst = 0.0f64;
    for (label, g, h, expected) in &cases {
        let r = pole_probe_report(&data(g, h)?, ORIGIN, &PROBE_RADII, *expected).map_err(|e| format!("{label}: {e}"))?;
        ok &= r.pass;
        worst = worst.max(r.stats.max_residual);
    }
    Ok((ok, format!("{} probes, max |c₋₂ − expected| {worst:.1e}", cases.len())))
}

fn residual_suites() -> Outcome {
    let deltas = [0.04, 0.02, 0.01];
    let surfaces = [
        ("catenoid", model(ModelKind::Catenoid)?.data),
        ("helicoid", model(ModelKind::Helicoid)?.data),
        ("enneper", model(ModelKind::Enneper { mu: FRAC_1_SQRT_2 })?.data),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, d) in &surfaces {
        for suite in ["ricci", "ecritical", "liouville"] {
            let mut errs = Vec::new();
            for &h in &deltas {
                let grid = Grid::with_spacing(d.domain, h).map_err(|e| e.to_string())?;
                let e = match suite {
                    "ricci" => ricci_residual(d, grid).map_err(|e| e.to_string())?.stats.max_residual,
                    "ecritical" => ecritical_residual(d, grid).map_err(|e| e.to_string())?.stats.max_residual,
                    _ => {
                        // every catalog surface here has |q| = 1, so u = -¼ log|K| solves Liouville directly
                        let u = ScalarField::try_from_fn(grid, |z| Ok(metric_sample(d, z)?.u)).map_err(|e| e.to_string())?;
                        liouville_residual(&u).map_err(|e| e.to_string())?.max
                    }
                };
                errs.push(e);
            }
            let order = convergence_order(&deltas, &errs);
            let pass = (order - 2.0).abs() <= 0.2 && errs[2] < 1e-3;
            ok &= pass;
            if !pass {
                parts.push(format!("{name}/{suite} failed: order {order:.2}, max {:.1e} at δ=0.01", errs[2]));
            }
        }
    }
    if parts.is_empty() {
        parts.push("9 suites at order 2 within 0.2, max < 1e-3 at δ=0.01".into());
    }
    Ok((ok, parts.join("; ")))
}

fn hill_round_trip() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let mut ok = true;
    for rho in ["0", "-1", "-i", "z"] {
        let v = cli(&["reconstruct", &format!("--rho={rho}")])?;
        let c = &v["checks"];
        let err = number(&c["roundtrip_rho_max_error"])?;
        let drift = number(&c["wronskian_drift"])?;
        ok &= c["roundtrip_samples"] == 50 && err < 1e-6 && drift < 1e-10;
        worst = (worst.0.max(err), worst.1.max(drift));
    }
    Ok((ok, format!("max ρ error {:.1e}, max Wronskian drift {:.1e}", worst.0, worst.1)))
}

fn two_pipelines() -> Outcome {
    let dom = RectDomain::new(-1.0, 1.0, 0.0, PI).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for kind in [
        ModelKind::DeformedCatenoid { t: 0.0 },
        ModelKind::DeformedHelicoid { t: 0.0 },
        ModelKind::DeformedCatenoid { t: 0.5 },
    ] {
        let m = model(kind)?.on_domain(dom);
        let grid = Grid::new(dom, 33, 33).map_err(|e| e.to_string())?;
        worst = worst.max(closed_form_vs_weierstrass(&m, &grid, ORIGIN).map_err(|e| e.to_string())?);
    }
    let c = model(ModelKind::DeformedCatenoid { t: 0.5 })?.data;
    let v = period_vector(&c, &[ORIGIN, Complex64::new(0.0, 2.0 * PI)]).map_err(|e| e.to_string())?;
    let want = [0.0, -8.0 * PI / 3.0, 0.0];
    let perr = (0..3).map(|k| (v[k] - want[k]).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-6 && perr < 1e-6, format!("surface distance {worst:.1e}, period error {perr:.1e}")))
}

fn soliton_correspondence() -> Outcome {
    let enn = model(ModelKind::Enneper { mu: FRAC_1_SQRT_2 })?.data;
    let grid = Grid::with_spacing(enn.domain, 0.01).map_err(|e| e.to_string())?;
    let r = soliton_check(&enn, grid).map_err(|e| e.to_string())?;
    let mut ratio_err = 0.0f64;
    for z in grid.points() {
        let (lam, _) = hat_metric(&enn, z).map_err(|e| e.to_string())?;
        ratio_err = ratio_err.max((lam * (1.0 + z.norm_sqr()) / 2.0 - 1.0).abs());
    }
    let cat = model(ModelKind::Catenoid)?.data;
    let control = soliton_check(&cat, Grid::with_spacing(cat.domain, 0.01).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let ok = r.pass && r.stats.max_residual < 1e-3 && ratio_err < 1e-9 && !control.pass;
    Ok((
        ok,
        format!(
            "Enneper residual {:.1e} (pass={}), cigar ratio error {ratio_err:.1e}, catenoid residual {:.1e} (pass={})",
            r.stats.max_residual, r.pass, control.stats.max_residual, control.pass
        ),
    ))
}

fn scale_invariance() -> Outcome {
    let d = model(ModelKind::DeformedCatenoid { t: 0.3 })?.data;
    let opts = Quad2dOptions::default();
    let base = weighted_entropy_norm(&d, d.domain, opts).map_err(|e| e.to_string())?.value;
    let mut worst = 0.0f64;
    for s in [0.5, 2.0, 10.0] {
        let v = weighted_entropy_norm(&d.scaled(s), d.domain, opts).map_err(|e| e.to_string())?.value;
        worst = worst.max((v - base).abs() / base.abs());
    }
    Ok((worst < 1e-8, format!("norm {base:.6} on C_0.3, max relative change {worst:.1e}")))
}

fn substitutes(norm_ok: bool, scale_ok: bool) -> Outcome {
    let cat = model(ModelKind::Catenoid)?.data;
    let mesh = sample_mesh(&cat, 65, 65).map_err(|e| e.to_string())?;
    // one period without the repeated row: the centroid sits on the axis at the waist
    let ring = &mesh.positions[..65 * 64];
    let center = [0, 1, 2].map(|c| ring.iter().map(|p| p[c]).sum::<f64>() / ring.len() as f64);
    let prof = curvature_decay_profile(&mesh, center, 16);
    let peak = prof.iter().map(|p| p.value).fold(0.0, f64::max);
    let bounded = prof.iter().all(|p| p.value.is_finite()) && peak <= 2.0 + 1e-6;
    Ok((
        norm_ok && scale_ok && bounded,
        format!(
            "non-constructive constants; substituted by criteria 1 ({}) and 8 ({}) and the catenoid decay profile (sup |A|²r² = {peak:.6}, bound 2)",
            verdict(norm_ok),
            verdict(scale_ok)
        ),
    ))
}

fn helicoid_periods() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [0.2, 0.5] {
        let d = model(ModelKind::DeformedHelicoid { t })?.data;
        let r = helicoid_period_report(&d, t).map_err(|e| e.to_string())?;
        ok &= r.pass;
        parts.push(format!("t={t}: Δx₃ {:.9} matches {}", r.stats.fitted["period_x3"], r.params["matched"]));
    }
    Ok((ok, parts.join("; ")))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "catenoid weighted norm", catenoid_norm()),
        (2, "model-family relations", family_relations()),
        (3, "pole coefficients", pole_coefficients()),
        (4, "Ricci/E-critical/Liouville residual suites", residual_suites()),
        (5, "Hill round trip", hill_round_trip()),
        (6, "two-pipeline surface equality", two_pipelines()),
        (7, "soliton correspondence", soliton_correspondence()),
        (8, "scale invariance", scale_invariance()),
    ];
    let passed = |n: u32, r: &[(u32, &str, Outcome)]| r.iter().any(|(k, _, o)| *k == n && matches!(o, Ok((true, _))));
    let (c1, c8) = (passed(1, &results), passed(8, &results));
    results.push((9, "curvature decay substitutes", substitutes(c1, c8)));
    results.push((10, "deformed helicoid period", helicoid_periods()));
    let mut all = true;
    for (n, title, outcome) in &results {
        let (pass, detail) = match outcome {
            Ok((p, d)) => (*p, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!("criterion {n:>2} {}: {title}: {detail}", verdict(pass));
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
