//! Identity checks on minimal surface metrics and their conformal
//! relatives, each summarized as a serializable [`Report`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geomnum::{
    integrate2d, laplacian_conformal, residual_stats, tracefree_hessian_conformal, ConformalMetricField, Grid,
    Quad2dOptions, Quadrature, ResidualStats, ScalarField,
};
use crate::integrate_surface::{period_vector, SurfaceMesh};
use crate::weierstrass::{entropy_coefficient, entropy_form_norms, hopf_coefficient, metric_sample, RectDomain, WeierstrassData};

/// Pass thresholds shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Stencil checks pass when the max residual is below `stencil_constant · δ²`.
    pub stencil_constant: f64,
    pub pointwise: f64,
    pub pole_coefficient: f64,
    pub richardson: f64,
    pub period: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    stencil_constant: 10.0,
    pointwise: 1e-9,
    pole_coefficient: 1e-4,
    richardson: 1e-6,
    period: 1e-6,
};

impl Tolerances {
    pub fn stencil(&self, delta: f64) -> f64 {
        self.stencil_constant * delta * delta
    }
}

/// Umbilic exclusion radius in units of the grid spacing.
pub const UMBILIC_GUARD: f64 = 3.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportStats {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub count: usize,
    pub fitted: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub stats: ReportStats,
    pub tol: f64,
    pub pass: bool,
}

impl Report {
    fn new(check: &str, stats: ReportStats, tol: f64) -> Self {
        let pass = stats.max_residual <= tol;
        Report { check: check.to_string(), params: BTreeMap::new(), stats, tol, pass }
    }

    fn from_residual(check: &str, r: &ResidualStats, tol: f64) -> Self {
        let mut fitted = BTreeMap::new();
        fitted.insert("argmax_re".to_string(), r.argmax_re);
        fitted.insert("argmax_im".to_string(), r.argmax_im);
        Report::new(check, ReportStats { max_residual: r.max, mean_residual: r.mean, count: r.count, fitted }, tol)
    }

    /// Report for a single measured deviation.
    pub fn scalar(check: &str, value: f64, tol: f64) -> Self {
        let stats = ReportStats { max_residual: value, mean_residual: value, count: 1, fitted: BTreeMap::new() };
        Report::new(check, stats, tol)
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_fitted(mut self, key: &str, value: f64) -> Self {
        self.stats.fitted.insert(key.to_string(), value);
        self
    }
}

/// Metric and curvature sampled on a grid, with the points around which
/// stencil residuals are not trusted.
#[derive(Debug, Clone)]
pub struct SurfaceFields {
    pub metric: ConformalMetricField,
    pub k: ScalarField,
    /// Nodes that are umbilic or singular, and centers of cells around which
    /// the Hopf coefficient winds.
    pub excluded: Vec<Complex64>,
}

impl SurfaceFields {
    /// `true` when `z` is farther than the guard radius from every excluded point.
    pub fn admissible(&self, z: Complex64) -> bool {
        let r = UMBILIC_GUARD * self.metric.grid.delta();
        self.excluded.iter().all(|e| (z - e).norm() > r)
    }
}

/// `(λ², K)` where the metric is usable, and the Hopf coefficient.
type NodeSample = (Option<(f64, f64)>, Option<Complex64>);

pub fn surface_fields(data: &WeierstrassData, grid: Grid) -> Result<SurfaceFields> {
    let pts: Vec<Complex64> = grid.points().collect();
    let samples: Vec<NodeSample> = pts
        .par_iter()
        .map(|&z| {
            let m = metric_sample(data, z).ok().filter(|m| m.k != 0.0 && m.k.is_finite() && m.lambda_sq > 0.0);
            (m.map(|m| (m.lambda_sq, m.k)), hopf_coefficient(data, z).ok())
        })
        .collect();
    let mut excluded: Vec<Complex64> = pts
        .iter()
        .zip(&samples)
        .filter(|(_, s)| s.0.is_none())
        .map(|(z, _)| *z)
        .collect();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let ring = [grid.index(i, j), grid.index(i + 1, j), grid.index(i + 1, j + 1), grid.index(i, j + 1)];
            let qs: Option<Vec<Complex64>> = ring.iter().map(|&k| samples[k].1).collect();
            if let Some(qs) = qs {
                let turn: f64 = (0..4).map(|a| (qs[(a + 1) % 4] / qs[a]).arg()).sum();
                if turn.abs() > PI {
                    excluded.push(grid.point(i, j) + Complex64::new(0.5 * grid.hx, 0.5 * grid.hy));
                }
            }
        }
    }
    let lambda_sq = samples.iter().map(|s| s.0.map_or(1.0, |m| m.0)).collect();
    let k = samples.iter().map(|s| s.0.map_or(f64::NAN, |m| m.1)).collect();
    Ok(SurfaceFields {
        metric: ConformalMetricField::new(grid, lambda_sq)?,
        k: ScalarField { grid, values: k },
        excluded,
    })
}

/// Conformal factor and curvature of `ĝ = |K|^{3/4} g` at `z`:
/// `λ̂² = |K|^{3/4} λ²` and `K_ĝ = ½ |K|^{1/4}`.
pub fn hat_metric(data: &WeierstrassData, z: Complex64) -> Result<(f64, f64)> {
    let m = metric_sample(data, z)?;
    if m.k == 0.0 {
        return Err(Error::ZeroCurvature(z));
    }
    let a = m.k.abs();
    Ok((a.powf(0.75) * m.lambda_sq, 0.5 * a.powf(0.25)))
}

fn hat_fields(f: &SurfaceFields) -> Result<(ConformalMetricField, ScalarField)> {
    let grid = f.metric.grid;
    let lam: Vec<f64> = f
        .metric
        .lambda_sq
        .iter()
        .zip(&f.k.values)
        .map(|(l, k)| if k.is_finite() { k.abs().powf(0.75) * l } else { 1.0 })
        .collect();
    let k = f.k.map(|k| 0.5 * k.abs().powf(0.25));
    Ok((ConformalMetricField::new(grid, lam)?, k))
}

/// `Δ_g log|K| - 4K` on the grid, away from umbilics.
pub fn ricci_residual(data: &WeierstrassData, grid: Grid) -> Result<Report> {
    let f = surface_fields(data, grid)?;
    let logk = f.k.map(|k| k.abs().ln());
    let lap = laplacian_conformal(&logk, &f.metric)?;
    let res = lap.zip_map(&f.k, |l, k| (l - 4.0 * k).abs())?;
    let stats = residual_stats(&res, |z| f.admissible(z))?;
    Ok(Report::from_residual("ricci", &stats, TOLERANCES.stencil(grid.delta()))
        .with_param("delta", grid.delta())
        .with_param("excluded", f.excluded.len()))
}

/// The same residual for a bare metric, with `K` measured by stencil.
pub fn ricci_residual_metric(m: &ConformalMetricField) -> Result<Report> {
    let k = m.curvature();
    let logk = k.map(|k| k.abs().ln());
    let lap = laplacian_conformal(&logk, m)?;
    let res = lap.zip_map(&k, |l, k| (l - 4.0 * k).abs())?;
    let g = m.grid;
    let stats = residual_stats(&res, |_| true)?;
    Ok(Report::from_residual("ricci", &stats, TOLERANCES.stencil(g.delta())).with_param("delta", g.delta()))
}

/// The map `g ↦ g_α = |K|^{2α} g` on metrics with `Δ_g log|K| = C K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalPowerMap {
    pub c: f64,
    pub alpha: f64,
}

impl ConformalPowerMap {
    /// `α = 1/C`, where the image metrics are flat.
    pub fn is_flat(&self) -> bool {
        (self.alpha * self.c - 1.0).abs() < 1e-14
    }

    /// `C_α = (2α - 1)/(α - 1/C)`; `None` in the flat case.
    pub fn c_alpha(&self) -> Option<f64> {
        (!self.is_flat()).then(|| (2.0 * self.alpha - 1.0) / (self.alpha - 1.0 / self.c))
    }

    /// `K_{g_α} = (1 - Cα) |K|^{-2α} K`.
    pub fn curvature(&self, k: f64) -> f64 {
        (1.0 - self.c * self.alpha) * k.abs().powf(-2.0 * self.alpha) * k
    }
}

#[derive(Debug, Clone)]
pub struct ConformalPowerResult {
    pub metric: ConformalMetricField,
    pub k: ScalarField,
    pub c_alpha: Option<f64>,
    /// `|K_stencil - K_formula|` for the new metric.
    pub discrepancy: ResidualStats,
}

pub fn conformal_power(
    metric: &ConformalMetricField,
    k: &ScalarField,
    map: ConformalPowerMap,
) -> Result<ConformalPowerResult> {
    if !metric.grid.same_as(&k.grid) {
        return Err(Error::GridMismatch);
    }
    if let Some(idx) = k.values.iter().position(|&v| v == 0.0) {
        let g = metric.grid;
        return Err(Error::ZeroCurvature(g.point(idx % g.nx, idx / g.nx)));
    }
    let lam: Vec<f64> = metric
        .lambda_sq
        .iter()
        .zip(&k.values)
        .map(|(l, kv)| kv.abs().powf(2.0 * map.alpha) * l)
        .collect();
    let new_metric = ConformalMetricField::new(metric.grid, lam)?;
    let new_k = k.map(|v| map.curvature(v));
    let diff = new_metric.curvature().zip_map(&new_k, |a, b| (a - b).abs())?;
    let discrepancy = residual_stats(&diff, |_| true)?;
    Ok(ConformalPowerResult { metric: new_metric, k: new_k, c_alpha: map.c_alpha(), discrepancy })
}

/// `Δ_ĝ log K_ĝ + 2 K_ĝ` for `ĝ = |K|^{3/4} g`.
pub fn ecritical_residual(data: &WeierstrassData, grid: Grid) -> Result<Report> {
    let f = surface_fields(data, grid)?;
    let (m, k) = hat_fields(&f)?;
    let lap = laplacian_conformal(&k.map(f64::ln), &m)?;
    let res = lap.zip_map(&k, |l, k| (l + 2.0 * k).abs())?;
    let stats = residual_stats(&res, |z| f.admissible(z))?;
    Ok(Report::from_residual("ecritical", &stats, TOLERANCES.stencil(grid.delta())).with_param("delta", grid.delta()))
}

/// `∫ K log K dμ` for a positively curved metric given pointwise.
pub fn entropy_functional<K, L>(k: K, lambda_sq: L, domain: RectDomain, opts: Quad2dOptions) -> Result<Quadrature>
where
    K: Fn(Complex64) -> Result<f64> + Sync,
    L: Fn(Complex64) -> Result<f64> + Sync,
{
    integrate2d(
        |z| {
            let kv = k(z)?;
            if !(kv > 0.0) {
                return Err(Error::NonpositiveCurvature(z));
            }
            Ok(kv * kv.ln() * lambda_sq(z)?)
        },
        domain,
        opts,
    )
}

/// The entropy functional of `ĝ = |K|^{3/4} g` for a minimal surface metric.
pub fn entropy_functional_hat(data: &WeierstrassData, domain: RectDomain, opts: Quad2dOptions) -> Result<Quadrature> {
    entropy_functional(|z| Ok(hat_metric(data, z)?.1), |z| Ok(hat_metric(data, z)?.0), domain, opts)
}

pub const PROBE_POINTS: usize = 256;
pub const PROBE_RADII: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Debug, Clone, PartialEq)]
pub struct PoleProbe {
    /// Coefficient of `(z - center)^{-2}` in `ρ/2`, extrapolated to zero radius.
    pub c_minus2: Complex64,
    pub c_minus1: Complex64,
    /// `(radius, c₋₂, c₋₁)` for each circle.
    pub per_radius: Vec<(f64, Complex64, Complex64)>,
    /// Largest deviation of a single circle's `c₋₂` from the extrapolated value.
    pub spread: f64,
}

/// Fits the `(z - center)^{-2}` and `(z - center)^{-1}` coefficients of `ρ/2`
/// by trapezoidal contour integrals over circles of the given radii.
pub fn pole_probe(data: &WeierstrassData, center: Complex64, radii: &[f64]) -> Result<PoleProbe> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter("probe radii must be positive".into()));
    }
    let per_radius: Vec<(f64, Complex64, Complex64)> = radii
        .par_iter()
        .map(|&r| {
            let mut c2 = Complex64::new(0.0, 0.0);
            let mut c1 = Complex64::new(0.0, 0.0);
            for j in 0..PROBE_POINTS {
                let w = Complex64::from_polar(r, 2.0 * PI * j as f64 / PROBE_POINTS as f64);
                let p = 0.5 * entropy_coefficient(data, center + w).map_err(|_| Error::PoleOnCircle { radius: r })?;
                if !(p.re.is_finite() && p.im.is_finite()) {
                    return Err(Error::PoleOnCircle { radius: r });
                }
                c2 += p * w * w;
                c1 += p * w;
            }
            let n = PROBE_POINTS as f64;
            Ok((r, c2 / n, c1 / n))
        })
        .collect::<Result<_>>()?;
    let mut sorted = per_radius.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let extrapolate = |pick: fn(&(f64, Complex64, Complex64)) -> Complex64| -> Complex64 {
        if sorted.len() < 2 {
            return pick(&sorted[0]);
        }
        let (s, b) = (&sorted[0], &sorted[1]);
        let (rs, rb) = (s.0 * s.0, b.0 * b.0);
        (pick(s) * rb - pick(b) * rs) / (rb - rs)
    };
    let c_minus2 = extrapolate(|t| t.1);
    let c_minus1 = extrapolate(|t| t.2);
    let spread = per_radius.iter().map(|t| (t.1 - c_minus2).norm()).fold(0.0, f64::max);
    Ok(PoleProbe { c_minus2, c_minus1, per_radius, spread })
}

/// Compares a probe with an expected `c₋₂`.
pub fn pole_probe_report(data: &WeierstrassData, center: Complex64, radii: &[f64], expected: f64) -> Result<Report> {
    let p = pole_probe(data, center, radii)?;
    let err = (p.c_minus2 - expected).norm();
    let mut rep = Report::new(
        "pole_probe",
        ReportStats { max_residual: err, mean_residual: err, count: radii.len(), fitted: BTreeMap::new() },
        TOLERANCES.pole_coefficient,
    )
    .with_param("center_re", center.re)
    .with_param("center_im", center.im)
    .with_param("expected_c_minus2", expected)
    .with_fitted("c_minus2_re", p.c_minus2.re)
    .with_fitted("c_minus2_im", p.c_minus2.im)
    .with_fitted("c_minus1_re", p.c_minus1.re)
    .with_fitted("c_minus1_im", p.c_minus1.im)
    .with_fitted("spread", p.spread);
    rep.pass = rep.pass && p.spread <= TOLERANCES.richardson;
    Ok(rep)
}

/// `(∫ |T̂|_g^{1/2} dμ_g)²`, with `|T̂|` continued across umbilics.
pub fn weighted_entropy_norm(data: &WeierstrassData, domain: RectDomain, opts: Quad2dOptions) -> Result<Quadrature> {
    let q = integrate2d(
        |z| {
            let (_, that) = entropy_form_norms(data, z)?;
            Ok(that.sqrt() * metric_sample(data, z)?.lambda_sq)
        },
        domain,
        opts,
    )?;
    Ok(Quadrature { value: q.value * q.value, error: 2.0 * q.value.abs() * q.error, panels: q.panels })
}

/// Gradient-soliton test for `ĝ = |K|^{3/4} g` with potential `f = log K_ĝ`:
/// the trace-free Hessian of `f` must vanish and `Δ_ĝ f = 2(λ - K_ĝ)` for
/// one constant `λ`, fitted by least squares.
pub fn soliton_check(data: &WeierstrassData, grid: Grid) -> Result<Report> {
    let f = surface_fields(data, grid)?;
    let (m, k) = hat_fields(&f)?;
    let pot = k.map(f64::ln);
    let hess = tracefree_hessian_conformal(&pot, &m)?;
    let lap = laplacian_conformal(&pot, &m)?;
    let tf = ScalarField {
        grid,
        values: (0..grid.len()).map(|i| hess.a[i].hypot(hess.b[i]) / m.lambda_sq[i]).collect(),
    };
    let tf_stats = residual_stats(&tf, |z| f.admissible(z))?;
    let lam_field = lap.zip_map(&k, |l, k| 0.5 * l + k)?;
    let lam_stats = residual_stats(&lam_field.map(f64::abs), |z| f.admissible(z))?;
    let (mut sum, mut n) = (0.0, 0usize);
    for (z, v) in grid.points().zip(&lam_field.values) {
        if v.is_finite() && f.admissible(z) && !on_ring(&grid, z) {
            sum += v;
            n += 1;
        }
    }
    let lambda = sum / n.max(1) as f64;
    let trace = lam_field.map(|v| (v - lambda).abs());
    let trace_stats = residual_stats(&trace, |z| f.admissible(z))?;
    let tol = TOLERANCES.stencil(grid.delta());
    let mut rep = Report::from_residual("soliton", &tf_stats, tol)
        .with_param("delta", grid.delta())
        .with_fitted("lambda", lambda)
        .with_fitted("trace_residual", trace_stats.max)
        .with_fitted("max_abs_lambda_field", lam_stats.max);
    rep.pass = tf_stats.max <= tol && trace_stats.max <= tol;
    Ok(rep)
}

fn on_ring(grid: &Grid, z: Complex64) -> bool {
    let i = ((z.re - grid.x0) / grid.hx).round() as usize;
    let j = ((z.im - grid.y0) / grid.hy).round() as usize;
    i < 2 || j < 2 || i + 2 >= grid.nx || j + 2 >= grid.ny
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayPoint {
    pub r: f64,
    /// `sup |A|²(x) |x - center|²` over vertices within distance `r` of the center.
    pub value: f64,
}

/// Empirical quadratic-decay profile of `|A|² = -2K` on a sampled mesh,
/// at `count` radii evenly spaced up to the farthest vertex.
pub fn curvature_decay_profile(mesh: &SurfaceMesh, center: [f64; 3], count: usize) -> Vec<DecayPoint> {
    let dist: Vec<f64> = mesh
        .positions
        .iter()
        .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)).sqrt())
        .collect();
    let rmax = dist.iter().cloned().fold(0.0, f64::max);
    (1..=count)
        .map(|s| {
            let r = rmax * s as f64 / count as f64;
            let sup = dist
                .iter()
                .zip(&mesh.k)
                .filter(|(d, k)| **d <= r && k.is_finite())
                .map(|(d, k)| -2.0 * k * d * d)
                .fold(0.0, f64::max);
            DecayPoint { r, value: sup }
        })
        .collect()
}

/// Measures the vertical period of the deformed helicoid `H_t` and reports
/// which of `2π(1 + t²)/(1 - t²)` and `2π(1 - t²)/(1 + t²)` it matches.
pub fn helicoid_period_report(data: &WeierstrassData, t: f64) -> Result<Report> {
    let period = data.periodic_y.unwrap_or(2.0 * PI);
    let v = period_vector(data, &[Complex64::new(0.0, 0.0), Complex64::new(0.0, period)])?;
    let plus = 2.0 * PI * (1.0 + t * t) / (1.0 - t * t);
    let minus = 2.0 * PI * (1.0 - t * t) / (1.0 + t * t);
    let tol = TOLERANCES.period;
    let horizontal = v[0].hypot(v[1]);
    let matches = |c: f64| (v[2] - c).abs() <= tol && horizontal <= tol;
    let (matched, err) = match (matches(plus), matches(minus)) {
        (true, false) => ("2π(1+t²)/(1−t²)", (v[2] - plus).abs()),
        (false, true) => ("2π(1−t²)/(1+t²)", (v[2] - minus).abs()),
        (true, true) => ("both", 0.0),
        (false, false) => ("none", (v[2] - plus).abs().min((v[2] - minus).abs())),
    };
    let mut rep = Report::new(
        "helicoid_period",
        ReportStats { max_residual: err.max(horizontal), mean_residual: err, count: 1, fitted: BTreeMap::new() },
        tol,
    )
    .with_param("t", t)
    .with_param("matched", matched)
    .with_fitted("period_x1", v[0])
    .with_fitted("period_x2", v[1])
    .with_fitted("period_x3", v[2])
    .with_fitted("candidate_plus", plus)
    .with_fitted("candidate_minus", minus);
    rep.pass = matched != "none" && matched != "both";
    Ok(rep)
}
