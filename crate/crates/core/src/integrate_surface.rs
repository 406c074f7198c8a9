//! The Weierstrass representation
//! `x(p) - x(p₀) = Re ∫ (½(G⁻¹ - G), (i/2)(G⁻¹ + G), 1) h dz`,
//! period vectors, and sampled meshes.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geomnum::{integrate_line, Grid};
use crate::hill::{reconstruct_sample, HillGrid};
use crate::jets::{AnalyticExpr, Laurent};
use crate::weierstrass::{entropy_form_norms, metric_sample, WeierstrassData};

/// Per-segment tolerance of the line quadrature.
pub const LINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersionPoint {
    pub z: Complex64,
    pub x: [f64; 3],
}

/// The three holomorphic 1-form coefficients at `z`.
pub fn weierstrass_integrand(data: &WeierstrassData, z: Complex64) -> Result<[Complex64; 3]> {
    let g = data.gauss.eval(z);
    let h = data.height.eval(z);
    let i = Complex64::new(0.0, 1.0);
    let finite = |v: Complex64| v.re.is_finite() && v.im.is_finite();
    let (h_over_g, h_times_g) = if finite(g) && finite(h) && g.norm() > 1e-8 && g.norm() < 1e8 {
        (h / g, h * g)
    } else {
        // G vanishes or blows up here; let the expansions cancel against h
        let gs = Laurent::expand(&data.gauss, z, 1).map_err(|_| Error::PoleOnPath(z))?;
        let hs = Laurent::expand(&data.height, z, 1).map_err(|_| Error::PoleOnPath(z))?;
        let a = hs.div(&gs).and_then(|s| s.value()).map_err(|_| Error::PoleOnPath(z))?;
        let b = hs.mul(&gs).value().map_err(|_| Error::PoleOnPath(z))?;
        (a, b)
    };
    let out = [0.5 * (h_over_g - h_times_g), 0.5 * i * (h_over_g + h_times_g), h];
    if out.iter().all(|v| finite(*v)) {
        Ok(out)
    } else {
        Err(Error::PoleOnPath(z))
    }
}

fn segment_integral(data: &WeierstrassData, a: Complex64, b: Complex64) -> Result<[Complex64; 3]> {
    let d = b - a;
    let f = |s: f64| -> Result<[Complex64; 3]> {
        let v = weierstrass_integrand(data, a + d * s)?;
        Ok([v[0] * d, v[1] * d, v[2] * d])
    };
    Ok(integrate_line(&f, 0.0, 1.0, LINE_TOL)?.0)
}

fn path_integral(data: &WeierstrassData, path: &[Complex64]) -> Result<[Complex64; 3]> {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for w in path.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let v = segment_integral(data, w[0], w[1])?;
        for k in 0..3 {
            acc[k] += v[k];
        }
    }
    Ok(acc)
}

/// `x(p) - x(p₀)` along a polyline `path` running from `p₀` to `p`.
pub fn immersion_point(data: &WeierstrassData, path: &[Complex64]) -> Result<ImmersionPoint> {
    let z = *path.last().ok_or_else(|| Error::InvalidParameter("empty path".into()))?;
    let v = path_integral(data, path)?;
    Ok(ImmersionPoint { z, x: [v[0].re, v[1].re, v[2].re] })
}

/// Real part of the integral around a closed polyline. When the data live
/// on a strip quotient, a polyline whose ends differ by a multiple of the
/// `y` period counts as closed.
pub fn period_vector(data: &WeierstrassData, cycle: &[Complex64]) -> Result<[f64; 3]> {
    let closed = match (cycle.first(), cycle.last()) {
        (Some(a), Some(b)) if cycle.len() >= 2 => {
            let gap = b - a;
            let eps = 1e-12 * (1.0 + a.norm() + b.norm());
            match data.periodic_y {
                Some(p) => gap.re.abs() <= eps && (gap.im / p - (gap.im / p).round()).abs() * p <= eps,
                None => gap.norm() <= eps,
            }
        }
        _ => false,
    };
    if !closed {
        return Err(Error::InvalidParameter("cycle must be a closed polyline".into()));
    }
    let v = path_integral(data, cycle)?;
    Ok([v[0].re, v[1].re, v[2].re])
}

/// Inverse stereographic image `(2 Re G, 2 Im G, |G|² - 1) / (|G|² + 1)`;
/// `G = ∞` maps to `(0, 0, 1)`.
pub fn gauss_normal(g: Complex64) -> [f64; 3] {
    if !(g.re.is_finite() && g.im.is_finite()) || g.norm() > 1e150 {
        return [0.0, 0.0, 1.0];
    }
    let r2 = g.norm_sqr();
    [2.0 * g.re / (r2 + 1.0), 2.0 * g.im / (r2 + 1.0), (r2 - 1.0) / (r2 + 1.0)]
}

fn normal_at(data: &WeierstrassData, z: Complex64) -> [f64; 3] {
    let g = data.gauss.eval(z);
    if g.re.is_finite() && g.im.is_finite() {
        return gauss_normal(g);
    }
    match Laurent::expand(&data.gauss, z, 1).and_then(|s| s.value()) {
        Ok(v) => gauss_normal(v),
        Err(_) => [0.0, 0.0, 1.0],
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub grid: Grid,
    /// Parameter of each vertex; differs from the grid node where a node had to be moved off a singularity.
    pub params: Vec<Complex64>,
    pub positions: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub k: Vec<f64>,
    pub t_norm: Vec<f64>,
    pub that_norm: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
}

/// Samples the immersion on an `nx × ny` node grid of the data's domain.
/// Positions are integrated along the bottom row, then up each column, and
/// are relative to the domain corner `(x0, y0)`.
pub fn sample_mesh(data: &WeierstrassData, nx: usize, ny: usize) -> Result<SurfaceMesh> {
    let grid = Grid::new(data.domain, nx, ny)?;
    let nudge = Complex64::new(0.5 * grid.hx, 0.0);
    let params: Vec<Complex64> = grid
        .points()
        .map(|z| if weierstrass_integrand(data, z).is_ok() { z } else { z + nudge })
        .collect();
    let at = |i: usize, j: usize| params[grid.index(i, j)];
    let mut bottom = vec![[0.0; 3]];
    for i in 1..nx {
        let d = immersion_point(data, &[at(i - 1, 0), at(i, 0)])?.x;
        let p = bottom[i - 1];
        bottom.push([p[0] + d[0], p[1] + d[1], p[2] + d[2]]);
    }
    let columns: Vec<Vec<[f64; 3]>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![bottom[i]];
            for j in 1..ny {
                let d = immersion_point(data, &[at(i, j - 1), at(i, j)])?.x;
                let p = col[j - 1];
                col.push([p[0] + d[0], p[1] + d[1], p[2] + d[2]]);
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let mut positions = Vec::with_capacity(grid.len());
    for j in 0..ny {
        for col in &columns {
            positions.push(col[j]);
        }
    }
    let fields: Vec<([f64; 3], f64, f64, f64)> = params
        .par_iter()
        .map(|&z| {
            let k = metric_sample(data, z).map(|m| m.k).unwrap_or(f64::NAN);
            let (t, th) = entropy_form_norms(data, z).unwrap_or((f64::NAN, f64::NAN));
            (normal_at(data, z), k, t, th)
        })
        .collect();
    let triangles = grid_triangles(&grid);
    Ok(SurfaceMesh {
        grid,
        params,
        positions,
        normals: fields.iter().map(|f| f.0).collect(),
        k: fields.iter().map(|f| f.1).collect(),
        t_norm: fields.iter().map(|f| f.2).collect(),
        that_norm: fields.iter().map(|f| f.3).collect(),
        triangles,
    })
}

/// Mesh of the immersion reconstructed from a Hill grid solution. The metric
/// is `λ² = (|w₁|² + |w₂|²)²`, so `K = -λ⁻⁴`; the entropy coefficient is the
/// potential `ρ` of the solved equation.
pub fn mesh_from_hill(hg: &HillGrid, rho: &AnalyticExpr) -> SurfaceMesh {
    let grid = hg.grid;
    let mut normals = Vec::with_capacity(grid.len());
    let (mut k, mut t_norm, mut that_norm) = (Vec::new(), Vec::new(), Vec::new());
    for s in &hg.samples {
        let r = reconstruct_sample(s);
        normals.push(gauss_normal(r.gauss.unwrap_or(Complex64::new(f64::INFINITY, 0.0))));
        let lam = r.metric;
        let kv = -1.0 / (lam * lam);
        let t = rho.eval(s.z).norm() / (std::f64::consts::SQRT_2 * lam);
        k.push(kv);
        t_norm.push(t);
        that_norm.push(kv.abs() * t);
    }
    SurfaceMesh {
        grid,
        params: grid.points().collect(),
        positions: hg.positions.clone(),
        normals,
        k,
        t_norm,
        that_norm,
        triangles: grid_triangles(&grid),
    }
}

fn grid_triangles(grid: &Grid) -> Vec<[usize; 3]> {
    let mut triangles = Vec::with_capacity(2 * (grid.nx - 1) * (grid.ny - 1));
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let (a, b) = (grid.index(i, j), grid.index(i + 1, j));
            let (c, d) = (grid.index(i + 1, j + 1), grid.index(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    triangles
}

/// Writes vertices, normals and triangles in Wavefront OBJ format.
pub fn write_obj<W: Write>(mesh: &SurfaceMesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# {} vertices, {} triangles", mesh.positions.len(), mesh.triangles.len())?;
    for p in &mesh.positions {
        writeln!(out, "v {} {} {}", sig9(p[0]), sig9(p[1]), sig9(p[2]))?;
    }
    for n in &mesh.normals {
        writeln!(out, "vn {} {} {}", sig9(n[0]), sig9(n[1]), sig9(n[2]))?;
    }
    for t in &mesh.triangles {
        let (a, b, c) = (t[0] + 1, t[1] + 1, t[2] + 1);
        writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

/// Nine significant digits in scientific notation.
fn sig9(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.8e}")
    }
}

#[derive(Debug, Serialize)]
struct Sidecar {
    nx: usize,
    ny: usize,
    #[serde(rename = "K")]
    k: Vec<Option<f64>>,
    #[serde(rename = "T_norm")]
    t_norm: Vec<Option<f64>>,
    #[serde(rename = "That_norm")]
    that_norm: Vec<Option<f64>>,
}

/// JSON object with the per-vertex scalar fields in row-major order;
/// non-finite entries (such as `|T|` at umbilics) become `null`.
pub fn sidecar_json(mesh: &SurfaceMesh) -> serde_json::Value {
    let opt = |v: &Vec<f64>| v.iter().map(|x| x.is_finite().then_some(*x)).collect();
    let s = Sidecar {
        nx: mesh.grid.nx,
        ny: mesh.grid.ny,
        k: opt(&mesh.k),
        t_norm: opt(&mesh.t_norm),
        that_norm: opt(&mesh.that_norm),
    };
    serde_json::to_value(s).expect("plain numeric arrays serialize")
}

/// Result of aligning two point clouds by an orthogonal map and a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub max_distance: f64,
    pub rms_distance: f64,
    /// `true` when the best orthogonal map is a reflection.
    pub reflected: bool,
}

/// Best fit of `a` onto `b` over `x ↦ R x + c` with `R ∈ O(3)`.
pub fn procrustes_align(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<Alignment> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::GridMismatch);
    }
    let n = a.len() as f64;
    let va: Vec<Vector3<f64>> = a.iter().map(|p| Vector3::from(*p)).collect();
    let vb: Vec<Vector3<f64>> = b.iter().map(|p| Vector3::from(*p)).collect();
    let ca = va.iter().sum::<Vector3<f64>>() / n;
    let cb = vb.iter().sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for (p, q) in va.iter().zip(&vb) {
        cov += (q - cb) * (p - ca).transpose();
    }
    let svd = cov.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let r = u * vt;
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    for (p, q) in va.iter().zip(&vb) {
        let d = (r * (p - ca) + cb - q).norm();
        max = max.max(d);
        sum += d * d;
    }
    Ok(Alignment { max_distance: max, rms_distance: (sum / n).sqrt(), reflected: r.determinant() < 0.0 })
}
