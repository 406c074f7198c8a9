//! Finite-difference operators on uniform grids and adaptive quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::weierstrass::RectDomain;

/// Width (in nodes) of the boundary ring left out of residual statistics.
pub const BOUNDARY_RING: usize = 2;

/// Uniform node grid; node `(i, j)` sits at `(x0 + i hx, y0 + j hy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Grid with `nx * ny` nodes spanning the closed domain.
    pub fn new(domain: RectDomain, nx: usize, ny: usize) -> Result<Self> {
        if nx < 5 || ny < 5 {
            return Err(Error::GridTooCoarse { nx, ny });
        }
        Ok(Grid {
            x0: domain.x0,
            y0: domain.y0,
            hx: domain.width() / (nx - 1) as f64,
            hy: domain.height() / (ny - 1) as f64,
            nx,
            ny,
        })
    }

    /// Grid whose spacing is as close to `delta` as the domain allows.
    pub fn with_spacing(domain: RectDomain, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing {delta} must be positive")));
        }
        let nx = (domain.width() / delta).round() as usize + 1;
        let ny = (domain.height() / delta).round() as usize + 1;
        Grid::new(domain, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, rows running along `x`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy)
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.point(i, j)))
    }

    /// Largest of the two spacings.
    pub fn delta(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: Grid, f: impl Fn(Complex64) -> f64) -> Self {
        ScalarField { grid, values: grid.points().map(f).collect() }
    }

    pub fn try_from_fn(grid: Grid, f: impl Fn(Complex64) -> Result<f64>) -> Result<Self> {
        let values = grid.points().map(f).collect::<Result<Vec<_>>>()?;
        Ok(ScalarField { grid, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField { grid: self.grid, values })
    }
}

/// Conformal metric `λ² (dx² + dy²)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetricField {
    pub grid: Grid,
    pub lambda_sq: Vec<f64>,
}

impl ConformalMetricField {
    pub fn new(grid: Grid, lambda_sq: Vec<f64>) -> Result<Self> {
        if lambda_sq.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(k) = lambda_sq.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            let z = grid.point(k % grid.nx, k / grid.nx);
            return Err(Error::DegeneratePoint(z));
        }
        Ok(ConformalMetricField { grid, lambda_sq })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Complex64) -> f64) -> Result<Self> {
        ConformalMetricField::new(grid, grid.points().map(f).collect())
    }

    pub fn flat(grid: Grid) -> Self {
        ConformalMetricField { grid, lambda_sq: vec![1.0; grid.len()] }
    }

    /// Pointwise conformal change `λ² -> factor · λ²`.
    pub fn rescaled(&self, factor: &ScalarField) -> Result<Self> {
        if !self.grid.same_as(&factor.grid) {
            return Err(Error::GridMismatch);
        }
        let l = self.lambda_sq.iter().zip(&factor.values).map(|(a, b)| a * b).collect();
        ConformalMetricField::new(self.grid, l)
    }

    pub fn as_scalar(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.lambda_sq.clone() }
    }

    /// Gauss curvature `K = -Δ_flat(log λ²) / (2 λ²)` by the 5-point stencil.
    pub fn curvature(&self) -> ScalarField {
        let log = self.as_scalar().map(f64::ln);
        let mut lap = flat_laplacian(&log);
        for (v, l) in lap.values.iter_mut().zip(&self.lambda_sq) {
            *v *= -0.5 / l;
        }
        lap
    }
}

/// Trace-free symmetric 2-tensor `a (dx² - dy²) + 2 b dx dy` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub grid: Grid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn flat_laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid;
    let mut out = vec![f64::NAN; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = f.at(i, j);
            let fxx = (f.at(i + 1, j) - 2.0 * c + f.at(i - 1, j)) / (g.hx * g.hx);
            let fyy = (f.at(i, j + 1) - 2.0 * c + f.at(i, j - 1)) / (g.hy * g.hy);
            out[g.index(i, j)] = fxx + fyy;
        }
    }
    ScalarField { grid: g, values: out }
}

/// `Δ_g f = λ⁻² (f_xx + f_yy)`; boundary nodes are `NaN`.
pub fn laplacian_conformal(f: &ScalarField, m: &ConformalMetricField) -> Result<ScalarField> {
    if !f.grid.same_as(&m.grid) {
        return Err(Error::GridMismatch);
    }
    let mut lap = flat_laplacian(f);
    for (v, l) in lap.values.iter_mut().zip(&m.lambda_sq) {
        *v /= l;
    }
    Ok(lap)
}

/// Trace-free Hessian of `f` in the metric `e^{2ω}(dx² + dy²)`, `ω = ½ log λ²`:
/// the flat trace-free Hessian minus the trace-free part of `df ⊗ dω + dω ⊗ df`.
/// Boundary nodes are `NaN`.
pub fn tracefree_hessian_conformal(f: &ScalarField, m: &ConformalMetricField) -> Result<TensorField> {
    if !f.grid.same_as(&m.grid) {
        return Err(Error::GridMismatch);
    }
    let g = f.grid;
    let w = m.as_scalar().map(|l| 0.5 * l.ln());
    let mut a = vec![f64::NAN; g.len()];
    let mut b = vec![f64::NAN; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = f.at(i, j);
            let fxx = (f.at(i + 1, j) - 2.0 * c + f.at(i - 1, j)) / (g.hx * g.hx);
            let fyy = (f.at(i, j + 1) - 2.0 * c + f.at(i, j - 1)) / (g.hy * g.hy);
            let fxy = (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) + f.at(i - 1, j - 1))
                / (4.0 * g.hx * g.hy);
            let fx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.hx);
            let fy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.hy);
            let wx = (w.at(i + 1, j) - w.at(i - 1, j)) / (2.0 * g.hx);
            let wy = (w.at(i, j + 1) - w.at(i, j - 1)) / (2.0 * g.hy);
            let k = g.index(i, j);
            a[k] = 0.5 * (fxx - fyy) - (fx * wx - fy * wy);
            b[k] = fxy - (fx * wy + fy * wx);
        }
    }
    Ok(TensorField { grid: g, a, b })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
    /// Node where the maximum is attained.
    pub argmax_re: f64,
    pub argmax_im: f64,
}

/// Statistics of `|values|` over nodes at least [`BOUNDARY_RING`] away from the
/// boundary and accepted by `keep`. Non-finite entries count as failures
/// (they make `max` infinite).
pub fn residual_stats(field: &ScalarField, keep: impl Fn(Complex64) -> bool) -> Result<ResidualStats> {
    let g = field.grid;
    let r = BOUNDARY_RING;
    let mut stats = ResidualStats { max: 0.0, mean: 0.0, count: 0, argmax_re: f64::NAN, argmax_im: f64::NAN };
    let mut sum = 0.0;
    for j in r..g.ny.saturating_sub(r) {
        for i in r..g.nx.saturating_sub(r) {
            let z = g.point(i, j);
            if !keep(z) {
                continue;
            }
            let v = field.at(i, j);
            let v = if v.is_finite() { v.abs() } else { f64::INFINITY };
            stats.count += 1;
            sum += v;
            if v > stats.max || stats.count == 1 {
                stats.max = v;
                stats.argmax_re = z.re;
                stats.argmax_im = z.im;
            }
        }
    }
    if stats.count == 0 {
        return Err(Error::UmbilicOnGrid);
    }
    stats.mean = sum / stats.count as f64;
    Ok(stats)
}

/// Least-squares slope of `log err` against `log delta`.
pub fn convergence_order(deltas: &[f64], errors: &[f64]) -> f64 {
    let n = deltas.len() as f64;
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Settings for [`integrate2d`].
#[derive(Debug, Clone, Copy)]
pub struct Quad2dOptions {
    pub tol: f64,
    pub max_panels: usize,
    /// Initial split of the domain into `nx * ny` panels.
    pub initial: (usize, usize),
}

impl Default for Quad2dOptions {
    fn default() -> Self {
        Quad2dOptions { tol: 1e-8, max_panels: 400_000, initial: (4, 4) }
    }
}

const GL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Panel {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    /// Sum of the rules on the four children.
    value: f64,
    /// Child values, kept so a split does not recompute them.
    children: [f64; 4],
    /// Difference between the whole-panel rule and the children sum.
    err: f64,
}

struct Rule2d<'a, F> {
    f: &'a F,
    nodes: &'a [f64],
    weights: &'a [f64],
}

impl<F> Rule2d<'_, F>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    fn rule(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<f64> {
        let (cx, rx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let (cy, ry) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
        let mut s = 0.0;
        for (yi, wy) in self.nodes.iter().zip(self.weights) {
            let mut row = 0.0;
            for (xi, wx) in self.nodes.iter().zip(self.weights) {
                row += wx * (self.f)(Complex64::new(cx + rx * xi, cy + ry * yi))?;
            }
            s += wy * row;
        }
        Ok(s * rx * ry)
    }

    fn quads(x0: f64, x1: f64, y0: f64, y1: f64) -> [(f64, f64, f64, f64); 4] {
        let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
    }

    fn panel(&self, x0: f64, x1: f64, y0: f64, y1: f64, whole: f64) -> Result<Panel> {
        let mut children = [0.0; 4];
        for (c, q) in children.iter_mut().zip(Self::quads(x0, x1, y0, y1)) {
            *c = self.rule(q.0, q.1, q.2, q.3)?;
        }
        let value = (children[0] + children[1]) + (children[2] + children[3]);
        Ok(Panel { x0, x1, y0, y1, value, children, err: (value - whole).abs() })
    }

    fn split(&self, p: &Panel) -> Result<[Panel; 4]> {
        let q = Self::quads(p.x0, p.x1, p.y0, p.y1);
        Ok([
            self.panel(q[0].0, q[0].1, q[0].2, q[0].3, p.children[0])?,
            self.panel(q[1].0, q[1].1, q[1].2, q[1].3, p.children[1])?,
            self.panel(q[2].0, q[2].1, q[2].2, q[2].3, p.children[2])?,
            self.panel(q[3].0, q[3].1, q[3].2, q[3].3, p.children[3])?,
        ])
    }
}

/// Adaptive tensor-product Gauss–Legendre quadrature of `density` over the
/// domain. Each panel's error is estimated by comparing its rule with the sum
/// over its four children; the panels with the largest estimates are split
/// until the total estimate falls below `tol`. The sequence of splits
/// depends only on the integrand, and the final sum runs in a fixed order,
/// so results are reproducible regardless of thread count.
pub fn integrate2d<F>(density: F, domain: RectDomain, opts: Quad2dOptions) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    let (nodes, weights) = gauss_legendre(GL_ORDER);
    let r = Rule2d { f: &density, nodes: &nodes, weights: &weights };
    let (nx, ny) = (opts.initial.0.max(1), opts.initial.1.max(1));
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let cells: Vec<(usize, usize)> = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect();
    let mut panels: Vec<Panel> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (x0, y0) = (domain.x0 + i as f64 * dx, domain.y0 + j as f64 * dy);
            let (x1, y1) = (x0 + dx, y0 + dy);
            let whole = r.rule(x0, x1, y0, y1)?;
            r.panel(x0, x1, y0, y1, whole)
        })
        .collect::<Result<_>>()?;
    let min_width = 1e-12 * (domain.width() + domain.height());
    loop {
        let total: f64 = panels.iter().map(|p| p.err).sum();
        if total <= opts.tol {
            break;
        }
        let worst = panels.iter().map(|p| p.err).fold(0.0, f64::max);
        let chosen: Vec<usize> = (0..panels.len())
            .filter(|&k| panels[k].err >= 0.25 * worst && panels[k].x1 - panels[k].x0 > min_width)
            .collect();
        if chosen.is_empty() || panels.len() + 3 * chosen.len() > opts.max_panels {
            return Err(Error::NoConvergence { panels: panels.len(), estimate: total });
        }
        let splits: Vec<[Panel; 4]> = chosen.par_iter().map(|&k| r.split(&panels[k])).collect::<Result<_>>()?;
        for (&k, four) in chosen.iter().zip(splits) {
            panels[k] = four[0];
            panels.extend_from_slice(&four[1..]);
        }
    }
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.err).sum();
    Ok(Quadrature { value, error, panels: panels.len() })
}

#[allow(clippy::excessive_precision)]
const GK_XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<([Complex64; N], f64)>
where
    F: Fn(f64) -> Result<[Complex64; N]>,
{
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut kron = [zero; N];
    let mut gauss = [zero; N];
    for (k, (&x, &w)) in GK_XK.iter().zip(&GK_WK).enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &s in pts {
            let v = f(c + r * s)?;
            for n in 0..N {
                kron[n] += v[n] * w;
                if k % 2 == 1 {
                    gauss[n] += v[n] * GK_WG[k / 2];
                }
            }
        }
    }
    let mut err = 0.0f64;
    for n in 0..N {
        kron[n] *= r;
        gauss[n] *= r;
        err = err.max((kron[n] - gauss[n]).norm());
    }
    Ok((kron, err))
}

/// Adaptive Gauss–Kronrod (7, 15) integral of a vector-valued function on
/// `[a, b]`, bisecting until every panel meets its share of `tol`.
pub fn integrate_line<const N: usize, F>(f: &F, a: f64, b: f64, tol: f64) -> Result<([Complex64; N], f64)>
where
    F: Fn(f64) -> Result<[Complex64; N]>,
{
    let mut budget = 20_000usize;
    line_adapt(f, a, b, tol, &mut budget, 0)
}

fn line_adapt<const N: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    budget: &mut usize,
    depth: usize,
) -> Result<([Complex64; N], f64)>
where
    F: Fn(f64) -> Result<[Complex64; N]>,
{
    let (v, err) = gk15(f, a, b)?;
    if err <= tol {
        return Ok((v, err));
    }
    if *budget == 0 || depth > 60 {
        return Err(Error::NoConvergence { panels: 20_000, estimate: err });
    }
    *budget -= 1;
    let m = 0.5 * (a + b);
    let (l, el) = line_adapt(f, a, m, 0.5 * tol, budget, depth + 1)?;
    let (r, er) = line_adapt(f, m, b, 0.5 * tol, budget, depth + 1)?;
    let mut out = l;
    for n in 0..N {
        out[n] += r[n];
    }
    Ok((out, el + er))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn dom(x0: f64, x1: f64, y0: f64, y1: f64) -> RectDomain {
        RectDomain::new(x0, x1, y0, y1).unwrap()
    }

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(matches!(Grid::new(dom(0.0, 1.0, 0.0, 1.0), 4, 10), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn laplacian_examples() {
        let g = Grid::new(dom(-1.0, 1.0, -1.0, 1.0), 21, 21).unwrap();
        let flat = ConformalMetricField::flat(g);
        let f = ScalarField::from_fn(g, |z| z.re * z.re + z.im * z.im);
        let lap = laplacian_conformal(&f, &flat).unwrap();
        let s = residual_stats(&lap.map(|v| v - 4.0), |_| true).unwrap();
        assert!(s.max < 1e-10);
        let c = ScalarField::from_fn(g, |_| 3.5);
        let s = residual_stats(&laplacian_conformal(&c, &flat).unwrap(), |_| true).unwrap();
        assert_eq!(s.max, 0.0);
        assert!(lap.at(0, 5).is_nan());
    }

    #[test]
    fn catenoid_ricci_identity_converges_at_second_order() {
        let mut errs = Vec::new();
        let deltas = [0.04, 0.02, 0.01];
        for &d in &deltas {
            let g = Grid::with_spacing(dom(-1.0, 1.0, 0.0, 1.0), d).unwrap();
            let m = ConformalMetricField::from_fn(g, |z| z.re.cosh().powi(2)).unwrap();
            let f = ScalarField::from_fn(g, |z| -4.0 * z.re.cosh().ln());
            let lap = laplacian_conformal(&f, &m).unwrap();
            let res = ScalarField::from_fn(g, |z| 4.0 / z.re.cosh().powi(4));
            let diff = lap.zip_map(&res, |a, b| a + b).unwrap();
            errs.push(residual_stats(&diff, |_| true).unwrap().max);
        }
        let order = convergence_order(&deltas, &errs);
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn tracefree_hessian_examples() {
        let g = Grid::new(dom(-1.0, 1.0, -1.0, 1.0), 41, 41).unwrap();
        let flat = ConformalMetricField::flat(g);
        let f = ScalarField::from_fn(g, |z| z.re * z.re - z.im * z.im);
        let t = tracefree_hessian_conformal(&f, &flat).unwrap();
        let k = g.index(10, 30);
        assert_relative_eq!(t.a[k], 2.0, max_relative = 1e-10);
        assert!(t.b[k].abs() < 1e-10);
        let mut errs = Vec::new();
        let deltas = [0.1, 0.05, 0.025];
        for &d in &deltas {
            let g = Grid::with_spacing(dom(-1.0, 1.0, -1.0, 1.0), d).unwrap();
            let f = ScalarField::from_fn(g, |z| z.re.powi(4));
            let t = tracefree_hessian_conformal(&f, &ConformalMetricField::flat(g)).unwrap();
            let want = ScalarField::from_fn(g, |z| 6.0 * z.re * z.re);
            let got = ScalarField { grid: g, values: t.a.clone() };
            errs.push(residual_stats(&got.zip_map(&want, |a, b| a - b).unwrap(), |_| true).unwrap().max);
            assert!(t.b.iter().filter(|v| v.is_finite()).all(|v| v.abs() < 1e-9));
        }
        let order = convergence_order(&deltas, &errs);
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn conformal_correction_matches_change_of_metric() {
        // f = x in the metric e^{2x}|dz|²: ∇²f = -dx⊗dx + dy⊗dy, so a = -1, b = 0
        let g = Grid::new(dom(-1.0, 1.0, -1.0, 1.0), 21, 21).unwrap();
        let m = ConformalMetricField::from_fn(g, |z| (2.0 * z.re).exp()).unwrap();
        let f = ScalarField::from_fn(g, |z| z.re);
        let t = tracefree_hessian_conformal(&f, &m).unwrap();
        let k = g.index(7, 12);
        assert_relative_eq!(t.a[k], -1.0, max_relative = 1e-12);
        assert!(t.b[k].abs() < 1e-12);
    }

    #[test]
    fn stencil_curvature_of_round_metric() {
        let g = Grid::with_spacing(dom(-1.0, 1.0, -1.0, 1.0), 0.01).unwrap();
        let m = ConformalMetricField::from_fn(g, |z| 4.0 / (1.0 + z.norm_sqr()).powi(2)).unwrap();
        let k = m.curvature().map(|v| v - 1.0);
        assert!(residual_stats(&k, |_| true).unwrap().max < 1e-4);
    }

    #[test]
    fn boundary_ring_and_mask_are_excluded() {
        let g = Grid::new(dom(0.0, 1.0, 0.0, 1.0), 9, 9).unwrap();
        let f = ScalarField::from_fn(g, |z| if z.re < 0.2 { 100.0 } else { 1.0 });
        let s = residual_stats(&f, |_| true).unwrap();
        assert_eq!(s.count, 25);
        assert_eq!(s.max, 1.0);
        assert!(matches!(residual_stats(&f, |_| false), Err(Error::UmbilicOnGrid)));
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_15() {
        let (x, w) = gauss_legendre(8);
        for p in 0..16 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((s - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn integrate2d_examples() {
        let q = integrate2d(|_| Ok(1.0), dom(0.0, 1.0, 0.0, 1.0), Quad2dOptions::default()).unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-14);
        let q = integrate2d(|z| Ok(z.re.sin() * z.im.sin()), dom(0.0, PI, 0.0, PI), Quad2dOptions::default()).unwrap();
        assert_relative_eq!(q.value, 4.0, max_relative = 1e-12);
        let q = integrate2d(
            |z| Ok(2f64.powf(-0.25) / z.re.cosh()),
            dom(-20.0, 20.0, 0.0, 2.0 * PI),
            Quad2dOptions { tol: 1e-9, ..Default::default() },
        )
        .unwrap();
        // the truncated tail is 2^{3/4}·2π·2·(π/2 - atan(sinh 20))
        let tail = 2f64.powf(0.75) * PI * 2.0 * (PI / 2.0 - 20f64.sinh().atan());
        assert!((q.value + tail - 2f64.powf(0.75) * PI * PI).abs() < 1e-8);
        assert!((q.value - 2f64.powf(0.75) * PI * PI).abs() < 1e-6);
    }

    #[test]
    fn integrate2d_error_estimate_bounds_true_error() {
        let cases: Vec<(Box<dyn Fn(Complex64) -> Result<f64> + Sync>, RectDomain, f64)> = vec![
            (Box::new(|z| Ok((z.re + z.im).exp())), dom(0.0, 1.0, 0.0, 1.0), (1f64.exp() - 1.0).powi(2)),
            (Box::new(|z| Ok(1.0 / (1.0 + z.re * z.re))), dom(-5.0, 5.0, 0.0, 2.0), 4.0 * 5f64.atan()),
            (Box::new(|z| Ok((z.re * z.im).sqrt())), dom(0.0, 1.0, 0.0, 1.0), 4.0 / 9.0),
        ];
        for (f, d, exact) in cases {
            let q = integrate2d(f, d, Quad2dOptions { tol: 1e-7, ..Default::default() }).unwrap();
            assert!((q.value - exact).abs() <= q.error.max(1e-14), "{} vs {exact}, est {}", q.value, q.error);
        }
    }

    #[test]
    fn panel_budget_is_enforced() {
        let r = integrate2d(
            |z| Ok(if z.re * z.re + z.im * z.im < 0.3 { 1.0 } else { 0.0 }),
            dom(-1.0, 1.0, -1.0, 1.0),
            Quad2dOptions { tol: 1e-14, max_panels: 500, initial: (1, 1) },
        );
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn line_integral_of_polynomial_and_exponential() {
        let f = |t: f64| Ok([Complex64::new(t.powi(5), 0.0), Complex64::new(0.0, t).exp()]);
        let (v, _) = integrate_line(&f, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v[0].re, 64.0 / 6.0, max_relative = 1e-14);
        let exact = (Complex64::new(0.0, 2.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((v[1] - exact).norm() < 1e-13);
    }
}
