//! Hill's equation `w'' + (ρ/4) w = 0` and the reconstruction of minimal
//! surfaces from a fundamental pair `(w₁, w₂)` with Wronskian `½`.

pub mod ode;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geomnum::{self, ConformalMetricField, Grid, ResidualStats, ScalarField};
use crate::jets::{AnalyticExpr, Laurent};
use crate::weierstrass::rho_from_series;
pub use ode::{integrate_piece, OdeOptions, PathPiece};

pub type Mat2 = Matrix2<Complex64>;

const WRONSKIAN: f64 = 0.5;
const WRONSKIAN_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Fundamental pair of Hill's equation, stored as the state
/// `[[w₁, w₂], [w₁', w₂']]` at a base point.
#[derive(Debug, Clone)]
pub struct HillSystem {
    rho: AnalyticExpr,
    base: Complex64,
    state: Mat2,
}

fn wronskian_of(m: &Mat2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

impl HillSystem {
    /// Fails unless `w₁w₂' - w₂w₁' = ½` at the base.
    pub fn new(rho: AnalyticExpr, base: Complex64, state: Mat2) -> Result<Self> {
        let w = wronskian_of(&state);
        if (w - WRONSKIAN).norm() > WRONSKIAN_TOL {
            return Err(Error::InvalidParameter(format!("Wronskian of the initial state is {w}, expected 1/2")));
        }
        Ok(HillSystem { rho, base, state })
    }

    /// State `w₁ = 1`, `w₂ = 0`, `w₁' = 0`, `w₂' = ½` at `base`.
    pub fn canonical(rho: AnalyticExpr, base: Complex64) -> Self {
        let state = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        HillSystem { rho, base, state }
    }

    /// `ρ = 0` with `(w₁, w₂) = (μ, ν + z/(2μ))`.
    pub fn enneper(mu: f64, nu: Complex64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        let state = Mat2::new(c(mu, 0.0), nu, c(0.0, 0.0), c(0.5 / mu, 0.0));
        HillSystem::new(AnalyticExpr::real(0.0), c(0.0, 0.0), state)
    }

    /// `ρ = -α²` with the pair
    /// `w₁ = (cos φ e^{-αz/2} - sin φ e^{αz/2}) / N`,
    /// `w₂ = (cos φ e^{αz/2} - sin φ e^{-αz/2}) / N`, `N = √(2α cos 2φ)`.
    pub fn normal_form(alpha: Complex64, phi: f64) -> Result<Self> {
        let cos2 = (2.0 * phi).cos();
        if alpha.norm() < 1e-12 || cos2.abs() < 1e-12 {
            return Err(Error::InvalidParameter("normal form needs alpha != 0 and cos(2 phi) != 0".into()));
        }
        let n = (alpha * 2.0 * cos2).sqrt();
        let (cp, sp) = (phi.cos(), phi.sin());
        let a = alpha / 2.0;
        let state = Mat2::new(
            (cp - sp) / n,
            (cp - sp) / n,
            (-a * cp - a * sp) / n,
            (a * cp + a * sp) / n,
        );
        let rho = AnalyticExpr::constant(-alpha * alpha);
        HillSystem::new(rho, c(0.0, 0.0), state)
    }

    pub fn rho(&self) -> &AnalyticExpr {
        &self.rho
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn state(&self) -> &Mat2 {
        &self.state
    }

    pub fn wronskian(&self) -> Complex64 {
        wronskian_of(&self.state)
    }

    fn initial(&self) -> [Complex64; 4] {
        [self.state[(0, 0)], self.state[(0, 1)], self.state[(1, 0)], self.state[(1, 1)]]
    }
}

/// Values of the pair and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillSample {
    pub z: Complex64,
    pub w1: Complex64,
    pub w2: Complex64,
    pub dw1: Complex64,
    pub dw2: Complex64,
}

impl HillSample {
    fn from_state(z: Complex64, y: &[Complex64]) -> Self {
        HillSample { z, w1: y[0], w2: y[1], dw1: y[2], dw2: y[3] }
    }

    pub fn wronskian(&self) -> Complex64 {
        self.w1 * self.dw2 - self.w2 * self.dw1
    }

    /// `u = log(|w₁|² + |w₂|²)`; the metric is `e^{2u} |dz|²`.
    pub fn u(&self) -> f64 {
        (self.w1.norm_sqr() + self.w2.norm_sqr()).ln()
    }
}

#[derive(Debug, Clone)]
pub struct PathSolution {
    pub path: Vec<Complex64>,
    /// One sample per accepted step, starting at the base.
    pub samples: Vec<HillSample>,
    /// Indices into `samples` of the polyline vertices.
    pub vertices: Vec<usize>,
    /// Largest `|W - ½|` seen along the path.
    pub wronskian_drift: f64,
}

impl PathSolution {
    pub fn end(&self) -> &HillSample {
        self.samples.last().expect("a path solution always holds its base sample")
    }

    pub fn vertex_samples(&self) -> impl Iterator<Item = &HillSample> {
        self.vertices.iter().map(|&k| &self.samples[k])
    }
}

fn hill_rhs(rho: &AnalyticExpr) -> impl Fn(Complex64, &[Complex64; 4]) -> Result<[Complex64; 4]> + '_ {
    move |z, y| {
        let r = rho.eval(z) / 4.0;
        Ok([y[2], y[3], -r * y[0], -r * y[1]])
    }
}

/// Integrates the pair along a polyline that starts at the base point.
pub fn integrate_hill(sys: &HillSystem, path: &[Complex64]) -> Result<PathSolution> {
    integrate_hill_with(sys, path, &OdeOptions::default())
}

pub fn integrate_hill_with(sys: &HillSystem, path: &[Complex64], opts: &OdeOptions) -> Result<PathSolution> {
    let pieces = polyline(sys.base, path)?;
    let rhs = hill_rhs(&sys.rho);
    let mut y = sys.initial();
    let mut samples = vec![HillSample::from_state(sys.base, &y)];
    let mut vertices = vec![0];
    let mut drift = (samples[0].wronskian() - WRONSKIAN).norm();
    for piece in &pieces {
        y = integrate_piece(piece, y, &rhs, opts, |z, y| {
            let s = HillSample::from_state(z, y);
            drift = drift.max((s.wronskian() - WRONSKIAN).norm());
            samples.push(s);
            Ok(())
        })?;
        vertices.push(samples.len() - 1);
    }
    Ok(PathSolution { path: path.to_vec(), samples, vertices, wronskian_drift: drift })
}

fn polyline(base: Complex64, path: &[Complex64]) -> Result<Vec<PathPiece>> {
    match path.first() {
        Some(&p) if (p - base).norm() <= 1e-14 * (1.0 + base.norm()) => {}
        _ => return Err(Error::InvalidParameter("path must start at the base point".into())),
    }
    Ok(path
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| PathPiece::Segment { from: w[0], to: w[1] })
        .collect())
}

/// State at `z`, reached along the straight segment from the base.
pub fn state_at(sys: &HillSystem, z: Complex64) -> Result<HillSample> {
    Ok(*integrate_hill(sys, &[sys.base, z])?.end())
}

/// New system whose pair is `B·(w₁, w₂)`.
pub fn apply_sl2(b: &Mat2, sys: &HillSystem) -> Result<HillSystem> {
    let det = b.determinant();
    if (det - 1.0).norm() > DET_TOL {
        return Err(Error::NotUnimodular(det));
    }
    Ok(HillSystem { rho: sys.rho.clone(), base: sys.base, state: sys.state * b.transpose() })
}

/// The unique `B ∈ SL(2, C)` carrying the pair of `from` to a state with
/// the same base point.
pub fn sl2_between(from: &Mat2, to: &Mat2) -> Result<Mat2> {
    let inv = from.try_inverse().ok_or(Error::NotUnimodular(from.determinant()))?;
    Ok((inv * to).transpose())
}

/// Factorization `B = U L` with `U ∈ SU(2)` and `L` lower triangular with
/// positive real diagonal, by Gram–Schmidt starting from the second column.
pub fn ql_factor(b: &Mat2) -> Result<(Mat2, Mat2)> {
    let det = b.determinant();
    if (det - 1.0).norm() > DET_TOL {
        return Err(Error::NotUnimodular(det));
    }
    let b1 = b.column(0).into_owned();
    let b2 = b.column(1).into_owned();
    let l22 = b2.norm();
    let u2 = b2 / c(l22, 0.0);
    let l21 = u2.dotc(&b1);
    let l11 = 1.0 / l22;
    let u1 = (b1 - u2 * l21) / c(l11, 0.0);
    let mut u = Mat2::zeros();
    u.set_column(0, &u1);
    u.set_column(1, &u2);
    let l = Mat2::new(c(l11, 0.0), c(0.0, 0.0), l21, c(l22, 0.0));
    Ok((u, l))
}

/// `W_τ(z) = W(z + τ)`, again a fundamental pair (of the translated equation).
pub fn translate(sys: &HillSystem, tau: Complex64) -> Result<HillSystem> {
    let s = state_at(sys, sys.base + tau)?;
    let rho = sys.rho.substitute(&(AnalyticExpr::var() + AnalyticExpr::constant(tau)));
    Ok(HillSystem { rho, base: sys.base, state: Mat2::new(s.w1, s.w2, s.dw1, s.dw2) })
}

/// Sign convention of the Hopf differential of reconstructed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum HopfConvention {
    /// `Q = 2W dz² = +dz²`; reversing the orientation gives the `-dz²` normalization.
    PlusDzSquared,
}

impl HopfConvention {
    pub fn q(&self) -> Complex64 {
        match self {
            HopfConvention::PlusDzSquared => c(2.0 * WRONSKIAN, 0.0),
        }
    }
}

/// Weierstrass data recovered from one sample: `G = w₂/w₁`, `h = -2w₁w₂`,
/// and the metric factor `(|w₁|² + |w₂|²)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructedSample {
    pub z: Complex64,
    /// `None` where `w₁` vanishes (a pole of `G`).
    pub gauss: Option<Complex64>,
    pub height: Complex64,
    pub metric: f64,
}

impl ReconstructedSample {
    pub fn gauss(&self) -> Result<Complex64> {
        self.gauss.ok_or(Error::VanishingSpinor(self.z))
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub samples: Vec<ReconstructedSample>,
    pub convention: HopfConvention,
}

pub fn reconstruct_sample(s: &HillSample) -> ReconstructedSample {
    let scale = s.w1.norm().max(s.w2.norm());
    let gauss = if s.w1.norm() > 1e-14 * scale { Some(s.w2 / s.w1) } else { None };
    ReconstructedSample {
        z: s.z,
        gauss,
        height: -2.0 * s.w1 * s.w2,
        metric: (s.w1.norm_sqr() + s.w2.norm_sqr()).powi(2),
    }
}

pub fn reconstruct_weierstrass(sol: &PathSolution) -> Reconstruction {
    Reconstruction {
        samples: sol.samples.iter().map(reconstruct_sample).collect(),
        convention: HopfConvention::PlusDzSquared,
    }
}

/// Taylor coefficients of `w₁` and `w₂` at `center`, from discrete Cauchy
/// integrals of the numerical solution on the circle of the given radius.
pub fn cauchy_jets(
    sys: &HillSystem,
    center: Complex64,
    radius: f64,
    points: usize,
    order: usize,
    opts: &OdeOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    let start = center + radius;
    let sol = integrate_hill_with(sys, &[sys.base, center, start], opts)?;
    let mut drift = sol.wronskian_drift;
    let end = sol.end();
    let mut y = [end.w1, end.w2, end.dw1, end.dw2];
    let rhs = hill_rhs(&sys.rho);
    let step = 2.0 * std::f64::consts::PI / points as f64;
    let mut values = Vec::with_capacity(points);
    values.push((y[0], y[1]));
    for j in 0..points - 1 {
        let arc = PathPiece::Arc { center, radius, theta0: j as f64 * step, theta1: (j + 1) as f64 * step };
        y = integrate_piece(&arc, y, &rhs, opts, |_, y| {
            drift = drift.max((y[0] * y[3] - y[1] * y[2] - WRONSKIAN).norm());
            Ok(())
        })?;
        values.push((y[0], y[1]));
    }
    let mut a1 = vec![c(0.0, 0.0); order + 1];
    let mut a2 = vec![c(0.0, 0.0); order + 1];
    for k in 0..=order {
        let mut s1 = c(0.0, 0.0);
        let mut s2 = c(0.0, 0.0);
        for (j, (v1, v2)) in values.iter().enumerate() {
            let e = Complex64::from_polar(1.0, -(k as f64) * step * j as f64);
            s1 += v1 * e;
            s2 += v2 * e;
        }
        let norm = points as f64 * radius.powi(k as i32);
        a1[k] = s1 / norm;
        a2[k] = s2 / norm;
    }
    Ok((a1, a2, drift))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    pub z: Complex64,
    pub rho_in: Complex64,
    pub rho_out: Complex64,
    pub drift: f64,
}

/// Reconstructs `(G, h)` near `z` from the numerically integrated pair and
/// evaluates the entropy coefficient of that data; it should equal `ρ(z)`.
pub fn roundtrip_rho(sys: &HillSystem, z: Complex64) -> Result<RoundTrip> {
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-15, ..Default::default() };
    let (a1, a2, drift) = cauchy_jets(sys, z, 0.25, 48, 5, &opts)?;
    // ρ is unchanged by SU(2); rotate so that |w₁(z)| = |w₂(z)|, which keeps
    // G and h away from zero at z and spares the cancellation of numerical noise
    let (v1, v2) = (a1[0], a2[0]);
    let n = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    let to_axis = Mat2::new(v1.conj(), v2.conj(), -v2, v1) / c(n, 0.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let u = Mat2::new(c(r, 0.0), c(-r, 0.0), c(r, 0.0), c(r, 0.0)) * to_axis;
    let (a1, a2): (Vec<Complex64>, Vec<Complex64>) = a1
        .iter()
        .zip(&a2)
        .map(|(&p, &q)| (u[(0, 0)] * p + u[(0, 1)] * q, u[(1, 0)] * p + u[(1, 1)] * q))
        .unzip();
    let w1 = Laurent::from_taylor(z, a1);
    let w2 = Laurent::from_taylor(z, a2);
    let g = w2.div(&w1).map_err(|_| Error::VanishingSpinor(z))?;
    let h = w1.mul(&w2).scale(c(-2.0, 0.0));
    let rho = rho_from_series(&g, &h)?;
    let rho_out = if rho.is_regular() { rho.value()? } else { return Err(Error::UmbilicPoint(z)) };
    Ok(RoundTrip { z, rho_in: sys.rho.eval(z), rho_out, drift })
}

/// The pair and the immersion `Re ∫ Φ dz`, `Φ = (w₂² - w₁², -i(w₁² + w₂²), -2w₁w₂)`,
/// on every node of a grid. Positions are relative to the grid corner.
#[derive(Debug, Clone)]
pub struct HillGrid {
    pub grid: Grid,
    pub samples: Vec<HillSample>,
    pub positions: Vec<[f64; 3]>,
    pub wronskian_drift: f64,
}

type Augmented = [Complex64; 7];

fn augmented_rhs(rho: &AnalyticExpr) -> impl Fn(Complex64, &Augmented) -> Result<Augmented> + Sync + '_ {
    move |z, y| {
        let r = rho.eval(z) / 4.0;
        let (w1, w2) = (y[0], y[1]);
        Ok([
            y[2],
            y[3],
            -r * w1,
            -r * w2,
            w2 * w2 - w1 * w1,
            c(0.0, -1.0) * (w1 * w1 + w2 * w2),
            -2.0 * w1 * w2,
        ])
    }
}

/// Integrates along the bottom row of the grid, then up every column in parallel.
pub fn solve_grid(sys: &HillSystem, grid: Grid) -> Result<HillGrid> {
    let opts = OdeOptions::default();
    let rhs = augmented_rhs(&sys.rho);
    let corner = grid.point(0, 0);
    let start = state_at(sys, corner)?;
    let zero = c(0.0, 0.0);
    let init: Augmented = [start.w1, start.w2, start.dw1, start.dw2, zero, zero, zero];
    let drift_of = |y: &Augmented| (y[0] * y[3] - y[1] * y[2] - WRONSKIAN).norm();
    let mut bottom = vec![init];
    let mut drift = drift_of(&init);
    for i in 1..grid.nx {
        let piece = PathPiece::Segment { from: grid.point(i - 1, 0), to: grid.point(i, 0) };
        let y = integrate_piece(&piece, bottom[i - 1], &rhs, &opts, |_, y| {
            drift = drift.max(drift_of(y));
            Ok(())
        })?;
        bottom.push(y);
    }
    let columns: Vec<(Vec<Augmented>, f64)> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![bottom[i]];
            let mut d = 0.0f64;
            for j in 1..grid.ny {
                let piece = PathPiece::Segment { from: grid.point(i, j - 1), to: grid.point(i, j) };
                let y = integrate_piece(&piece, col[j - 1], &rhs, &opts, |_, y| {
                    d = d.max(drift_of(y));
                    Ok(())
                })?;
                col.push(y);
            }
            Ok((col, d))
        })
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(grid.len());
    let mut positions = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        for (i, (col, _)) in columns.iter().enumerate() {
            let y = &col[j];
            samples.push(HillSample::from_state(grid.point(i, j), y));
            positions.push([y[4].re, y[5].re, y[6].re]);
        }
    }
    let drift = columns.iter().map(|c| c.1).fold(drift, f64::max);
    Ok(HillGrid { grid, samples, positions, wronskian_drift: drift })
}

impl HillGrid {
    /// `u = log(|w₁|² + |w₂|²)` on the grid.
    pub fn u_field(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.samples.iter().map(HillSample::u).collect() }
    }
}

/// Residual field `|Δu - e^{-2u}|` of the Liouville equation `4 ∂_z ∂_z̄ u = e^{-2u}`.
pub fn liouville_residual_field(u: &ScalarField) -> Result<ScalarField> {
    let g = u.grid;
    if g.nx < 5 || g.ny < 5 {
        return Err(Error::GridTooCoarse { nx: g.nx, ny: g.ny });
    }
    let lap = geomnum::laplacian_conformal(u, &ConformalMetricField::flat(g))?;
    lap.zip_map(u, |l, u| (l - (-2.0 * u).exp()).abs())
}

/// Maximum and mean Liouville residual over interior nodes.
pub fn liouville_residual(u: &ScalarField) -> Result<ResidualStats> {
    geomnum::residual_stats(&liouville_residual_field(u)?, |_| true)
}
