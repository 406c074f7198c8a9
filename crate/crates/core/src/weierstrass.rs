//! First-order geometry of a minimal surface from Weierstrass data `(G, h dz)`.
//!
//! The metric is `g = λ²|dz|²` with `λ² = (|h|²/4)(|G| + 1/|G|)²`, the Hopf
//! differential is `Q = q dz²` with `q = -h G'/G`, and the entropy
//! differential is `P = (ρ/2) dz²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{AnalyticExpr, Laurent};

/// Relative cancellation threshold used when the eight terms of `ρ` are summed.
const TERM_CANCEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDomain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl RectDomain {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "domain [{x0}, {x1}] x [{y0}, {y1}] is empty or not finite"
            )));
        }
        Ok(RectDomain { x0, x1, y0, y1 })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.x0..=self.x1).contains(&z.re) && (self.y0..=self.y1).contains(&z.im)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone)]
pub struct WeierstrassData {
    pub gauss: AnalyticExpr,
    pub height: AnalyticExpr,
    pub domain: RectDomain,
    /// Period in `y` when the domain is a strip quotient such as `C / 2πi`.
    pub periodic_y: Option<f64>,
}

impl WeierstrassData {
    pub fn new(gauss: AnalyticExpr, height: AnalyticExpr, domain: RectDomain) -> Result<Self> {
        if height.as_constant() == Some(Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidParameter("height function h is identically zero".into()));
        }
        Ok(WeierstrassData { gauss, height, domain, periodic_y: None })
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.periodic_y = Some(period);
        self
    }

    /// Same surface with `h` replaced by `s h`.
    pub fn scaled(&self, s: f64) -> Self {
        WeierstrassData {
            height: AnalyticExpr::real(s) * self.height.clone(),
            ..self.clone()
        }
    }

    /// Data `(conj ∘ G ∘ conj, conj ∘ h ∘ conj)`, the mirror image across the real axis.
    pub fn reflected(&self) -> Self {
        let d = self.domain;
        WeierstrassData {
            gauss: self.gauss.reflect(),
            height: self.height.reflect(),
            domain: RectDomain { x0: d.x0, x1: d.x1, y0: -d.y1, y1: -d.y0 },
            periodic_y: self.periodic_y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub z: Complex64,
    pub lambda_sq: f64,
    /// Gauss curvature.
    pub k: f64,
    /// `u = -¼ log|K|`; infinite at umbilic points.
    pub u: f64,
    /// Squared norm of the second fundamental form, `-2K`.
    pub a_norm_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDiffSample {
    pub z: Complex64,
    pub q: Complex64,
    pub rho: Complex64,
}

/// Local expansions shared by the pointwise quantities.
struct Local {
    /// `F = G`, or `1/G` where `|G| > 1`; metric quantities are symmetric under the swap.
    f_abs_sq: f64,
    lambda_sq: f64,
    /// `κ = F F'/h`, so that `K = -16|κ|²/(1+|F|²)⁴`.
    kappa: Laurent,
}

impl Local {
    fn curvature(&self) -> Result<f64> {
        let kappa = self.kappa.value()?;
        Ok(-16.0 * kappa.norm_sqr() / (1.0 + self.f_abs_sq).powi(4))
    }
}

fn chosen_gauss(g: &Laurent) -> Result<Laurent> {
    let small = g.is_regular() && g.value().map(|v| v.norm() <= 1.0).unwrap_or(false);
    if small {
        Ok(g.clone())
    } else {
        g.recip()
    }
}

fn local(data: &WeierstrassData, z: Complex64) -> Result<Local> {
    let kappa = Laurent::grow(z, 1, |len| {
        let g = Laurent::eval_expr(&data.gauss, z, len)?;
        let h = Laurent::eval_expr(&data.height, z, len)?;
        let f = chosen_gauss(&g)?;
        f.mul(&f.derivative()).div(&h)
    })?;
    let (f0, h_over_f) = {
        let pair = |len: usize| -> Result<(Laurent, Laurent)> {
            let g = Laurent::eval_expr(&data.gauss, z, len)?;
            let h = Laurent::eval_expr(&data.height, z, len)?;
            let f = chosen_gauss(&g)?;
            let hf = h.div(&f)?;
            Ok((f, hf))
        };
        let hf = Laurent::grow(z, 1, |len| pair(len).map(|p| p.1))?;
        let f = Laurent::grow(z, 1, |len| pair(len).map(|p| p.0))?;
        (f.value()?, hf.value()?)
    };
    let f_abs_sq = f0.norm_sqr();
    let lambda_sq = (h_over_f.norm() * (1.0 + f_abs_sq)).powi(2) / 4.0;
    if !(lambda_sq.is_finite() && lambda_sq > f64::MIN_POSITIVE) {
        return Err(Error::DegeneratePoint(z));
    }
    Ok(Local { f_abs_sq, lambda_sq, kappa })
}

pub fn metric_sample(data: &WeierstrassData, z: Complex64) -> Result<MetricSample> {
    let loc = local(data, z)?;
    let kappa = loc.kappa.value().map_err(|_| Error::DegeneratePoint(z))?;
    let k = -16.0 * kappa.norm_sqr() / (1.0 + loc.f_abs_sq).powi(4);
    let u = if kappa.norm_sqr() > 0.0 {
        -std::f64::consts::LN_2 - 0.25 * kappa.norm_sqr().ln() + loc.f_abs_sq.ln_1p()
    } else {
        f64::INFINITY
    };
    Ok(MetricSample { z, lambda_sq: loc.lambda_sq, k, u, a_norm_sq: -2.0 * k })
}

fn hopf_series(g: &Laurent, h: &Laurent) -> Result<Laurent> {
    Ok(h.mul(&g.derivative()).div(g)?.neg())
}

/// Coefficient `q` of the Hopf differential `Q = q dz²`.
pub fn hopf_coefficient(data: &WeierstrassData, z: Complex64) -> Result<Complex64> {
    Laurent::grow(z, 1, |len| {
        let g = Laurent::eval_expr(&data.gauss, z, len)?;
        let h = Laurent::eval_expr(&data.height, z, len)?;
        hopf_series(&g, &h)
    })?
    .value()
}

fn frac(num: &Laurent, den: &Laurent, c: f64) -> Result<Laurent> {
    Ok(num.div(den)?.scale(Complex64::new(c, 0.0)))
}

/// Eight-term expression for `ρ` applied to expansions of `G` and `h`.
pub fn rho_from_series(g: &Laurent, h: &Laurent) -> Result<Laurent> {
    let g1 = g.derivative();
    let g2 = g1.derivative();
    let g3 = g2.derivative();
    let h1 = h.derivative();
    let h2 = h1.derivative();
    let terms = [
        frac(&g3, &g1, 1.0)?,
        frac(&g2, g, 0.5)?,
        frac(&g1.mul(&g1), &g.mul(g), -0.75)?,
        frac(&g2.mul(&g2), &g1.mul(&g1), -1.75)?,
        frac(&g2.mul(&h1), &g1.mul(h), 0.5)?,
        frac(&g1.mul(&h1), &g.mul(h), -0.5)?,
        frac(&h2, h, -1.0)?,
        frac(&h1.mul(&h1), &h.mul(h), 1.25)?,
    ];
    let refs: Vec<&Laurent> = terms.iter().collect();
    Ok(Laurent::sum(&refs, TERM_CANCEL_TOL))
}

/// Laurent expansion of `ρ` about `z`, including any pole part.
pub fn entropy_laurent(data: &WeierstrassData, z: Complex64, need: i32) -> Result<Laurent> {
    Laurent::grow(z, need, |len| {
        let g = Laurent::eval_expr(&data.gauss, z, len)?;
        let h = Laurent::eval_expr(&data.height, z, len)?;
        rho_from_series(&g, &h)
    })
}

fn regular_value(s: &Laurent, err: Error) -> Result<Complex64> {
    if s.is_regular() {
        s.value()
    } else {
        Err(err)
    }
}

/// Entropy coefficient `ρ` from the eight-term expression in `G`, `h` and
/// their derivatives.
pub fn entropy_coefficient(data: &WeierstrassData, z: Complex64) -> Result<Complex64> {
    let rho = entropy_laurent(data, z, 1)?;
    if rho.is_regular() {
        return rho.value();
    }
    match local(data, z) {
        Err(Error::DegeneratePoint(_)) => Err(Error::DegeneratePoint(z)),
        _ => Err(Error::UmbilicPoint(z)),
    }
}

fn schwarzian_series(g: &Laurent) -> Result<Laurent> {
    let g1 = g.derivative();
    let r = g1.derivative().div(&g1)?;
    Ok(Laurent::sum(&[&r.derivative(), &r.mul(&r).scale(Complex64::new(-0.5, 0.0))], TERM_CANCEL_TOL))
}

/// Schwarzian derivative `{G, z} = (G''/G')' - ½(G''/G')²`.
pub fn schwarzian(gauss: &AnalyticExpr, z: Complex64) -> Result<Complex64> {
    let s = Laurent::grow(z, 1, |len| {
        let g = Laurent::eval_expr(gauss, z, len)?;
        let g1 = g.derivative();
        if g1.valuation() > 0 || g1.known_until() <= 0 {
            return Err(Error::CriticalPoint(z));
        }
        schwarzian_series(&g)
    })
    .map_err(|e| match e {
        Error::PoleAtPoint(_) => Error::CriticalPoint(z),
        e => e,
    })?;
    regular_value(&s, Error::CriticalPoint(z))
}

/// `ρ` through the Hopf coefficient: `ρ = 2{G,z} - q''/q + (5/4)(q'/q)²`.
pub fn entropy_coefficient_via_hopf(data: &WeierstrassData, z: Complex64) -> Result<Complex64> {
    let s = Laurent::grow(z, 1, |len| {
        let g = Laurent::eval_expr(&data.gauss, z, len)?;
        let h = Laurent::eval_expr(&data.height, z, len)?;
        let q = hopf_series(&g, &h)?;
        let q1 = q.derivative();
        let l = q1.div(&q)?;
        let terms = [
            schwarzian_series(&g)?.scale(Complex64::new(2.0, 0.0)),
            frac(&q1.derivative(), &q, -1.0)?,
            l.mul(&l).scale(Complex64::new(1.25, 0.0)),
        ];
        let refs: Vec<&Laurent> = terms.iter().collect();
        Ok(Laurent::sum(&refs, TERM_CANCEL_TOL))
    })?;
    regular_value(&s, Error::UmbilicPoint(z))
}

pub fn quad_diff_sample(data: &WeierstrassData, z: Complex64) -> Result<QuadDiffSample> {
    Ok(QuadDiffSample {
        z,
        q: hopf_coefficient(data, z)?,
        rho: entropy_coefficient(data, z)?,
    })
}

/// Pointwise norms `|T|_g` and `|T̂|_g = |K| |T|_g` of the entropy form
/// `T = Re P`. At umbilic points `|T|` is infinite and `|T̂|` is its
/// continuous extension, computed from the regular product `κ² ρ`.
pub fn entropy_form_norms(data: &WeierstrassData, z: Complex64) -> Result<(f64, f64)> {
    let loc = local(data, z)?;
    let rho = entropy_laurent(data, z, 1)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    if rho.is_regular() {
        let t = rho.value()?.norm() / (sqrt2 * loc.lambda_sq);
        return Ok((t, loc.curvature()?.abs() * t));
    }
    let weighted = Laurent::grow(z, 1, |len| {
        let g = Laurent::eval_expr(&data.gauss, z, len)?;
        let h = Laurent::eval_expr(&data.height, z, len)?;
        let f = chosen_gauss(&g)?;
        let kappa = f.mul(&f.derivative()).div(&h)?;
        Ok(kappa.mul(&kappa).mul(&rho_from_series(&g, &h)?))
    })?;
    let w = regular_value(&weighted, Error::DegeneratePoint(z))?;
    let that = 16.0 * w.norm() / ((1.0 + loc.f_abs_sq).powi(4) * sqrt2 * loc.lambda_sq);
    Ok((f64::INFINITY, that))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn data(g: &str, h: &str) -> WeierstrassData {
        let dom = RectDomain::new(-3.0, 3.0, -3.0, 3.0).unwrap();
        WeierstrassData::new(AnalyticExpr::parse(g).unwrap(), AnalyticExpr::parse(h).unwrap(), dom).unwrap()
    }

    fn catenoid() -> WeierstrassData {
        data("-exp(z)", "1")
    }

    #[test]
    fn catenoid_metric_and_curvature() {
        let m = metric_sample(&catenoid(), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(m.lambda_sq, 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.k, -1.0, max_relative = 1e-12);
        assert_relative_eq!(m.u, 0.0, epsilon = 1e-12);
        let m = metric_sample(&catenoid(), c(1.0, 0.4)).unwrap();
        let sech = 1.0 / 1f64.cosh();
        assert_relative_eq!(m.lambda_sq, 1f64.cosh().powi(2), max_relative = 1e-12);
        assert_relative_eq!(m.k, -sech.powi(4), max_relative = 1e-12);
        assert_relative_eq!(m.k, -0.176378, max_relative = 1e-5);
        assert_relative_eq!(m.u, -0.25 * m.k.abs().ln(), max_relative = 1e-12);
    }

    #[test]
    fn enneper_metric_including_the_origin() {
        let e = data("z", "z");
        let m = metric_sample(&e, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(m.k, -1.0, max_relative = 1e-12);
        // G = 0 and h = 0 cancel at the origin
        let m0 = metric_sample(&e, c(0.0, 0.0)).unwrap();
        assert_relative_eq!(m0.lambda_sq, 0.25, max_relative = 1e-12);
        assert_relative_eq!(m0.k, -16.0, max_relative = 1e-12);
    }

    #[test]
    fn pole_of_gauss_map_is_handled_by_inversion() {
        // the metric and curvature only see G up to G -> 1/G
        let a = metric_sample(&data("1/z", "z"), c(0.0, 0.0)).unwrap();
        let b = metric_sample(&data("z", "z"), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(a.lambda_sq, b.lambda_sq, max_relative = 1e-12);
        assert_relative_eq!(a.k, b.k, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_point_is_reported() {
        let d = data("z", "z^2");
        assert!(matches!(metric_sample(&d, c(0.0, 0.0)), Err(Error::DegeneratePoint(_))));
    }

    #[test]
    fn gauss_equation_holds() {
        for (g, h) in [("-exp(z)", "1"), ("z", "z"), ("1+z^2", "1"), ("(0.3-exp(z))/(1-0.3*exp(z))", "exp(z)")] {
            let m = metric_sample(&data(g, h), c(0.3, -0.7)).unwrap();
            assert_eq!(m.a_norm_sq, -2.0 * m.k);
            assert!(m.k <= 0.0 && m.lambda_sq > 0.0);
        }
    }

    #[test]
    fn hopf_coefficients() {
        for z in [c(0.0, 0.0), c(1.2, -0.4)] {
            assert_relative_eq!((hopf_coefficient(&catenoid(), z).unwrap() - c(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-13);
            let q = hopf_coefficient(&data("-exp(z)", "-i"), z).unwrap();
            assert_relative_eq!((q - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-13);
        }
        let q = hopf_coefficient(&data("1+z^2", "1"), c(1.0, 0.0)).unwrap();
        assert_relative_eq!((q - c(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn entropy_coefficient_examples() {
        let r = entropy_coefficient(&catenoid(), c(0.4, 0.9)).unwrap();
        assert_relative_eq!((r - c(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        let r = entropy_coefficient(&data("z", "z"), c(1.0, 0.0)).unwrap();
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-12);
        let r = entropy_coefficient(&data("z", "z"), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-12);
        let r = entropy_coefficient(&data("1+z^2", "1"), c(0.1, 0.0)).unwrap();
        // G'/G = 2z/(1+z²), G''/G' = 1/z and G''' = 0
        let closed = 1.0 / 1.01 - 3.0 * 0.01 / 1.0201 - 7.0 / (4.0 * 0.01);
        assert_relative_eq!(r.re, closed, max_relative = 1e-12);
        assert_relative_eq!(r.re, -174.03930987158, max_relative = 1e-11);
        assert_relative_eq!(r.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn umbilic_is_refused() {
        let d = data("1+z^2", "1");
        assert!(matches!(entropy_coefficient(&d, c(0.0, 0.0)), Err(Error::UmbilicPoint(_))));
    }

    #[test]
    fn schwarzian_examples() {
        assert_relative_eq!(schwarzian(&AnalyticExpr::var(), c(0.3, 0.1)).unwrap().norm(), 0.0, epsilon = 1e-14);
        let e = AnalyticExpr::parse("exp(z)").unwrap();
        assert_relative_eq!((schwarzian(&e, c(-0.2, 1.0)).unwrap() - c(-0.5, 0.0)).norm(), 0.0, epsilon = 1e-13);
        let m = AnalyticExpr::parse("(2*exp(z)+1)/(exp(z)+1)").unwrap();
        assert_relative_eq!((schwarzian(&m, c(0.5, 0.5)).unwrap() - c(-0.5, 0.0)).norm(), 0.0, epsilon = 1e-12);
        let crit = AnalyticExpr::parse("z^2").unwrap();
        assert!(matches!(schwarzian(&crit, c(0.0, 0.0)), Err(Error::CriticalPoint(_))));
    }

    #[test]
    fn two_routes_to_rho_agree() {
        let cases = [
            ("-exp(z)", "1"),
            ("-exp(z)", "-i"),
            ("(0.5-exp(z))/(1-0.5*exp(z))", "1-0.25*exp(-z)"),
            ("1+z^2", "exp(z)"),
            ("z^3-2", "z+3"),
        ];
        for (g, h) in cases {
            for z in [c(0.3, 0.2), c(-0.6, 1.1)] {
                let d = data(g, h);
                let a = entropy_coefficient(&d, z).unwrap();
                let b = entropy_coefficient_via_hopf(&d, z).unwrap();
                assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()), "{g}, {h}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn catenoid_norms() {
        let (t, th) = entropy_form_norms(&catenoid(), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(t, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(th, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        let (t, th) = entropy_form_norms(&catenoid(), c(1.0, 2.0)).unwrap();
        let ch = 1f64.cosh();
        assert_relative_eq!(t, std::f64::consts::SQRT_2 / (2.0 * ch * ch), max_relative = 1e-12);
        assert_relative_eq!(t, 0.29697, max_relative = 1e-4);
        assert_relative_eq!(th, std::f64::consts::SQRT_2 / (2.0 * ch.powi(6)), max_relative = 1e-12);
        assert_relative_eq!(th, 0.0523785, max_relative = 1e-5);
        let (t, th) = entropy_form_norms(&data("z", "z"), c(1.0, 0.0)).unwrap();
        assert_relative_eq!(t, 0.0, epsilon = 1e-12);
        assert_relative_eq!(th, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn norm_matches_tensor_contraction() {
        let d = data("(0.3-exp(z))/(1-0.3*exp(z))", "1-0.09*exp(-z)");
        let z = c(0.4, 0.8);
        let rho = entropy_coefficient(&d, z).unwrap();
        let m = metric_sample(&d, z).unwrap();
        // T = Re((ρ/2) dz²) has components T_xx = -T_yy = Re ρ/2, T_xy = -Im ρ/2
        let (txx, tyy, txy) = (rho.re / 2.0, -rho.re / 2.0, -rho.im / 2.0);
        let contraction = (txx * txx + tyy * tyy + 2.0 * txy * txy).sqrt() / m.lambda_sq;
        let (t, _) = entropy_form_norms(&d, z).unwrap();
        assert_relative_eq!(t, contraction, max_relative = 1e-12);
    }

    #[test]
    fn weighted_norm_extends_continuously_over_umbilics() {
        let d = data("1+z^2", "1");
        let (t0, th0) = entropy_form_norms(&d, c(0.0, 0.0)).unwrap();
        assert!(t0.is_infinite());
        assert!(th0.is_finite() && th0 > 0.0);
        for r in [1e-3, 1e-4] {
            let (_, th) = entropy_form_norms(&d, c(r, 0.0)).unwrap();
            assert_relative_eq!(th, th0, max_relative = 10.0 * r);
        }
    }

    #[test]
    fn scaling_height_scales_q_and_keeps_rho() {
        let d = data("(0.5-exp(z))/(1-0.5*exp(z))", "1-0.25*exp(-z)");
        let z = c(0.2, 0.7);
        for s in [0.5, 2.0, 10.0] {
            let ds = d.scaled(s);
            let q = hopf_coefficient(&d, z).unwrap();
            let qs = hopf_coefficient(&ds, z).unwrap();
            assert_relative_eq!((qs - q * s).norm(), 0.0, epsilon = 1e-12 * s);
            let r = entropy_coefficient(&d, z).unwrap();
            let rs = entropy_coefficient(&ds, z).unwrap();
            assert_relative_eq!((rs - r).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn reflection_preserves_norms() {
        let d = data("(0.5-exp(z))/(1-(0.5+0.2i)*exp(z))", "1+(0.1-0.3i)*z");
        let r = d.reflected();
        for z in [c(0.3, 0.4), c(-0.5, 1.2)] {
            let (t, th) = entropy_form_norms(&d, z).unwrap();
            let (tr, thr) = entropy_form_norms(&r, z.conj()).unwrap();
            assert_relative_eq!(t, tr, max_relative = 1e-10);
            assert_relative_eq!(th, thr, max_relative = 1e-10);
        }
    }

    #[test]
    fn rho_is_holomorphic() {
        // central-difference d/dzbar of a holomorphic function is O(δ²)
        let d = data("(0.5-exp(z))/(1-0.5*exp(z))", "1-0.25*exp(-z)");
        let z0 = c(0.3, 0.5);
        let dbar = |delta: f64| {
            let f = |dz: Complex64| entropy_coefficient(&d, z0 + dz).unwrap();
            let dx = (f(c(delta, 0.0)) - f(c(-delta, 0.0))) / (2.0 * delta);
            let dy = (f(c(0.0, delta)) - f(c(0.0, -delta))) / (2.0 * delta);
            (0.5 * (dx + c(0.0, 1.0) * dy)).norm()
        };
        let r: Vec<f64> = [4e-2, 2e-2, 1e-2].iter().map(|&h| dbar(h)).collect();
        for w in r.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.8..2.2).contains(&order), "order {order}");
        }
    }
}
