//! Dormand–Prince 5(4) integration of holomorphic ODE systems along paths
//! in the complex plane.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A straight segment or circular arc, parametrized by `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathPiece {
    Segment { from: Complex64, to: Complex64 },
    Arc { center: Complex64, radius: f64, theta0: f64, theta1: f64 },
}

impl PathPiece {
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            PathPiece::Segment { from, to } => from + (to - from) * s,
            PathPiece::Arc { center, radius, theta0, theta1 } => {
                center + Complex64::from_polar(radius, theta0 + (theta1 - theta0) * s)
            }
        }
    }

    /// `dz/ds`.
    pub fn velocity(&self, s: f64) -> Complex64 {
        match *self {
            PathPiece::Segment { from, to } => to - from,
            PathPiece::Arc { radius, theta0, theta1, .. } => {
                let dt = theta1 - theta0;
                Complex64::new(0.0, dt) * Complex64::from_polar(radius, theta0 + dt * s)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dz = rhs(z, y)` along `piece` from `y0`, calling `observe`
/// after every accepted step. Returns the state at the end of the piece.
pub fn integrate_piece<const N: usize, F, O>(
    piece: &PathPiece,
    y0: [Complex64; N],
    rhs: &F,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<[Complex64; N]>
where
    F: Fn(Complex64, &[Complex64; N]) -> Result<[Complex64; N]>,
    O: FnMut(Complex64, &[Complex64; N]) -> Result<()>,
{
    let zero = Complex64::new(0.0, 0.0);
    let f = |s: f64, y: &[Complex64; N]| -> Result<[Complex64; N]> {
        let z = piece.point(s);
        let mut d = rhs(z, y).map_err(|e| match e {
            Error::PoleAtPoint(_) => Error::PoleOnPath(z),
            e => e,
        })?;
        if d.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::PoleOnPath(z));
        }
        let v = piece.velocity(s);
        for x in d.iter_mut() {
            *x *= v;
        }
        Ok(d)
    };
    let mut s = 0.0;
    let mut y = y0;
    let mut k = [[zero; N]; 7];
    k[0] = f(0.0, &y)?;
    let mut h = 0.05f64;
    let mut steps = 0usize;
    while s < 1.0 {
        if steps >= opts.max_steps {
            return Err(Error::StepFailure { z: piece.point(s), reason: "step budget exhausted".into() });
        }
        steps += 1;
        let last = s + h >= 1.0;
        if last {
            h = 1.0 - s;
        }
        for st in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(st) {
                let a = A[st][j];
                if a != 0.0 {
                    for n in 0..N {
                        yi[n] += kj[n] * (a * h);
                    }
                }
            }
            k[st] = f(s + C[st] * h, &yi)?;
        }
        let mut ynew = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = A[6][j];
            if b != 0.0 {
                for n in 0..N {
                    ynew[n] += kj[n] * (b * h);
                }
            }
        }
        let mut err = 0.0f64;
        for n in 0..N {
            let mut e = zero;
            for (j, kj) in k.iter().enumerate() {
                e += kj[n] * E[j];
            }
            e *= h;
            let scale = opts.atol + opts.rtol * y[n].norm().max(ynew[n].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::PoleOnPath(piece.point(s + h)));
        }
        if err <= 1.0 {
            s = if last { 1.0 } else { s + h };
            y = ynew;
            k[0] = k[6];
            observe(piece.point(s), &y)?;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        if h < 1e-13 && s < 1.0 {
            return Err(Error::StepFailure { z: piece.point(s), reason: "step size underflow".into() });
        }
    }
    Ok(y)
}
