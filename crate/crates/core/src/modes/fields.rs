//! Input-plane mode fields, all including the focusing phase `exp(-ikr²/2L)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{BeamParams, OpticalGeometry};
use crate::mathkern::{hermite_unchecked, laguerre_unchecked, ln_factorial};

/// `√(p!/(π(|l|+p)!)) (1/a) (r/a)^|l| L_p^|l|(r²/a²) e^{-r²/2a²}`.
pub(crate) fn lg_radial_amplitude(p: u32, l_abs: u32, r: f64, a: f64) -> f64 {
    let s = r / a;
    let lag = laguerre_unchecked(p, l_abs as f64, s * s);
    if s == 0.0 {
        return if l_abs == 0 { lag / (a * PI.sqrt()) } else { 0.0 };
    }
    let log_mag = 0.5 * (ln_factorial(p) - ln_factorial(p + l_abs)) + l_abs as f64 * s.ln()
        - 0.5 * s * s;
    log_mag.exp() * lag / (a * PI.sqrt())
}

fn focusing(r2: f64, geom: &OpticalGeometry) -> f64 {
    -geom.wavenumber() * r2 / (2.0 * geom.range)
}

/// `Φ_{p,l}(r, θ)`, unit-normalized over the plane.
pub fn lg_input_field(
    p: u32,
    l: i32,
    r: f64,
    theta: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
) -> Complex64 {
    let amp = lg_radial_amplitude(p, l.unsigned_abs(), r, params.width);
    Complex64::from_polar(amp, focusing(r * r, geom) + l as f64 * theta)
}

/// `Φ_{n,m}(x, y)`, unit-normalized over the plane.
pub fn hg_input_field(
    n: u32,
    m: u32,
    x: f64,
    y: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
) -> Complex64 {
    let a = params.width;
    let (sx, sy) = (x / a, y / a);
    let log_norm = -0.5 * (ln_factorial(n) + ln_factorial(m) + (n + m) as f64 * 2f64.ln());
    let amp = log_norm.exp() / (a * PI.sqrt())
        * hermite_unchecked(n, sx)
        * hermite_unchecked(m, sy)
        * (-0.5 * (sx * sx + sy * sy)).exp();
    Complex64::from_polar(1.0, focusing(x * x + y * y, geom)) * amp
}

/// Focused fundamental Gaussian, `Φ_{0,0}(x, y)`.
pub fn gaussian_input_field(
    x: f64,
    y: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
) -> Complex64 {
    hg_input_field(0, 0, x, y, params, geom)
}
