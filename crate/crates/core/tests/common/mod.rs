//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule: `panels` equal panels of an `order`-point Gauss rule.
pub struct Composite {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Composite {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (hi - lo) / panels as f64;
        let mut points = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                points.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Self { points, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Tensor-product rule over `[x0, x1] × [y0, y1]` for complex integrands.
pub fn tensor_2d(x: &Composite, y: &Composite, f: impl Fn(f64, f64) -> Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (&xi, &wx) in x.points.iter().zip(&x.weights) {
        let mut row = Complex64::new(0.0, 0.0);
        for (&yj, &wy) in y.points.iter().zip(&y.weights) {
            row += wy * f(xi, yj);
        }
        total += wx * row;
    }
    total
}

/// Stratified Monte Carlo over a rectangle: one uniform point per cell of
/// an `n × n` lattice. Returns the estimate.
pub fn jittered_mc(f: impl Fn(f64, f64) -> f64, rect: (f64, f64, f64, f64), n: usize, seed: u64) -> f64 {
    let (x0, x1, y0, y1) = rect;
    let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = x0 + (i as f64 + rng.random::<f64>()) * hx;
            let y = y0 + (j as f64 + rng.random::<f64>()) * hy;
            sum += f(x, y);
        }
    }
    sum * hx * hy
}

/// `ln n!` by direct summation.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Focused `LG(0, l)` input field, written out from its definition.
pub fn lg0_input(l: i32, r: f64, theta: f64, a: f64, k: f64, range: f64) -> Complex64 {
    let la = l.unsigned_abs();
    let amp = (-(0.5 * (PI.ln() + ln_factorial(la))) + la as f64 * (r / a).ln() - r * r / (2.0 * a * a)).exp() / a;
    let amp = if r == 0.0 { if la == 0 { 1.0 / (a * PI.sqrt()) } else { 0.0 } } else { amp };
    Complex64::from_polar(amp, l as f64 * theta - k * r * r / (2.0 * range))
}

/// Focused Gaussian input field.
pub fn gaussian_input(x: f64, y: f64, a: f64, k: f64, range: f64) -> Complex64 {
    let r2 = x * x + y * y;
    Complex64::from_polar((-r2 / (2.0 * a * a)).exp() / (a * PI.sqrt()), -k * r2 / (2.0 * range))
}

/// Fresnel propagation `(e^{ikL}/(iλL)) ∫ u(ρ) e^{ik|ρ'-ρ|²/2L} d²ρ` of an
/// input given on a disk, by a polar tensor rule.
pub fn fresnel_disk(
    u: impl Fn(f64, f64) -> Complex64,
    radius: f64,
    (xo, yo): (f64, f64),
    wavelength: f64,
    range: f64,
) -> Complex64 {
    let k = 2.0 * PI / wavelength;
    let rr = Composite::new(0.0, radius, 24, 16);
    let tt = Composite::new(0.0, 2.0 * PI, 24, 16);
    let integral = tensor_2d(&rr, &tt, |r, t| {
        let (x, y) = (r * t.cos(), r * t.sin());
        let d2 = (xo - x).powi(2) + (yo - y).powi(2);
        u(r, t) * Complex64::from_polar(r, k * d2 / (2.0 * range))
    });
    prefactor(k, wavelength, range) * integral
}

/// As [`fresnel_disk`] over the square `|x|, |y| ≤ side/2`.
pub fn fresnel_square(
    u: impl Fn(f64, f64) -> Complex64,
    side: f64,
    (xo, yo): (f64, f64),
    wavelength: f64,
    range: f64,
) -> Complex64 {
    let k = 2.0 * PI / wavelength;
    let axis = Composite::new(-side / 2.0, side / 2.0, 32, 16);
    let integral = tensor_2d(&axis, &axis, |x, y| {
        let d2 = (xo - x).powi(2) + (yo - y).powi(2);
        u(x, y) * Complex64::from_polar(1.0, k * d2 / (2.0 * range))
    });
    prefactor(k, wavelength, range) * integral
}

fn prefactor(k: f64, wavelength: f64, range: f64) -> Complex64 {
    Complex64::from_polar(1.0, k * range) / Complex64::new(0.0, wavelength * range)
}

/// `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`.
pub fn bessel_integral(n: i32, x: f64) -> f64 {
    let panels = 8 + x.abs().ceil() as usize + n.unsigned_abs() as usize;
    Composite::new(0.0, PI, panels, 20).integrate(|t| (n as f64 * t - x * t.sin()).cos()) / PI
}

/// Relative error `|a - b| / |b|`.
pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
