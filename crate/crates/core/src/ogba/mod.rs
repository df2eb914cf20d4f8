//! Overlapping Gaussian beam arrays through hard square pupils.
//!
//! A focused Gaussian clipped by a square of side `l_t` produces a separable
//! far field. With `C = 2√π a/(λL)`, `u = l_t/(2√2 a)` and
//! `v(x) = a k x/(√2 L)`:
//!
//! `φ(x, y) = (C/i) e^{ikL + ik(x²+y²)/2L} F(x) F(y)`, `F(x) = Re[e^{-v²} erf(u + iv)]`
//!
//! so every rectangle's captured power is a product of two 1-D integrals of
//! `C F²`.

mod grid;
mod optics;

pub use grid::{AxisLayout, Pixel, PixelConfig, PixelGrid};
pub use optics::GridOptics;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::mathkern::erf_damped;
use crate::mathkern::quadrature::{integrate_with_breaks, QuadratureSpec};
use crate::mathkern::Rect;
use crate::modes::{BeamParams, OpticalGeometry};

const MAX_PANELS: usize = 20_000;

/// Per-axis far-field profile of one clipped Gaussian beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLink {
    amplitude: f64,
    u: f64,
    v_scale: f64,
    k: f64,
    range: f64,
    /// Panel width resolving both the spot and the clipping ripples.
    panel: f64,
}

impl SquareLink {
    pub fn new(params: &BeamParams, geom: &OpticalGeometry) -> Result<Self> {
        let l_t = geom.tx_side()?;
        let a = params.width;
        let k = geom.wavenumber();
        let l = geom.range;
        let spot = 2f64.sqrt() * l / (a * k);
        let ripple = geom.wavelength * l / l_t;
        Ok(Self {
            amplitude: 2.0 * PI.sqrt() * a / (geom.wavelength * l),
            u: l_t / (2.0 * 2f64.sqrt() * a),
            v_scale: a * k / (2f64.sqrt() * l),
            k,
            range: l,
            panel: spot.min(ripple),
        })
    }

    /// `F(x)`, real and even.
    pub fn envelope(&self, x: f64) -> f64 {
        erf_damped(self.u, self.v_scale * x).re
    }

    /// Power per unit length along one axis, `C F(x)²`.
    pub fn density(&self, x: f64) -> f64 {
        let f = self.envelope(x);
        self.amplitude * f * f
    }

    /// `∫_lo^hi C F(x)² dx`.
    pub fn axis_power(&self, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
        if hi == lo {
            return Ok(0.0);
        }
        let (a, b, sign) = if hi > lo { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
        let span = b - a;
        let mut breaks = vec![a];
        if span / self.panel <= MAX_PANELS as f64 {
            // lattice anchored at 0 keeps adjacent intervals consistent
            let mut i = (a / self.panel).floor() + 1.0;
            while i * self.panel < b {
                breaks.push(i * self.panel);
                i += 1.0;
            }
        } else {
            breaks.extend((1..MAX_PANELS).map(|i| a + span * i as f64 / MAX_PANELS as f64));
        }
        breaks.push(b);
        let est = integrate_with_breaks(|x: f64| self.density(x), &breaks, spec)?;
        Ok(sign * est.value)
    }

    /// Complex field of a beam aimed at the origin.
    pub fn field(&self, x: f64, y: f64) -> Complex64 {
        let phase = self.k * self.range + self.k * (x * x + y * y) / (2.0 * self.range);
        let mag = self.amplitude * self.envelope(x) * self.envelope(y);
        Complex64::from_polar(mag, phase) * Complex64::new(0.0, -1.0)
    }

    /// Power the beam aimed at `target` deposits in `rect`.
    pub fn rect_power(&self, rect: &Rect, target: (f64, f64), spec: &QuadratureSpec) -> Result<f64> {
        let px = self.axis_power(rect.x0 - target.0, rect.x1 - target.0, spec)?;
        let py = self.axis_power(rect.y0 - target.1, rect.y1 - target.1, spec)?;
        Ok(px * py)
    }
}

/// `φ_{0,0}(x', y')` of a focused Gaussian through a hard square transmitter.
pub fn gaussian_output_field(
    x: f64,
    y: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
) -> Result<Complex64> {
    Ok(SquareLink::new(params, geom)?.field(x, y))
}

/// Fraction of its own beam's power captured by `pixel`.
pub fn pixel_capture(
    pixel: &Pixel,
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    SquareLink::new(params, geom)?.rect_power(&pixel.rect, pixel.target, spec)
}

/// Power a beam leaks into the full `l_d × l_d` pixel `(n, m)` pitches away.
pub fn pixel_crosstalk(
    n: i64,
    m: i64,
    l_d: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let link = SquareLink::new(params, geom)?;
    let cx = n as f64 * l_d;
    let cy = m as f64 * l_d;
    let rect = Rect::new(cx - l_d / 2.0, cx + l_d / 2.0, cy - l_d / 2.0, cy + l_d / 2.0);
    link.rect_power(&rect, (0.0, 0.0), spec)
}

/// Mean leaked photons per pulse reaching pixel `(u, v)` from every other
/// beam, all beams carrying `params.intensity`.
pub fn interference_power(
    grid: &PixelGrid,
    pixel: (usize, usize),
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let optics = GridOptics::evaluate(grid, params, geom, spec)?;
    Ok(params.intensity * optics.leakage(pixel.0, pixel.1))
}
