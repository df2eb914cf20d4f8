//! LG modes propagated between hard circular pupils.
//!
//! After the azimuthal integral the Fresnel kernel leaves one radial Hankel
//! transform per mode:
//!
//! `φ_{p,l}(r', θ') = R_{p,l}(r') · e^{i(kL + lθ' + kr'²/2L - lπ/2)} / i`
//!
//! with the real profile `R = (2π/λL) ∫_0^{r_t} Φ_{p,|l|}(r) J_l(krr'/L) r dr`
//! and `Φ` the input radial amplitude. All power quantities only need `R`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fields::lg_radial_amplitude;
use super::{BeamParams, OpticalGeometry};
use crate::error::{Error, Result};
use crate::mathkern::bessel::bessel_j_orders_into;
use crate::mathkern::quadrature::{integrate_with_breaks, QuadratureSpec, Rect};
use crate::mathkern::{ln_factorial, quad_2d};

/// Modes whose radial profiles are evaluated together.
enum ModeSet<'a> {
    /// `p = 0`, `l = 0..=l_max`, filled by a cheap upward recurrence in `l`.
    Azimuthal { l_max: usize },
    /// Arbitrary `(p, |l|)` pairs.
    List(&'a [(u32, u32)]),
}

impl ModeSet<'_> {
    fn len(&self) -> usize {
        match self {
            ModeSet::Azimuthal { l_max } => l_max + 1,
            ModeSet::List(m) => m.len(),
        }
    }

    fn max_order(&self) -> usize {
        match self {
            ModeSet::Azimuthal { l_max } => *l_max,
            ModeSet::List(m) => m.iter().map(|&(_, l)| l as usize).max().unwrap_or(0),
        }
    }

    /// Largest `2p + |l|`, which sets where the input amplitudes die out.
    fn max_degree(&self) -> f64 {
        match self {
            ModeSet::Azimuthal { l_max } => *l_max as f64,
            ModeSet::List(m) => m.iter().map(|&(p, l)| (2 * p + l) as f64).fold(0.0, f64::max),
        }
    }

    /// Input radial amplitudes at radius `r` into `out`.
    fn amplitudes(&self, r: f64, a: f64, out: &mut [f64]) {
        match self {
            ModeSet::Azimuthal { .. } => {
                let s = r / a;
                let lead = (-0.5 * s * s).exp() / (a * PI.sqrt());
                if lead > 1e-290 {
                    let mut v = lead;
                    out[0] = v;
                    for (l, slot) in out.iter_mut().enumerate().skip(1) {
                        v *= s / (l as f64).sqrt();
                        *slot = v;
                    }
                } else {
                    let log_lead = -0.5 * s * s - (a * PI.sqrt()).ln();
                    for (l, slot) in out.iter_mut().enumerate() {
                        let lg = log_lead + l as f64 * s.ln() - 0.5 * ln_factorial(l as u32);
                        *slot = lg.exp();
                    }
                }
            }
            ModeSet::List(modes) => {
                for (slot, &(p, l)) in out.iter_mut().zip(modes.iter()) {
                    *slot = lg_radial_amplitude(p, l, r, a);
                }
            }
        }
    }

    fn order(&self, i: usize) -> usize {
        match self {
            ModeSet::Azimuthal { .. } => i,
            ModeSet::List(m) => m[i].1 as usize,
        }
    }
}

/// Sorted, deduplicated break points on `[lo, hi]`.
fn breakpoints(lo: f64, hi: f64, panels: usize, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let n = panels.max(1);
    let mut pts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    pts.extend(extra.into_iter().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    let tol = 1e-12 * (hi - lo);
    pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    if let Some(last) = pts.last_mut() {
        *last = hi;
    }
    pts
}

/// Half-period panels of `J_l(krr'/L)` over `[0, upper]`, plus break points
/// at multiples of `scale`.
fn oscillation_breaks(upper: f64, half_period: f64, scale: f64) -> Vec<f64> {
    let panels = if half_period.is_finite() && half_period > 0.0 {
        (upper / half_period).ceil().min(4000.0) as usize
    } else {
        1
    };
    let extra = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0].map(|m| m * scale);
    breakpoints(0.0, upper, panels, extra)
}

/// Evaluates the profiles `R_i(r')` of a mode set.
struct RadialProfiles<'a> {
    set: ModeSet<'a>,
    a: f64,
    k: f64,
    range: f64,
    prefactor: f64,
    upper: f64,
    scale: f64,
    spec: QuadratureSpec,
}

impl<'a> RadialProfiles<'a> {
    fn new(set: ModeSet<'a>, params: &BeamParams, geom: &OpticalGeometry, spec: &QuadratureSpec) -> Result<Self> {
        let r_t = geom.tx_radius()?;
        geom.rx_radius()?;
        spec.validate()?;
        let a = params.width;
        // amplitudes are below e^{-100} relative beyond this radius
        let cutoff = a * (set.max_degree().sqrt() + 10.0);
        let scale = a * set.max_degree().max(1.0).sqrt();
        Ok(Self {
            set,
            a,
            k: geom.wavenumber(),
            range: geom.range,
            prefactor: 2.0 * PI / (geom.wavelength * geom.range),
            upper: r_t.min(cutoff),
            scale,
            spec: QuadratureSpec {
                rel_tol: 0.1 * spec.rel_tol,
                ..*spec
            },
        })
    }

    fn eval(&self, r_out: f64) -> Result<Vec<f64>> {
        let n = self.set.len();
        let orders = self.set.max_order();
        let kr = self.k * r_out / self.range;
        let half_period = if kr > 0.0 { PI / kr } else { f64::INFINITY };
        let breaks = oscillation_breaks(self.upper, half_period, self.scale);
        let mut amps = vec![0.0; n];
        let mut bessel = vec![0.0; orders + 1];
        let est = integrate_with_breaks(
            |r: f64| {
                self.set.amplitudes(r, self.a, &mut amps);
                bessel_j_orders_into(kr * r, &mut bessel);
                (0..n)
                    .map(|i| amps[i] * bessel[self.set.order(i)] * r)
                    .collect::<Vec<f64>>()
            },
            &breaks,
            &self.spec,
        )?;
        let mut value = est.value;
        for v in &mut value {
            *v *= self.prefactor;
        }
        Ok(value)
    }

    /// `∫_0^{r_r} g(R(r')) r' dr'` for a vector-valued combination `g`.
    fn integrate_power<G>(&self, r_r: f64, outer: &QuadratureSpec, combine: G) -> Result<Vec<f64>>
    where
        G: Fn(&[f64]) -> Vec<f64>,
    {
        let half_period = PI * self.range / (self.k * self.upper.max(self.a));
        let spot = self.range / (self.k * self.a);
        let breaks = oscillation_breaks(r_r, half_period, spot);
        let mut failure = None;
        let est = integrate_with_breaks(
            |r_out: f64| match self.eval(r_out) {
                Ok(prof) => {
                    let mut v = combine(&prof);
                    for x in &mut v {
                        *x *= r_out;
                    }
                    v
                }
                Err(e) => {
                    let width = combine(&vec![0.0; self.set.len()]).len();
                    failure.get_or_insert(e);
                    vec![0.0; width]
                }
            },
            &breaks,
            outer,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est?.value)
    }
}

fn lg_phase(l: i32, r_out: f64, theta_out: f64, geom: &OpticalGeometry) -> Complex64 {
    let k = geom.wavenumber();
    let l_f = l as f64;
    let phase = k * geom.range + l_f * theta_out + k * r_out * r_out / (2.0 * geom.range)
        - l_f * PI / 2.0;
    // divide by i
    Complex64::from_polar(1.0, phase) * Complex64::new(0.0, -1.0)
}

fn check_radius(r_out: f64, geom: &OpticalGeometry) -> Result<()> {
    let r_r = geom.rx_radius()?;
    if !(0.0..=r_r * (1.0 + 1e-12)).contains(&r_out) {
        return Err(Error::domain(format!(
            "receiver radius {r_out} m outside [0, {r_r}] m"
        )));
    }
    Ok(())
}

/// Real radial profile `R_{p,l}(r')` of the output field; `|φ| = |R|`.
pub fn lg_radial_profile(
    p: u32,
    l: i32,
    r_out: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_radius(r_out, geom)?;
    let modes = [(p, l.unsigned_abs())];
    let prof = RadialProfiles::new(ModeSet::List(&modes), params, geom, spec)?;
    let value = prof.eval(r_out)?[0];
    // J_{-n} = (-1)^n J_n
    Ok(if l < 0 && l % 2 != 0 { -value } else { value })
}

/// Output field `φ_{p,l}(r', θ')` on the receiver plane.
pub fn lg_output_field(
    p: u32,
    l: i32,
    r_out: f64,
    theta_out: f64,
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let radial = lg_radial_profile(p, l, r_out, params, geom, spec)?;
    Ok(lg_phase(l, r_out, theta_out, geom) * radial)
}

/// Leakage `|∫∫ φ_A φ_B^* r' dθ' dr'|²` over the receiver disk.
///
/// Self-overlap is the square of the mode's transmissivity, since the output
/// fields are not renormalized to the receiver pupil.
///
/// The azimuthal integral is `2π δ_{l_A l_B}`, so modes of different `l`
/// return exactly zero.
pub fn lg_overlap(
    mode_a: (u32, i32),
    mode_b: (u32, i32),
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let r_r = geom.rx_radius()?;
    geom.tx_radius()?;
    if mode_a.1 != mode_b.1 {
        return Ok(0.0);
    }
    let modes = [(mode_a.0, mode_a.1.unsigned_abs()), (mode_b.0, mode_b.1.unsigned_abs())];
    let prof = RadialProfiles::new(ModeSet::List(&modes), params, geom, spec)?;
    let v = prof.integrate_power(r_r, spec, |r| vec![r[0] * r[1]])?[0];
    let amp = 2.0 * PI * v;
    Ok(amp * amp)
}

/// The same leakage with both the radial and azimuthal integrals done by
/// quadrature on the full output fields.
pub fn lg_overlap_numeric(
    mode_a: (u32, i32),
    mode_b: (u32, i32),
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let r_r = geom.rx_radius()?;
    let mut cached: Option<(f64, Result<(Complex64, Complex64)>)> = None;
    let mut failure = None;
    let value = quad_2d(
        |r_out, theta| {
            let fresh = !matches!(&cached, Some((r, _)) if *r == r_out);
            if fresh {
                let fields = lg_output_field(mode_a.0, mode_a.1, r_out, 0.0, params, geom, spec)
                    .and_then(|fa| {
                        lg_output_field(mode_b.0, mode_b.1, r_out, 0.0, params, geom, spec)
                            .map(|fb| (fa, fb))
                    });
                cached = Some((r_out, fields));
            }
            match &cached {
                Some((_, Ok((fa, fb)))) => {
                    let spin = Complex64::from_polar(1.0, (mode_a.1 - mode_b.1) as f64 * theta);
                    fa * fb.conj() * spin * r_out
                }
                Some((_, Err(e))) => {
                    failure.get_or_insert_with(|| e.clone());
                    Complex64::new(0.0, 0.0)
                }
                None => unreachable!(),
            }
        },
        Rect::new(0.0, r_r, 0.0, 2.0 * PI),
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(value.norm_sqr())
}

/// Transmissivities `η(l)` of `LG(0, l)` for `l = 0..=l_max` (even in `l`).
pub fn lg_mode_transmissivities(
    l_max: usize,
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let r_r = geom.rx_radius()?;
    let prof = RadialProfiles::new(ModeSet::Azimuthal { l_max }, params, geom, spec)?;
    let v = prof.integrate_power(r_r, spec, |r| r.iter().map(|x| x * x).collect())?;
    Ok(v.into_iter().map(|x| 2.0 * PI * x).collect())
}

/// Transmissivity `η(l)` of a single `LG(0, l)` mode.
pub fn lg_mode_transmissivity(
    l: i32,
    params: &BeamParams,
    geom: &OpticalGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let r_r = geom.rx_radius()?;
    let modes = [(0, l.unsigned_abs())];
    let prof = RadialProfiles::new(ModeSet::List(&modes), params, geom, spec)?;
    let v = prof.integrate_power(r_r, spec, |r| vec![r[0] * r[0]])?[0];
    Ok(2.0 * PI * v)
}
