//! Decoy-state BB84 key rates, capacities, and the mapping from leaked light
//! to spurious clicks.

mod crosstalk;
mod systems;

pub use crosstalk::CrosstalkMatrix;
pub use systems::{
    lg_channel_specs, lg_rate_from_transmissivities, lg_system_rate, ogba_channel_specs,
    ogba_rate_from_optics, ogba_system_rate, rate_from_specs, soft_channel_specs,
    soft_multimode_rate, ChannelRate, ChannelSpec, Separator, SystemRate,
};
pub(crate) use systems::{check_square_link, lg_specs_normalized};

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::mathkern::h2;
use crate::modes::{eta_soft_base, Aperture, OpticalGeometry};

/// Receiver and protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// Dark-click probability per detector per slot.
    pub dark_click: f64,
    pub efficiency: f64,
    pub visibility: f64,
    /// Error-correction inefficiency, 1 at the Shannon limit.
    pub f_leak: f64,
    /// Pulses (modes) per second.
    pub rep_rate: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            dark_click: 1e-6,
            efficiency: 1.0,
            visibility: 0.99,
            f_leak: 1.0,
            rep_rate: 1e10,
        }
    }
}

impl DetectorModel {
    pub fn new(dark_click: f64, efficiency: f64, visibility: f64, f_leak: f64, rep_rate: f64) -> Result<Self> {
        let model = Self {
            dark_click,
            efficiency,
            visibility,
            f_leak,
            rep_rate,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dark_click) {
            return Err(Error::domain(format!("p_dark = {} must be in [0, 1)", self.dark_click)));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::domain(format!("eta_det = {} must be in (0, 1]", self.efficiency)));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::domain(format!("visibility = {} must be in [0, 1]", self.visibility)));
        }
        if !(self.f_leak >= 1.0 && self.f_leak.is_finite()) {
            return Err(Error::domain(format!("f_leak = {} must be >= 1", self.f_leak)));
        }
        if !(self.rep_rate > 0.0 && self.rep_rate.is_finite()) {
            return Err(Error::domain(format!("nu_hz = {} must be positive", self.rep_rate)));
        }
        Ok(())
    }
}

/// What one detected channel sees per pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    /// End-to-end signal transmissivity, detector efficiency included.
    pub transmissivity: f64,
    /// Mean leaked photons per pulse arriving at the channel's detectors.
    pub noise_photons: f64,
}

impl ChannelPoint {
    pub fn new(transmissivity: f64, noise_photons: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::domain(format!("transmissivity {transmissivity} outside [0, 1]")));
        }
        if !(noise_photons >= 0.0 && noise_photons.is_finite()) {
            return Err(Error::domain(format!("noise photons {noise_photons} must be >= 0")));
        }
        Ok(Self {
            transmissivity,
            noise_photons,
        })
    }
}

/// Every intermediate of the rate chain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateBreakdown {
    /// Effective dark-click probability after adding leaked light.
    pub dark_eff: f64,
    /// Click probability from the signal pulse.
    pub p_p: f64,
    /// Probability that some detector clicks.
    pub p_r: f64,
    /// Quantum bit error rate; meaningless when `qber_defined` is false.
    pub qber: f64,
    pub qber_defined: bool,
    pub p_r0: f64,
    pub p_r1: f64,
    /// Single-photon clicks that carry the wrong bit.
    pub p_r1w: f64,
    pub y0: f64,
    pub y1: f64,
    pub eps1: f64,
    pub i_ab: f64,
    pub i_e: f64,
    /// Bits per mode before clamping at zero.
    pub rate_unclamped: f64,
}

impl RateBreakdown {
    /// Bits per mode, never negative.
    pub fn rate(&self) -> f64 {
        self.rate_unclamped.max(0.0)
    }
}

/// Dark-click probability including Poisson clicks from `noise_photons`.
pub fn noise_to_dark(noise_photons: f64, dark_click: f64, efficiency: f64) -> f64 {
    if noise_photons == 0.0 {
        return dark_click;
    }
    // 1 - (1 - p_d) e^{-η_d P}, arranged to keep precision for small P
    dark_click - (1.0 - dark_click) * (-efficiency * noise_photons).exp_m1()
}

/// Asymptotic decoy-state BB84 rate in bits per mode.
pub fn bb84_rate(channel: &ChannelPoint, det: &DetectorModel, intensity: f64) -> Result<RateBreakdown> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::domain(format!("intensity {intensity} must be >= 0")));
    }
    let eta = channel.transmissivity;
    let pd = noise_to_dark(channel.noise_photons, det.dark_click, det.efficiency);
    let mu = intensity;
    let no_dark = 1.0 - pd;
    let p_p = -(-eta * mu).exp_m1();
    let p_r = p_p * no_dark + 2.0 * (1.0 - p_p) * pd * no_dark;
    let mut out = RateBreakdown {
        dark_eff: pd,
        p_p,
        p_r,
        ..Default::default()
    };
    if p_r <= 0.0 {
        return Ok(out);
    }
    let poisson1 = mu * (-mu).exp();
    let single_click = eta + 2.0 * (1.0 - eta) * pd;
    out.qber = (0.5 * (1.0 - det.visibility) * p_p * no_dark + pd * no_dark * (1.0 - p_p)) / p_r;
    out.qber_defined = true;
    out.p_r1 = poisson1 * single_click * no_dark;
    out.p_r1w = poisson1 * (1.0 - eta) * pd * no_dark;
    out.p_r0 = 2.0 * pd * no_dark * (-mu).exp();
    out.y1 = out.p_r1 / p_r;
    out.y0 = out.p_r0 / p_r;
    out.eps1 = if single_click > 0.0 {
        (1.0 - eta) * pd / single_click
    } else {
        0.5
    };
    let secure = out.y0 + out.y1 * (1.0 - h2(out.eps1));
    out.i_ab = 1.0 - det.f_leak * h2(out.qber);
    out.i_e = 1.0 - secure;
    out.rate_unclamped = p_r * (secure - det.f_leak * h2(out.qber));
    Ok(out)
}

/// Secret-key capacity `-log2(1 - η)` of a pure-loss channel, bits per mode.
pub fn capacity_single(eta: f64) -> Result<f64> {
    if eta == 1.0 {
        return Err(Error::domain("capacity of a lossless channel is infinite"));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::domain(format!("transmissivity {eta} outside [0, 1)")));
    }
    Ok(-(-eta).ln_1p() / LN_2)
}

/// `Σ_q q·(-log2(1 - η_q))` over soft-pupil eigenmodes, stopping once
/// `η_q < threshold`.
pub fn soft_capacity_sum(fresnel_number: f64, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!("truncation threshold {threshold} outside (0, 1)")));
    }
    let base = eta_soft_base(fresnel_number)?;
    let mut sum = 0.0;
    let mut eta = base;
    let mut q = 1.0;
    while eta >= threshold {
        sum += q * capacity_single(eta)?;
        eta *= base;
        q += 1.0;
    }
    Ok(sum)
}

/// Capacity `-2ν Σ_q q log2(1 - η_q)` in bits/s of the full soft-pupil mode
/// set, both polarizations.
pub fn capacity_multimode_soft(geom: &OpticalGeometry, rep_rate: f64) -> Result<f64> {
    for ap in [geom.tx, geom.rx] {
        if !matches!(ap, Aperture::SoftGaussian { .. }) {
            return Err(Error::domain(format!("soft-pupil capacity needs soft apertures, got {ap:?}")));
        }
    }
    Ok(2.0 * rep_rate * soft_capacity_sum(geom.fresnel_number(), 1e-15)?)
}
