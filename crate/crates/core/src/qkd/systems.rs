//! Total key rates of multiplexed systems.

use super::{bb84_rate, ChannelPoint, CrosstalkMatrix, DetectorModel, RateBreakdown};
use crate::error::{Error, Result};
use crate::mathkern::QuadratureSpec;
use crate::modes::{eta_soft_base, lg_mode_transmissivities, Aperture, BeamParams, OpticalGeometry};
use crate::ogba::{GridOptics, PixelGrid};

/// How LG modes are sorted at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub enum Separator {
    /// Perfect sorting, no cross-talk.
    Ideal,
    /// Measured or synthetic separator; rows are renormalized over the modes
    /// in use.
    Matrix(CrosstalkMatrix),
}

/// One detected channel of a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRate {
    /// Mode label, or pixel index `u + v·n_x` for beam arrays.
    pub label: i64,
    /// Number of identical channels this one stands for.
    pub multiplicity: usize,
    pub channel: ChannelPoint,
    pub breakdown: RateBreakdown,
}

/// Rate of a whole system at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRate {
    /// Sum of clamped channel rates, bits per mode slot.
    pub bits_per_mode: f64,
    pub bits_per_s: f64,
    /// Optimizer objective in bits/s: the clamped sum when any channel is
    /// positive, otherwise the least negative channel rate, so it stays
    /// continuous and informative below zero.
    pub objective: f64,
    /// Largest leaked photon number over channels.
    pub noise_max: f64,
    pub channels: Vec<ChannelRate>,
}

impl SystemRate {
    fn from_channels(channels: Vec<ChannelRate>, rep_rate: f64) -> Self {
        let bits_per_mode: f64 = channels
            .iter()
            .map(|c| c.multiplicity as f64 * c.breakdown.rate())
            .sum();
        let best_unclamped = channels
            .iter()
            .map(|c| c.multiplicity as f64 * c.breakdown.rate_unclamped)
            .fold(f64::NEG_INFINITY, f64::max);
        let objective = if bits_per_mode > 0.0 || channels.is_empty() {
            bits_per_mode
        } else {
            best_unclamped
        };
        Self {
            bits_per_mode,
            bits_per_s: rep_rate * bits_per_mode,
            objective: rep_rate * objective,
            noise_max: channels.iter().map(|c| c.channel.noise_photons).fold(0.0, f64::max),
            channels,
        }
    }

    /// Total number of detected channels.
    pub fn channel_count(&self) -> usize {
        self.channels.iter().map(|c| c.multiplicity).sum()
    }
}

/// A channel before the intensity is chosen: the leaked photon number is
/// `intensity * noise_per_photon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub label: i64,
    pub multiplicity: usize,
    /// Signal transmissivity including detector efficiency.
    pub transmissivity: f64,
    pub noise_per_photon: f64,
}

/// System rate of `specs` at one intensity.
pub fn rate_from_specs(specs: &[ChannelSpec], det: &DetectorModel, intensity: f64) -> Result<SystemRate> {
    let mut channels = Vec::with_capacity(specs.len());
    for s in specs {
        let point = ChannelPoint::new(s.transmissivity, intensity * s.noise_per_photon)?;
        channels.push(ChannelRate {
            label: s.label,
            multiplicity: s.multiplicity,
            channel: point,
            breakdown: bb84_rate(&point, det, intensity)?,
        });
    }
    Ok(SystemRate::from_channels(channels, det.rep_rate))
}

/// Channels of LG multiplexing over `modes` from transmissivities `etas[|l|]`.
pub fn lg_channel_specs(
    etas: &[f64],
    modes: &[i32],
    separator: &Separator,
    det: &DetectorModel,
) -> Result<Vec<ChannelSpec>> {
    let t = match separator {
        Separator::Ideal => None,
        Separator::Matrix(m) => Some(m.normalize(modes)?),
    };
    lg_specs_normalized(etas, modes, t.as_ref(), det)
}

/// As [`lg_channel_specs`] with a matrix already restricted to `modes`.
pub(crate) fn lg_specs_normalized(
    etas: &[f64],
    modes: &[i32],
    t: Option<&CrosstalkMatrix>,
    det: &DetectorModel,
) -> Result<Vec<ChannelSpec>> {
    let eta_of = |l: i32| {
        etas.get(l.unsigned_abs() as usize)
            .copied()
            .map(|e| e.clamp(0.0, 1.0))
            .ok_or_else(|| Error::domain(format!("no transmissivity for mode {l}")))
    };
    let mut specs = Vec::with_capacity(modes.len());
    for (j, &lj) in modes.iter().enumerate() {
        let (own, noise) = match t {
            None => (1.0, 0.0),
            Some(t) => {
                let mut noise = 0.0;
                for (i, &li) in modes.iter().enumerate() {
                    if i != j {
                        noise += eta_of(li)? * t.get(li, lj).expect("normalized over modes");
                    }
                }
                (t.get(lj, lj).expect("normalized over modes"), noise)
            }
        };
        specs.push(ChannelSpec {
            label: lj as i64,
            multiplicity: 1,
            transmissivity: (eta_of(lj)? * own * det.efficiency).clamp(0.0, 1.0),
            noise_per_photon: noise,
        });
    }
    Ok(specs)
}

/// LG system rate from precomputed transmissivities `etas[|l|]`.
pub fn lg_rate_from_transmissivities(
    etas: &[f64],
    modes: &[i32],
    separator: &Separator,
    det: &DetectorModel,
    intensity: f64,
) -> Result<SystemRate> {
    rate_from_specs(&lg_channel_specs(etas, modes, separator, det)?, det, intensity)
}

/// Rate of `LG(0, l)` multiplexing over hard circular pupils for the modes
/// in `modes`, all sharing one beam width and intensity.
pub fn lg_system_rate(
    geom: &OpticalGeometry,
    det: &DetectorModel,
    modes: &[i32],
    separator: &Separator,
    params: &BeamParams,
    spec: &QuadratureSpec,
) -> Result<SystemRate> {
    let l_max = modes.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
    let etas = lg_mode_transmissivities(l_max, params, geom, spec)?;
    lg_rate_from_transmissivities(&etas, modes, separator, det, params.intensity)
}

/// Channels of a beam array, one per octant representative.
pub fn ogba_channel_specs(grid: &PixelGrid, optics: &GridOptics, det: &DetectorModel) -> Vec<ChannelSpec> {
    let n_x = grid.x.len();
    grid.representatives()
        .iter()
        .map(|px| ChannelSpec {
            label: (px.u + px.v * n_x) as i64,
            multiplicity: px.multiplicity,
            transmissivity: (optics.capture(px.u, px.v) * det.efficiency).clamp(0.0, 1.0),
            noise_per_photon: optics.leakage(px.u, px.v).max(0.0),
        })
        .collect()
}

/// Beam-array rate from a precomputed power table.
pub fn ogba_rate_from_optics(
    grid: &PixelGrid,
    optics: &GridOptics,
    det: &DetectorModel,
    intensity: f64,
) -> Result<SystemRate> {
    rate_from_specs(&ogba_channel_specs(grid, optics, det), det, intensity)
}

/// Checks that a square link matches the grid it is aimed at.
pub(crate) fn check_square_link(geom: &OpticalGeometry, grid: &PixelGrid) -> Result<()> {
    let l_t = geom.tx_side()?;
    let l_r = geom.rx_side()?;
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.max(b);
    if !same(l_t, l_r) || !same(l_r, grid.l_r) {
        return Err(Error::domain(format!(
            "beam arrays need l_t = l_r = grid side, got {l_t}, {l_r}, {}",
            grid.l_r
        )));
    }
    Ok(())
}

/// Rate of an overlapping Gaussian beam array aimed at the pixels of `grid`.
pub fn ogba_system_rate(
    geom: &OpticalGeometry,
    det: &DetectorModel,
    grid: &PixelGrid,
    params: &BeamParams,
    spec: &QuadratureSpec,
) -> Result<SystemRate> {
    check_square_link(geom, grid)?;
    let optics = GridOptics::evaluate(grid, params, geom, spec)?;
    ogba_rate_from_optics(grid, &optics, det, params.intensity)
}

/// Channels of every soft-pupil eigenmode, `q` degenerate modes sharing
/// `η_q`, down to `η_q < 1e-15`.
pub fn soft_channel_specs(geom: &OpticalGeometry, det: &DetectorModel) -> Result<Vec<ChannelSpec>> {
    for ap in [geom.tx, geom.rx] {
        if !matches!(ap, Aperture::SoftGaussian { .. }) {
            return Err(Error::domain(format!("soft-pupil modes need soft apertures, got {ap:?}")));
        }
    }
    let base = eta_soft_base(geom.fresnel_number())?;
    let mut specs = Vec::new();
    let mut eta = base;
    let mut q = 1usize;
    while eta >= 1e-15 {
        specs.push(ChannelSpec {
            label: q as i64,
            multiplicity: q,
            transmissivity: eta * det.efficiency,
            noise_per_photon: 0.0,
        });
        eta *= base;
        q += 1;
    }
    Ok(specs)
}

/// Rate of BB84 on every soft-pupil eigenmode.
pub fn soft_multimode_rate(geom: &OpticalGeometry, det: &DetectorModel, intensity: f64) -> Result<SystemRate> {
    rate_from_specs(&soft_channel_specs(geom, det)?, det, intensity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ogba::PixelConfig;
    use std::f64::consts::PI;

    fn etas() -> Vec<f64> {
        vec![0.95, 0.9, 0.8, 0.6, 0.3, 0.1, 0.02]
    }

    #[test]
    fn single_ideal_mode_is_plain_bb84() {
        let det = DetectorModel::default();
        let sys = lg_rate_from_transmissivities(&etas(), &[2], &Separator::Ideal, &det, 0.7).unwrap();
        let direct = bb84_rate(&ChannelPoint::new(0.8, 0.0).unwrap(), &det, 0.7).unwrap();
        assert_eq!(sys.bits_per_mode, direct.rate());
        assert_eq!(sys.bits_per_s, det.rep_rate * direct.rate());
    }

    #[test]
    fn identity_matrix_matches_ideal() {
        let det = DetectorModel::default();
        let modes: Vec<i32> = (-6..=6).collect();
        let ideal = lg_rate_from_transmissivities(&etas(), &modes, &Separator::Ideal, &det, 0.9).unwrap();
        let id = Separator::Matrix(CrosstalkMatrix::identity((-12..=12).collect()).unwrap());
        let matrix = lg_rate_from_transmissivities(&etas(), &modes, &id, &det, 0.9).unwrap();
        assert!((ideal.bits_per_s - matrix.bits_per_s).abs() <= 1e-9 * ideal.bits_per_s);
    }

    #[test]
    fn crosstalk_costs_rate() {
        let det = DetectorModel::default();
        let sep = Separator::Matrix(CrosstalkMatrix::synthetic_default());
        for mu in [0.2, 0.8, 2.0] {
            for width in 0..=6 {
                let modes: Vec<i32> = (-width..=width).collect();
                let ideal = lg_rate_from_transmissivities(&etas(), &modes, &Separator::Ideal, &det, mu).unwrap();
                let real = lg_rate_from_transmissivities(&etas(), &modes, &sep, &det, mu).unwrap();
                assert!(real.bits_per_s <= ideal.bits_per_s);
            }
        }
    }

    #[test]
    fn objective_is_continuous_through_zero() {
        let det = DetectorModel::default();
        let sys = lg_rate_from_transmissivities(&[1e-9], &[0], &Separator::Ideal, &det, 0.5).unwrap();
        assert_eq!(sys.bits_per_mode, 0.0);
        assert!(sys.objective < 0.0);
    }

    fn square_geom(range: f64) -> OpticalGeometry {
        let ap = Aperture::HardSquare { side: (0.005 * PI).sqrt() };
        OpticalGeometry::new(1.55e-6, range, ap, ap).unwrap()
    }

    #[test]
    fn octant_reduction_is_exact() {
        let g = square_geom(1000.0);
        let det = DetectorModel::default();
        let spec = QuadratureSpec::default();
        let l_r = (0.005 * PI).sqrt();
        let p = BeamParams::new(0.01, 0.6).unwrap();
        for config in [PixelConfig::CenteredSingle, PixelConfig::Centered2x2] {
            let grid = PixelGrid::build(config, l_r, l_r / 4.6).unwrap();
            let optics = GridOptics::evaluate(&grid, &p, &g, &spec).unwrap();
            let reduced = ogba_rate_from_optics(&grid, &optics, &det, p.intensity).unwrap();
            let mut full = 0.0;
            for px in grid.all_pixels() {
                let point = ChannelPoint::new(
                    optics.capture(px.u, px.v),
                    p.intensity * optics.leakage(px.u, px.v),
                )
                .unwrap();
                full += bb84_rate(&point, &det, p.intensity).unwrap().rate();
            }
            assert!((reduced.bits_per_mode - full).abs() <= 1e-12 * full.max(1e-300), "{config}");
            assert_eq!(reduced.channel_count(), grid.pixel_count());
        }
    }

    #[test]
    fn single_pixel_array_and_dark_beams() {
        let g = square_geom(1000.0);
        let det = DetectorModel::default();
        let spec = QuadratureSpec::default();
        let l_r = (0.005 * PI).sqrt();
        let grid = PixelGrid::build(PixelConfig::CenteredSingle, l_r, l_r).unwrap();
        let p = BeamParams::new(0.015, 0.9).unwrap();
        let sys = ogba_system_rate(&g, &det, &grid, &p, &spec).unwrap();
        assert_eq!(sys.noise_max, 0.0);
        assert!(sys.bits_per_s > 0.0);
        let dark = BeamParams::new(0.015, 0.0).unwrap();
        assert_eq!(ogba_system_rate(&g, &det, &grid, &dark, &spec).unwrap().bits_per_s, 0.0);
        let wrong = PixelGrid::build(PixelConfig::CenteredSingle, 2.0 * l_r, l_r).unwrap();
        assert!(ogba_system_rate(&g, &det, &wrong, &p, &spec).is_err());
    }

    #[test]
    fn soft_multimode_counts_degenerate_modes() {
        let soft = Aperture::SoftGaussian { radius: 0.1 };
        let g = OpticalGeometry::new(1.55e-6, 1000.0, soft, soft).unwrap();
        let det = DetectorModel::new(0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let sys = soft_multimode_rate(&g, &det, 0.5).unwrap();
        let base = eta_soft_base(g.fresnel_number()).unwrap();
        let direct: f64 = (1..2000)
            .map(|q| {
                let eta = base.powi(q);
                let r = bb84_rate(&ChannelPoint::new(eta, 0.0).unwrap(), &det, 0.5).unwrap();
                q as f64 * r.rate()
            })
            .sum();
        assert!((sys.bits_per_mode - direct).abs() < 1e-9 * direct);
    }
}
