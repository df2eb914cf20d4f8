//! Per-range parameter searches for each system, and sweeps over range.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use super::{box_seeds, maximize, maximize_scalar, Convergence, OptimizationProblem};
use crate::error::{Error, Result};
use crate::mathkern::QuadratureSpec;
use crate::modes::{beam_width_soft, lg_mode_transmissivities, Aperture, ApertureShape, BeamParams, OpticalGeometry};
use crate::ogba::{GridOptics, PixelConfig, PixelGrid};
use crate::qkd::{
    check_square_link, lg_specs_normalized, ogba_channel_specs, rate_from_specs, soft_channel_specs, ChannelSpec,
    CrosstalkMatrix, DetectorModel, Separator, SystemRate,
};

/// Search interval for the mean photon number `|α|²`.
pub const INTENSITY_BOUNDS: (f64, f64) = (1e-4, 20.0);
const INTENSITY_GRID: usize = 25;
const LN_INTENSITY_TOL: f64 = 1e-7;
/// LG modes below this transmissivity are dropped.
const ETA_FLOOR: f64 = 1e-6;
const L_MAX_CAP: usize = 400;

/// How many starting points each search uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedProfile {
    /// Box center, physics-guided seeds and the warm start.
    Fast,
    /// Adds the shrunk box corners.
    #[default]
    Paper,
}

impl fmt::Display for SeedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedProfile::Fast => "fast",
            SeedProfile::Paper => "paper",
        })
    }
}

impl FromStr for SeedProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(SeedProfile::Fast),
            "paper" => Ok(SeedProfile::Paper),
            _ => Err(Error::domain(format!("unknown seed profile '{s}' (expected fast or paper)"))),
        }
    }
}

/// Systems that can be optimized at a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Every eigenmode of soft pupils; only `|α|²` is free.
    SoftMultimode,
    /// Azimuthal LG modes, perfect sorting.
    LgIdeal,
    /// Azimuthal LG modes through a cross-talk matrix.
    LgMatrix,
    /// Beam array on one pixel layout.
    Ogba(PixelConfig),
    /// Best beam array over all layouts.
    OgbaAuto,
    /// One focused beam through square pupils.
    SingleFbSquare,
}

impl SystemKind {
    pub fn label(&self) -> String {
        match self {
            SystemKind::SoftMultimode => "soft_multimode".into(),
            SystemKind::LgIdeal => "lg_ideal".into(),
            SystemKind::LgMatrix => "lg_matrix".into(),
            SystemKind::Ogba(c) => format!("ogba:{c}"),
            SystemKind::OgbaAuto => "ogba:auto".into(),
            SystemKind::SingleFbSquare => "single_fb_square".into(),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft_multimode" => Ok(SystemKind::SoftMultimode),
            "lg_ideal" => Ok(SystemKind::LgIdeal),
            "lg_matrix" => Ok(SystemKind::LgMatrix),
            "single_fb_square" => Ok(SystemKind::SingleFbSquare),
            "ogba:auto" => Ok(SystemKind::OgbaAuto),
            _ => match s.strip_prefix("ogba:") {
                Some(c) => Ok(SystemKind::Ogba(c.parse()?)),
                None => Err(Error::domain(format!(
                    "unknown system '{s}' (expected soft_multimode, lg_ideal, lg_matrix, \
                     ogba:<centered_single|centered_2x2|one_by_two|auto> or single_fb_square)"
                ))),
            },
        }
    }
}

/// Everything except range that a search needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSetup {
    pub wavelength: f64,
    /// Area of each pupil; every system uses pupils of this area.
    pub aperture_area: f64,
    pub detector: DetectorModel,
    pub quadrature: QuadratureSpec,
    pub convergence: Convergence,
    pub seed_profile: SeedProfile,
    /// Separator for `lg_matrix`; the synthetic one when absent.
    pub matrix: Option<CrosstalkMatrix>,
}

impl Default for LinkSetup {
    fn default() -> Self {
        Self {
            wavelength: 1.55e-6,
            aperture_area: 0.005 * PI,
            detector: DetectorModel::default(),
            quadrature: QuadratureSpec::default(),
            convergence: Convergence::default(),
            seed_profile: SeedProfile::default(),
            matrix: None,
        }
    }
}

impl LinkSetup {
    /// Link between two equal pupils of the given shape.
    pub fn geometry(&self, shape: ApertureShape, range: f64) -> Result<OpticalGeometry> {
        let ap = Aperture::with_area(shape, self.aperture_area)?;
        OpticalGeometry::new(self.wavelength, range, ap, ap)
    }
}

/// Optimized parameters; fields a system does not use are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptimalParams {
    /// Beam width at the transmitter.
    pub a: Option<f64>,
    pub l_d: Option<f64>,
    pub l_o: Option<f64>,
    /// Mean photon number `|α|²`.
    pub alpha_sq: f64,
    /// Largest `|l|` multiplexed by LG systems.
    pub l_used: Option<u32>,
}

/// Optimum of one system at one range.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeOutcome {
    pub range: f64,
    pub system: SystemKind,
    /// Layout or mode-set description of the winner.
    pub config_label: String,
    pub params: OptimalParams,
    pub rate: SystemRate,
    /// Per-layout optima behind an `ogba:auto` envelope.
    pub sub_results: Vec<RangeOutcome>,
}

impl RangeOutcome {
    pub fn bits_per_mode(&self) -> f64 {
        self.rate.bits_per_mode
    }

    pub fn bits_per_s(&self) -> f64 {
        self.rate.bits_per_s
    }

    pub fn channel_count(&self) -> usize {
        self.rate.channel_count()
    }

    // bits/s first; the objective breaks ties between zero-rate results
    fn beats(&self, other: &RangeOutcome) -> bool {
        (self.rate.bits_per_s, self.rate.objective) > (other.rate.bits_per_s, other.rate.objective)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub range: f64,
    pub system: SystemKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Ordered by range, then by the order systems were requested.
    pub outcomes: Vec<RangeOutcome>,
    pub failures: Vec<SweepFailure>,
}

/// Best `|α|²` for fixed channels. Returns `(|α|², rate)`.
pub fn best_intensity(specs: &[ChannelSpec], det: &DetectorModel) -> Result<(f64, SystemRate)> {
    let (lo, hi) = INTENSITY_BOUNDS;
    let f = |t: f64| rate_from_specs(specs, det, t.exp()).map_or(f64::NAN, |r| r.objective);
    let (t, _) = maximize_scalar(f, lo.ln(), hi.ln(), INTENSITY_GRID, LN_INTENSITY_TOL)?;
    let mu = t.exp();
    Ok((mu, rate_from_specs(specs, det, mu)?))
}

/// A candidate after profiling out the intensity.
struct Profiled {
    label: String,
    params: OptimalParams,
    rate: SystemRate,
}

fn profile(specs: &[ChannelSpec], det: &DetectorModel, label: String, mut params: OptimalParams) -> Result<Profiled> {
    let (mu, rate) = best_intensity(specs, det)?;
    params.alpha_sq = mu;
    Ok(Profiled { label, params, rate })
}

fn clamp_interior(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        let pad = 1e-3 * (hi - lo);
        *v = v.clamp(lo + pad, hi - pad);
    }
}

/// Maximizes the profiled objective of `model` and re-evaluates the winner
/// so that errors at the optimum surface instead of ranking it last.
fn search<M>(setup: &LinkSetup, bounds: Vec<(f64, f64)>, mut seeds: Vec<Vec<f64>>, model: M) -> Result<Profiled>
where
    M: Fn(&[f64]) -> Result<Profiled> + Sync,
{
    for s in &mut seeds {
        clamp_interior(s, &bounds);
    }
    let problem = OptimizationProblem {
        objective: |x: &[f64]| model(x).map_or(f64::NAN, |p| p.rate.objective),
        bounds,
        seeds,
        convergence: setup.convergence,
    };
    match maximize(&problem) {
        Ok(best) => model(&best.x),
        // report why the model failed rather than that it never succeeded
        Err(e) => Err(model(&problem.seeds[0]).err().unwrap_or(e)),
    }
}

fn seeds_for(setup: &LinkSetup, bounds: &[(f64, f64)], physics: Vec<Vec<f64>>, warm: Option<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seeds = match setup.seed_profile {
        SeedProfile::Paper => box_seeds(bounds),
        SeedProfile::Fast => vec![bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()],
    };
    seeds.extend(physics);
    seeds.extend(warm);
    seeds
}

fn ln_bounds(lo: f64, hi: f64) -> (f64, f64) {
    (lo.ln(), hi.ln())
}

/// `η(l)` for `l = 0..`, extended until the last one drops below the floor.
fn adaptive_transmissivities(params: &BeamParams, geom: &OpticalGeometry, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let mut l_max = ((2.5 * geom.fresnel_number().sqrt()).ceil() as usize + 8).min(L_MAX_CAP);
    loop {
        let etas = lg_mode_transmissivities(l_max, params, geom, spec)?;
        if etas[l_max] < ETA_FLOOR || l_max >= L_MAX_CAP {
            return Ok(etas);
        }
        l_max = (2 * l_max).min(L_MAX_CAP);
    }
}

/// Largest `n` with every label in `-n..=n` present.
fn symmetric_extent(m: &CrosstalkMatrix) -> Result<u32> {
    if m.index_of(0).is_none() {
        return Err(Error::domain("cross-talk matrix has no l = 0 row"));
    }
    let mut n = 0;
    while m.index_of(n + 1).is_some() && m.index_of(-(n + 1)).is_some() {
        n += 1;
    }
    Ok(n as u32)
}

fn symmetric_modes(l: u32) -> Vec<i32> {
    let l = l as i32;
    (-l..=l).collect()
}

fn lg_model(setup: &LinkSetup, geom: &OpticalGeometry, separator: &Separator, x: &[f64]) -> Result<Profiled> {
    let a = x[0].exp();
    let params = BeamParams::new(a, 1.0)?;
    let det = &setup.detector;
    let base = OptimalParams {
        a: Some(a),
        ..OptimalParams::default()
    };
    match separator {
        Separator::Ideal => {
            let etas = adaptive_transmissivities(&params, geom, &setup.quadrature)?;
            let l_star = etas.iter().rposition(|&e| e >= ETA_FLOOR).unwrap_or(0) as u32;
            let modes = symmetric_modes(l_star);
            let specs = lg_specs_normalized(&etas, &modes, None, det)?;
            let params = OptimalParams { l_used: Some(l_star), ..base };
            profile(&specs, det, format!("l_max={l_star}"), params)
        }
        Separator::Matrix(m) => {
            let cap = symmetric_extent(m)?;
            let etas = lg_mode_transmissivities(cap as usize, &params, geom, &setup.quadrature)?;
            let mut best: Option<Profiled> = None;
            for l_used in 0..=cap {
                let modes = symmetric_modes(l_used);
                let t = m.normalize(&modes)?;
                let specs = lg_specs_normalized(&etas, &modes, Some(&t), det)?;
                let params = OptimalParams {
                    l_used: Some(l_used),
                    ..base
                };
                let p = profile(&specs, det, format!("l_max={l_used}"), params)?;
                if best.as_ref().is_none_or(|b| p.rate.objective > b.rate.objective) {
                    best = Some(p);
                }
            }
            Ok(best.expect("at least l = 0 is tried"))
        }
    }
}

fn outcome(range: f64, system: SystemKind, p: Profiled) -> RangeOutcome {
    RangeOutcome {
        range,
        system,
        config_label: p.label,
        params: p.params,
        rate: p.rate,
        sub_results: Vec::new(),
    }
}

/// Optimizes beam width and intensity of LG multiplexing over hard circular
/// pupils. With a matrix separator the mode set `|l| ≤ l_used` is optimized
/// as well.
pub fn optimize_lg_at_range(
    setup: &LinkSetup,
    range: f64,
    separator: &Separator,
    warm: Option<&OptimalParams>,
) -> Result<RangeOutcome> {
    let geom = setup.geometry(ApertureShape::HardCircle, range)?;
    let side = geom.tx.characteristic_length();
    let bounds = vec![ln_bounds(side / 200.0, side)];
    // waist equal at both ends
    let confocal = (SQRT_2 * range / geom.wavenumber()).sqrt();
    let physics = vec![vec![confocal.ln()]];
    let warm = warm.and_then(|w| w.a).map(|a| vec![a.ln()]);
    let seeds = seeds_for(setup, &bounds, physics, warm);
    let best = search(setup, bounds, seeds, |x| lg_model(setup, &geom, separator, x))?;
    let system = match separator {
        Separator::Ideal => SystemKind::LgIdeal,
        Separator::Matrix(_) => SystemKind::LgMatrix,
    };
    Ok(outcome(range, system, best))
}

fn grid_model(
    setup: &LinkSetup,
    geom: &OpticalGeometry,
    config: PixelConfig,
    a: f64,
    param: f64,
) -> Result<Profiled> {
    let l_r = geom.rx_side()?;
    let grid = PixelGrid::build(config, l_r, param)?;
    let params = BeamParams::new(a, 1.0)?;
    let optics = GridOptics::evaluate(&grid, &params, geom, &setup.quadrature)?;
    let specs = ogba_channel_specs(&grid, &optics, &setup.detector);
    let params = OptimalParams {
        a: Some(a),
        l_d: grid.l_d,
        l_o: grid.l_o,
        ..OptimalParams::default()
    };
    profile(&specs, &setup.detector, config.label().to_string(), params)
}

/// Width that focuses a beam to a spot well inside a cell of width `cell`.
fn focusing_width(geom: &OpticalGeometry, cell: f64) -> f64 {
    8.0 * geom.range / (geom.wavenumber() * cell)
}

/// Optimizes a beam array on one layout over `(a, l_d, |α|²)`, or over
/// `(a, l_o, |α|²)` for `one_by_two`.
pub fn optimize_ogba_at_range(
    setup: &LinkSetup,
    range: f64,
    config: PixelConfig,
    warm: Option<&OptimalParams>,
) -> Result<RangeOutcome> {
    let geom = setup.geometry(ApertureShape::HardSquare, range)?;
    let side = geom.tx_side()?;
    let l_r = geom.rx_side()?;
    let a_bounds = ln_bounds(side / 200.0, side);
    let best = if config.is_square_grid() {
        let bounds = vec![a_bounds, ln_bounds(l_r / 40.0, l_r)];
        let per_side = geom.fresnel_number().sqrt();
        let physics = [(per_side / 3.0).max(1.0), (per_side / 1.5).max(2.0)]
            .into_iter()
            .map(|n| {
                let l_d = l_r / n;
                vec![focusing_width(&geom, l_d).ln(), l_d.ln()]
            })
            .collect();
        let warm = warm.and_then(|w| Some(vec![w.a?.ln(), w.l_d?.ln()]));
        let seeds = seeds_for(setup, &bounds, physics, warm);
        search(setup, bounds, seeds, |x| grid_model(setup, &geom, config, x[0].exp(), x[1].exp()))?
    } else {
        let l_s = l_r / SQRT_2;
        let bounds = vec![a_bounds, (0.0, l_r / (2.0 * SQRT_2))];
        let a0 = focusing_width(&geom, l_s).ln();
        let physics = vec![vec![a0, 0.45 * l_s], vec![a0, 0.25 * l_s]];
        let warm = warm.and_then(|w| Some(vec![w.a?.ln(), w.l_o?]));
        let seeds = seeds_for(setup, &bounds, physics, warm);
        search(setup, bounds, seeds, |x| grid_model(setup, &geom, config, x[0].exp(), x[1]))?
    };
    Ok(outcome(range, SystemKind::Ogba(config), best))
}

/// Optimizes a single focused beam through square pupils over `(a, |α|²)`.
pub fn optimize_single_fb_square(setup: &LinkSetup, range: f64, warm: Option<&OptimalParams>) -> Result<RangeOutcome> {
    let geom = setup.geometry(ApertureShape::HardSquare, range)?;
    let side = geom.tx_side()?;
    let l_r = geom.rx_side()?;
    let grid = PixelGrid::build(PixelConfig::CenteredSingle, l_r, l_r)?;
    check_square_link(&geom, &grid)?;
    let bounds = vec![ln_bounds(side / 200.0, side)];
    let physics = vec![vec![focusing_width(&geom, l_r).ln()]];
    let warm = warm.and_then(|w| w.a).map(|a| vec![a.ln()]);
    let seeds = seeds_for(setup, &bounds, physics, warm);
    let best = search(setup, bounds, seeds, |x| {
        let mut p = grid_model(setup, &geom, PixelConfig::CenteredSingle, x[0].exp(), l_r)?;
        p.label = "single".into();
        Ok(p)
    })?;
    Ok(outcome(range, SystemKind::SingleFbSquare, best))
}

/// Soft-pupil eigenmode multiplexing; only the intensity is free.
pub fn optimize_soft_multimode(setup: &LinkSetup, range: f64) -> Result<RangeOutcome> {
    let geom = setup.geometry(ApertureShape::SoftGaussian, range)?;
    let specs = soft_channel_specs(&geom, &setup.detector)?;
    let r_t = match geom.tx {
        Aperture::SoftGaussian { radius } => radius,
        _ => unreachable!("soft geometry"),
    };
    let params = OptimalParams {
        a: Some(beam_width_soft(r_t, geom.fresnel_number())?),
        ..OptimalParams::default()
    };
    let label = format!("q_max={}", specs.len());
    Ok(outcome(range, SystemKind::SoftMultimode, profile(&specs, &setup.detector, label, params)?))
}

/// Optimizes `system` at `range`, seeding from `warm` (the optimum of the
/// same system at a nearby range) when given.
pub fn optimize_at_range(
    setup: &LinkSetup,
    system: SystemKind,
    range: f64,
    warm: Option<&RangeOutcome>,
) -> Result<RangeOutcome> {
    let warm_params = warm.map(|w| &w.params);
    match system {
        SystemKind::SoftMultimode => optimize_soft_multimode(setup, range),
        SystemKind::LgIdeal => optimize_lg_at_range(setup, range, &Separator::Ideal, warm_params),
        SystemKind::LgMatrix => {
            let m = setup.matrix.clone().unwrap_or_else(CrosstalkMatrix::synthetic_default);
            optimize_lg_at_range(setup, range, &Separator::Matrix(m), warm_params)
        }
        SystemKind::Ogba(config) => optimize_ogba_at_range(setup, range, config, warm_params),
        SystemKind::SingleFbSquare => optimize_single_fb_square(setup, range, warm_params),
        SystemKind::OgbaAuto => {
            let mut subs = Vec::with_capacity(PixelConfig::ALL.len());
            for config in PixelConfig::ALL {
                let w = warm.and_then(|w| w.sub_results.iter().find(|s| s.system == SystemKind::Ogba(config)));
                subs.push(optimize_ogba_at_range(setup, range, config, w.map(|w| &w.params))?);
            }
            let mut best = 0;
            for (i, s) in subs.iter().enumerate() {
                if s.beats(&subs[best]) {
                    best = i;
                }
            }
            let win = &subs[best];
            Ok(RangeOutcome {
                range,
                system,
                config_label: win.config_label.clone(),
                params: win.params,
                rate: win.rate.clone(),
                sub_results: subs,
            })
        }
    }
}

/// Optimizes every system at every range. Each range is warm-started from
/// the previous range's optimum of the same system. A failing range is
/// recorded and the sweep moves on.
pub fn sweep(setup: &LinkSetup, ranges: &[f64], systems: &[SystemKind]) -> Result<SweepResult> {
    for (i, &r) in ranges.iter().enumerate() {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("range {r} must be positive")));
        }
        if i > 0 && r <= ranges[i - 1] {
            return Err(Error::domain(format!(
                "ranges must be strictly ascending: {} then {r}",
                ranges[i - 1]
            )));
        }
    }
    let mut result = SweepResult::default();
    for &system in systems {
        let mut warm: Option<RangeOutcome> = None;
        for &range in ranges {
            match optimize_at_range(setup, system, range, warm.as_ref()) {
                Ok(o) => {
                    log::info!("{system} at {range} m: {:.6e} bits/s", o.bits_per_s());
                    warm = Some(o.clone());
                    result.outcomes.push(o);
                }
                Err(e) => {
                    log::warn!("{system} at {range} m failed: {e}");
                    result.failures.push(SweepFailure {
                        range,
                        system,
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    // stable, so systems keep their requested order within a range
    result.outcomes.sort_by(|a, b| a.range.total_cmp(&b.range));
    Ok(result)
}
