//! Flat `key = value` run configuration with units in the key names.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mathkern::QuadratureSpec;
use crate::optimize::{Convergence, LinkSetup, SeedProfile, SystemKind};
use crate::qkd::{CrosstalkMatrix, DetectorModel};

/// How range points are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Lin,
}

/// `count` points from `start` to `stop` inclusive, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for RangeGrid {
    fn default() -> Self {
        Self {
            start: 200.0,
            stop: 50_000.0,
            count: 30,
            spacing: Spacing::Log,
        }
    }
}

impl RangeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::domain(format!("ranges: start {} must be positive", self.start)));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(Error::domain(format!(
                "ranges: stop {} must exceed start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    /// The grid points, strictly ascending.
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let t = |i: usize| i as f64 / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            return self.stop;
                        }
                        match self.spacing {
                            Spacing::Lin => self.start + t(i) * (self.stop - self.start),
                            Spacing::Log => self.start * (self.stop / self.start).powf(t(i)),
                        }
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for RangeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spacing = match self.spacing {
            Spacing::Log => "log",
            Spacing::Lin => "lin",
        };
        write!(f, "{},{},{},{spacing}", num(self.start), num(self.stop), self.count)
    }
}

impl FromStr for RangeGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::domain(format!(
                "ranges: expected start,stop,count,log|lin, got '{s}'"
            )));
        }
        let float = |name: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::domain(format!("ranges: {name} '{v}' is not a number")))
        };
        let grid = Self {
            start: float("start", parts[0])?,
            stop: float("stop", parts[1])?,
            count: parts[2]
                .parse()
                .map_err(|_| Error::domain(format!("ranges: count '{}' is not a whole number", parts[2])))?,
            spacing: match parts[3] {
                "log" => Spacing::Log,
                "lin" => Spacing::Lin,
                other => return Err(Error::domain(format!("ranges: spacing '{other}' is not log or lin"))),
            },
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Everything a run needs, with defaults for the reference link.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wavelength_um: f64,
    pub aperture_area_m2: f64,
    pub nu_hz: f64,
    pub p_dark: f64,
    pub eta_det: f64,
    pub visibility: f64,
    pub f_leak: f64,
    pub ranges: RangeGrid,
    pub systems: Vec<SystemKind>,
    pub quadrature: QuadratureSpec,
    pub convergence: Convergence,
    pub seed_profile: SeedProfile,
    /// Cross-talk matrix for `lg_matrix`.
    pub matrix_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let det = DetectorModel::default();
        Self {
            wavelength_um: 1.55,
            aperture_area_m2: 0.005 * std::f64::consts::PI,
            nu_hz: det.rep_rate,
            p_dark: det.dark_click,
            eta_det: det.efficiency,
            visibility: det.visibility,
            f_leak: det.f_leak,
            ranges: RangeGrid::default(),
            systems: vec![SystemKind::LgIdeal, SystemKind::OgbaAuto],
            quadrature: QuadratureSpec::default(),
            convergence: Convergence::default(),
            seed_profile: SeedProfile::default(),
            matrix_path: None,
        }
    }
}

const KEYS: [&str; 17] = [
    "wavelength_um",
    "aperture_area_m2",
    "nu_hz",
    "p_dark",
    "eta_det",
    "visibility",
    "f_leak",
    "ranges_m",
    "systems",
    "quad_abs_tol",
    "quad_rel_tol",
    "quad_max_subdivisions",
    "opt_f_rel",
    "opt_x_rel",
    "opt_max_evaluations",
    "seed_profile",
    "matrix_path",
];

/// Shortest text that parses back to the same value.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn field_err(key: &str, e: Error) -> Error {
    match e {
        Error::Domain(m) if m.starts_with(key) => Error::Domain(m),
        Error::Domain(m) => Error::Domain(format!("{key}: {m}")),
        other => other,
    }
}

impl RunConfig {
    pub fn detector(&self) -> Result<DetectorModel> {
        DetectorModel::new(self.p_dark, self.eta_det, self.visibility, self.f_leak, self.nu_hz)
    }

    /// Checks the group of fields `key` belongs to.
    fn check(&self, key: &str) -> Result<()> {
        match key {
            "wavelength_um" if !(0.1..=100.0).contains(&self.wavelength_um) => Err(Error::domain(format!(
                "wavelength_um = {} outside [0.1, 100]",
                self.wavelength_um
            ))),
            "aperture_area_m2" if !(self.aperture_area_m2 > 0.0 && self.aperture_area_m2.is_finite()) => Err(
                Error::domain(format!("aperture_area_m2 = {} must be positive", self.aperture_area_m2)),
            ),
            "nu_hz" | "p_dark" | "eta_det" | "visibility" | "f_leak" => self.detector().map(drop),
            "ranges_m" => self.ranges.validate(),
            "systems" if self.systems.is_empty() => Err(Error::domain("systems: at least one system is required")),
            "quad_abs_tol" | "quad_rel_tol" | "quad_max_subdivisions" => {
                self.quadrature.validate().map_err(|e| field_err(key, e))
            }
            "opt_f_rel" | "opt_x_rel" | "opt_max_evaluations" => self.convergence.validate(),
            _ => Ok(()),
        }
    }

    /// Checks every field; the error names the first bad one.
    pub fn validate(&self) -> Result<()> {
        KEYS.iter().try_for_each(|k| self.check(k))
    }

    /// Search setup for this configuration, loading the matrix if one is named.
    pub fn setup(&self) -> Result<LinkSetup> {
        self.validate()?;
        let matrix = match &self.matrix_path {
            Some(p) => Some(CrosstalkMatrix::load(p)?),
            None => None,
        };
        Ok(LinkSetup {
            wavelength: self.wavelength_um * 1e-6,
            aperture_area: self.aperture_area_m2,
            detector: self.detector()?,
            quadrature: self.quadrature,
            convergence: self.convergence,
            seed_profile: self.seed_profile,
            matrix,
        })
    }

    /// Canonical text; `parse(emit())` gives back `self`.
    pub fn emit(&self) -> String {
        let systems: Vec<String> = self.systems.iter().map(SystemKind::label).collect();
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("wavelength_um", num(self.wavelength_um));
        put("aperture_area_m2", num(self.aperture_area_m2));
        put("nu_hz", num(self.nu_hz));
        put("p_dark", num(self.p_dark));
        put("eta_det", num(self.eta_det));
        put("visibility", num(self.visibility));
        put("f_leak", num(self.f_leak));
        put("ranges_m", self.ranges.to_string());
        put("systems", systems.join(","));
        put("quad_abs_tol", num(self.quadrature.abs_tol));
        put("quad_rel_tol", num(self.quadrature.rel_tol));
        put("quad_max_subdivisions", self.quadrature.max_subdivisions.to_string());
        put("opt_f_rel", num(self.convergence.f_rel));
        put("opt_x_rel", num(self.convergence.x_rel));
        put("opt_max_evaluations", self.convergence.max_evaluations.to_string());
        put("seed_profile", self.seed_profile.to_string());
        if let Some(p) = &self.matrix_path {
            put("matrix_path", p.display().to_string());
        }
        out
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are skipped; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("line {}", i + 1);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(&at, format!("expected key = value, got '{line}'")))?;
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| Error::parse(&at, format!("unknown field '{key}'")))?;
            if seen.contains(&key) {
                return Err(Error::parse(&at, format!("field '{key}' given twice")));
            }
            seen.push(key);
            cfg.set(key, value)
                .and_then(|()| cfg.check(key))
                .map_err(|e| Error::parse(&at, format!("field '{key}': {}", strip_kind(&e))))?;
        }
        cfg.validate().map_err(|e| Error::parse("config", strip_kind(&e)))?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let float = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("'{value}' is not a number")))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::domain(format!("'{value}' is not a whole number")))
        };
        match key {
            "wavelength_um" => self.wavelength_um = float()?,
            "aperture_area_m2" => self.aperture_area_m2 = float()?,
            "nu_hz" => self.nu_hz = float()?,
            "p_dark" => self.p_dark = float()?,
            "eta_det" => self.eta_det = float()?,
            "visibility" => self.visibility = float()?,
            "f_leak" => self.f_leak = float()?,
            "ranges_m" => self.ranges = value.parse()?,
            "systems" => {
                self.systems = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "quad_abs_tol" => self.quadrature.abs_tol = float()?,
            "quad_rel_tol" => self.quadrature.rel_tol = float()?,
            "quad_max_subdivisions" => self.quadrature.max_subdivisions = count()?,
            "opt_f_rel" => self.convergence.f_rel = float()?,
            "opt_x_rel" => self.convergence.x_rel = float()?,
            "opt_max_evaluations" => self.convergence.max_evaluations = count()?,
            "seed_profile" => self.seed_profile = value.parse()?,
            "matrix_path" => self.matrix_path = Some(PathBuf::from(value)),
            _ => unreachable!("key checked against KEYS"),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    /// SHA-256 of the canonical text, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.emit().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}
