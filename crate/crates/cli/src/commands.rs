use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fsqkd_core::optimize::{sweep, SeedProfile, SystemKind};
use fsqkd_core::qkd::capacity_multimode_soft;
use fsqkd_core::report::{gap_report, parameter_figure, rate_figure, ResultFile, ResultRow, RunConfig};
use fsqkd_core::{ApertureShape, Error};
use thiserror::Error;

use crate::RunArgs;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{failed} of {total} (range, system) points failed; see the log")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Parse { .. } | Error::Domain(_)) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(flag: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{flag}: {e}"))
}

fn load_config(run: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &run.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(r) = &run.ranges {
        cfg.ranges = r.parse().map_err(|e| usage("ranges", e))?;
    }
    Ok(cfg)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}")))?,
    }
    Ok(())
}

pub fn capacity(run: &RunArgs) -> Result<()> {
    let cfg = load_config(run)?;
    let setup = cfg.setup()?;
    let mut file = ResultFile::for_config(&cfg);
    for range in cfg.ranges.points() {
        let geom = setup.geometry(ApertureShape::SoftGaussian, range)?;
        let bits_per_s = capacity_multimode_soft(&geom, cfg.nu_hz)?;
        file.rows.push(ResultRow::capacity(range, bits_per_s / cfg.nu_hz, cfg.nu_hz));
    }
    write_out(run.out.as_deref(), &file.to_csv_string())
}

pub fn rate(
    run: &RunArgs,
    system: Option<&str>,
    matrix: Option<PathBuf>,
    seed_profile: Option<&str>,
) -> Result<()> {
    let mut cfg = load_config(run)?;
    if let Some(s) = system {
        cfg.systems = vec![s.parse::<SystemKind>().map_err(|e| usage("system", e))?];
    }
    if matrix.is_some() {
        cfg.matrix_path = matrix;
    }
    if let Some(p) = seed_profile {
        cfg.seed_profile = p.parse::<SeedProfile>().map_err(|e| usage("seed-profile", e))?;
    }
    if cfg.systems.contains(&SystemKind::LgMatrix) && cfg.matrix_path.is_none() {
        log::warn!("lg_matrix without a matrix file: using the synthetic separator (0.921 diagonal)");
    }
    let setup = cfg.setup()?;
    let ranges = cfg.ranges.points();
    let result = sweep(&setup, &ranges, &cfg.systems)?;
    let mut file = ResultFile::for_config(&cfg);
    file.rows = result.outcomes.iter().map(ResultRow::from_outcome).collect();
    write_out(run.out.as_deref(), &file.to_csv_string())?;
    for f in &result.failures {
        log::error!("{} at {} m: {}", f.system, f.range, f.message);
    }
    if result.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial {
            failed: result.failures.len(),
            total: ranges.len() * cfg.systems.len(),
        })
    }
}

pub fn gap(a: &Path, b: &Path, out: Option<&Path>) -> Result<()> {
    let fa = ResultFile::load(a)?;
    let fb = ResultFile::load(b)?;
    let report = gap_report(&fa.rows, &fb.rows)?;
    write_out(out, &report.to_csv_string())
}

pub fn plotdata(files: &[PathBuf], out: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for f in files {
        rows.extend(ResultFile::load(f)?.rows);
    }
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    for fig in [rate_figure(&rows), parameter_figure(&rows)] {
        let path = out.join(format!("{}.csv", fig.name));
        fs::write(&path, fig.to_text()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
