//! Result files: one CSV row per (range, system) under a commented header.

use std::fs;
use std::path::Path;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::optimize::RangeOutcome;

/// Column order of every result file.
pub const COLUMNS: [&str; 11] = [
    "range_m",
    "system",
    "config_label",
    "rate_bits_per_mode",
    "rate_bits_per_s",
    "a_m",
    "l_d_m",
    "l_o_m",
    "alpha_sq",
    "n_pixels",
    "p_noise_max",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub range_m: f64,
    pub system: String,
    pub config_label: String,
    pub rate_bits_per_mode: f64,
    pub rate_bits_per_s: f64,
    pub a_m: Option<f64>,
    pub l_d_m: Option<f64>,
    pub l_o_m: Option<f64>,
    pub alpha_sq: Option<f64>,
    /// Detected channels: pixels, modes or eigenmodes.
    pub n_pixels: Option<usize>,
    pub p_noise_max: Option<f64>,
}

impl ResultRow {
    pub fn from_outcome(o: &RangeOutcome) -> Self {
        Self {
            range_m: o.range,
            system: o.system.label(),
            config_label: o.config_label.clone(),
            rate_bits_per_mode: o.bits_per_mode(),
            rate_bits_per_s: o.bits_per_s(),
            a_m: o.params.a,
            l_d_m: o.params.l_d,
            l_o_m: o.params.l_o,
            alpha_sq: Some(o.params.alpha_sq),
            n_pixels: Some(o.channel_count()),
            p_noise_max: Some(o.rate.noise_max),
        }
    }

    /// Capacity row: `bits_per_mode` is the capacity per mode slot.
    pub fn capacity(range_m: f64, bits_per_mode: f64, nu_hz: f64) -> Self {
        Self {
            range_m,
            system: "capacity".into(),
            config_label: "soft".into(),
            rate_bits_per_mode: bits_per_mode,
            rate_bits_per_s: nu_hz * bits_per_mode,
            a_m: None,
            l_d_m: None,
            l_o_m: None,
            alpha_sq: None,
            n_pixels: None,
            p_noise_max: None,
        }
    }

    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        [
            format!("{:e}", self.range_m),
            self.system.clone(),
            self.config_label.clone(),
            format!("{:e}", self.rate_bits_per_mode),
            format!("{:e}", self.rate_bits_per_s),
            opt(self.a_m),
            opt(self.l_d_m),
            opt(self.l_o_m),
            opt(self.alpha_sq),
            self.n_pixels.map(|n| n.to_string()).unwrap_or_default(),
            opt(self.p_noise_max),
        ]
    }
}

/// A result file: `# key = value` metadata lines, then the CSV table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultFile {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ResultRow>,
}

impl ResultFile {
    /// Empty file whose header records the config hash, code version and
    /// tolerances.
    pub fn for_config(config: &RunConfig) -> Self {
        let q = &config.quadrature;
        let c = &config.convergence;
        Self {
            metadata: vec![
                ("config_sha256".into(), config.hash()),
                ("code_version".into(), env!("CARGO_PKG_VERSION").into()),
                (
                    "quadrature".into(),
                    format!("abs_tol={:e} rel_tol={:e} max_subdivisions={}", q.abs_tol, q.rel_tol, q.max_subdivisions),
                ),
                (
                    "optimizer".into(),
                    format!(
                        "f_rel={:e} x_rel={:e} max_evaluations={} seed_profile={}",
                        c.f_rel, c.x_rel, c.max_evaluations, config.seed_profile
                    ),
                ),
            ],
            rows: Vec::new(),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.fields()).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let metadata = text
            .lines()
            .map(str::trim)
            .take_while(|l| l.is_empty() || l.starts_with('#'))
            .filter_map(|l| l.strip_prefix('#')?.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        let idx: Vec<usize> = COLUMNS
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == *c)
                    .ok_or_else(|| Error::parse("header", format!("missing column '{c}'")))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let cell = |c: usize| rec.get(idx[c]).unwrap_or("");
            let bad = |c: usize, what: &str| {
                Error::parse(
                    format!("line {line}, column {}", COLUMNS[c]),
                    format!("'{}' is not {what}", cell(c)),
                )
            };
            let float = |c: usize| cell(c).parse::<f64>().map_err(|_| bad(c, "a number"));
            let opt = |c: usize| {
                if cell(c).is_empty() {
                    Ok(None)
                } else {
                    float(c).map(Some)
                }
            };
            rows.push(ResultRow {
                range_m: float(0)?,
                system: cell(1).to_string(),
                config_label: cell(2).to_string(),
                rate_bits_per_mode: float(3)?,
                rate_bits_per_s: float(4)?,
                a_m: opt(5)?,
                l_d_m: opt(6)?,
                l_o_m: opt(7)?,
                alpha_sq: opt(8)?,
                n_pixels: if cell(9).is_empty() {
                    None
                } else {
                    Some(cell(9).parse().map_err(|_| bad(9, "a whole number"))?)
                },
                p_noise_max: opt(10)?,
            });
        }
        Ok(Self { metadata, rows })
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

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// One range of a gap report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEntry {
    pub range_m: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    /// `10 log10(rate_a / rate_b)`; `None` when either rate is zero.
    pub db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    /// Ranges left out because a rate was zero.
    pub excluded: usize,
    /// Largest gap and the range where it occurs.
    pub worst: Option<(f64, f64)>,
}

fn same_range(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn single_system<'a>(rows: &'a [ResultRow], name: &str) -> Result<&'a [ResultRow]> {
    for (i, r) in rows.iter().enumerate() {
        if rows[..i].iter().any(|p| same_range(p.range_m, r.range_m)) {
            return Err(Error::Mismatch(format!(
                "{name} has several rows at range {} m; compare one system per file",
                r.range_m
            )));
        }
    }
    Ok(rows)
}

/// Per-range ratio of the rates in `a` over those in `b`, in dB.
pub fn gap_report(a: &[ResultRow], b: &[ResultRow]) -> Result<GapReport> {
    let a = single_system(a, "file A")?;
    let b = single_system(b, "file B")?;
    let only = |x: &[ResultRow], y: &[ResultRow]| -> Vec<f64> {
        x.iter()
            .filter(|r| !y.iter().any(|s| same_range(r.range_m, s.range_m)))
            .map(|r| r.range_m)
            .collect()
    };
    let (only_a, only_b) = (only(a, b), only(b, a));
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(Error::Mismatch(format!(
            "range grids differ: only in A {only_a:?}, only in B {only_b:?}"
        )));
    }
    let mut entries = Vec::with_capacity(a.len());
    let mut excluded = 0;
    let mut worst: Option<(f64, f64)> = None;
    for ra in a {
        let rb = b.iter().find(|r| same_range(r.range_m, ra.range_m)).expect("grids match");
        let (x, y) = (ra.rate_bits_per_s, rb.rate_bits_per_s);
        let db = if x > 0.0 && y > 0.0 {
            let db = 10.0 * (x / y).log10();
            if worst.is_none_or(|(_, w)| db > w) {
                worst = Some((ra.range_m, db));
            }
            Some(db)
        } else {
            excluded += 1;
            None
        };
        entries.push(GapEntry {
            range_m: ra.range_m,
            rate_a: x,
            rate_b: y,
            db,
        });
    }
    Ok(GapReport { entries, excluded, worst })
}

impl GapReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        match self.worst {
            Some((r, db)) => out.push_str(&format!("# worst_gap_db = {db:.6}\n# worst_gap_range_m = {r:e}\n")),
            None => out.push_str("# worst_gap_db = none\n"),
        }
        out.push_str(&format!("# excluded_zero_rate_rows = {}\n", self.excluded));
        out.push_str("range_m,rate_a_bits_per_s,rate_b_bits_per_s,gap_db\n");
        for e in &self.entries {
            let db = e.db.map(|d| format!("{d:.6}")).unwrap_or_default();
            out.push_str(&format!("{:e},{:e},{:e},{db}\n", e.range_m, e.rate_a, e.rate_b));
        }
        out
    }
}
