//! Mode-separator cross-talk matrices.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const ROW_SUM_SLACK: f64 = 1e-9;

/// `entries[i][j]`: fraction of the power sent on mode `labels[i]` that is
/// detected as mode `labels[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    labels: Vec<i32>,
    entries: Vec<Vec<f64>>,
}

impl CrosstalkMatrix {
    pub fn new(labels: Vec<i32>, entries: Vec<Vec<f64>>) -> Result<Self> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::domain("cross-talk matrix has no modes"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::domain(format!("mode label {l} appears twice")));
            }
        }
        if entries.len() != k {
            return Err(Error::domain(format!("{} rows for {k} mode labels", entries.len())));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::domain(format!(
                    "row for mode {} has {} entries, expected {k}",
                    labels[i],
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::domain(format!(
                        "entry ({}, {}) = {v} outside [0, 1]",
                        labels[i], labels[j]
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if sum > 1.0 + ROW_SUM_SLACK {
                return Err(Error::domain(format!(
                    "row for mode {} sums to {sum} > 1",
                    labels[i]
                )));
            }
        }
        Ok(Self { labels, entries })
    }

    pub fn identity(labels: Vec<i32>) -> Result<Self> {
        let k = labels.len();
        let entries = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(labels, entries)
    }

    /// Stand-in separator: 0.921 on the diagonal, the remaining 0.079 of each
    /// row spread over the other modes in proportion to `e^{-|i-j|}`.
    pub fn synthetic(labels: Vec<i32>) -> Result<Self> {
        const DIAGONAL: f64 = 0.921;
        let k = labels.len();
        let mut entries = vec![vec![0.0; k]; k];
        for i in 0..k {
            let weights: Vec<f64> = (0..k)
                .map(|j| if i == j { 0.0 } else { (-(labels[i] - labels[j]).abs() as f64).exp() })
                .collect();
            let total: f64 = weights.iter().sum();
            for j in 0..k {
                entries[i][j] = if i == j {
                    if total > 0.0 { DIAGONAL } else { 1.0 }
                } else {
                    (1.0 - DIAGONAL) * weights[j] / total
                };
            }
        }
        Self::new(labels, entries)
    }

    /// Synthetic separator for `l = -12..=12`.
    pub fn synthetic_default() -> Self {
        Self::synthetic((-12..=12).collect()).expect("synthetic matrix is valid")
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn index_of(&self, label: i32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Entry for sent mode `from` detected as `to`.
    pub fn get(&self, from: i32, to: i32) -> Option<f64> {
        Some(self.entries[self.index_of(from)?][self.index_of(to)?])
    }

    pub fn row_sum(&self, label: i32) -> Option<f64> {
        Some(self.entries[self.index_of(label)?].iter().sum())
    }

    /// Restricts to `used` (in that order) and rescales each row to sum to 1.
    pub fn normalize(&self, used: &[i32]) -> Result<Self> {
        let idx: Vec<usize> = used
            .iter()
            .map(|&l| {
                self.index_of(l)
                    .ok_or_else(|| Error::domain(format!("mode {l} is not in the cross-talk matrix")))
            })
            .collect::<Result<_>>()?;
        let mut entries = Vec::with_capacity(idx.len());
        for (&i, &label) in idx.iter().zip(used) {
            let row: Vec<f64> = idx.iter().map(|&j| self.entries[i][j]).collect();
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(Error::domain(format!(
                    "row for mode {label} has zero weight on the used modes"
                )));
            }
            entries.push(row.into_iter().map(|v| (v / sum).min(1.0)).collect());
        }
        Self::new(used.to_vec(), entries)
    }

    /// Parses a header row of integer labels followed by one row of values
    /// per label. Blank lines and `#` comments are ignored.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = records
            .next()
            .ok_or_else(|| Error::parse("line 1", "missing header row of mode labels"))??;
        let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());
        let header_line = line_of(&header);
        let labels = header
            .iter()
            .enumerate()
            .map(|(c, f)| {
                f.parse::<i32>().map_err(|_| {
                    Error::parse(
                        format!("line {header_line}, column {}", c + 1),
                        format!("mode label '{f}' is not an integer"),
                    )
                })
            })
            .collect::<Result<Vec<i32>>>()?;
        let mut entries = Vec::new();
        for rec in records {
            let rec = rec?;
            let line = line_of(&rec);
            if rec.len() != labels.len() {
                return Err(Error::parse(
                    format!("line {line}"),
                    format!("{} values, expected {}", rec.len(), labels.len()),
                ));
            }
            let row = rec
                .iter()
                .enumerate()
                .map(|(c, f)| {
                    f.parse::<f64>().map_err(|_| {
                        Error::parse(
                            format!("line {line}, column {}", c + 1),
                            format!("'{f}' is not a number"),
                        )
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            entries.push(row);
        }
        Self::new(labels, entries)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        w.write_record(&header).expect("in-memory write");
        for row in &self.entries {
            let fields: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            w.write_record(&fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
