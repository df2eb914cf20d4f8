//! Plot-ready series extracted from result rows.

use super::results::ResultRow;

/// One curve of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// A figure: axes metadata plus its curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: &'static str,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn systems(rows: &[ResultRow]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for r in rows {
        if !out.contains(&r.system.as_str()) {
            out.push(&r.system);
        }
    }
    out
}

/// Rate against range, one series per system; zero-rate rows are dropped.
pub fn rate_figure(rows: &[ResultRow]) -> Figure {
    let series = systems(rows)
        .into_iter()
        .map(|s| Series {
            name: s.to_string(),
            points: rows
                .iter()
                .filter(|r| r.system == s && r.rate_bits_per_s > 0.0)
                .map(|r| (r.range_m, r.rate_bits_per_s))
                .collect(),
        })
        .collect();
    Figure {
        name: "rates",
        x_label: "range_m",
        y_label: "rate_bits_per_s",
        log_x: true,
        log_y: true,
        series,
    }
}

/// Optimal beam width, pixel width and intensity against range, for every
/// system that reports them. Zero-rate rows are dropped.
pub fn parameter_figure(rows: &[ResultRow]) -> Figure {
    type Getter = fn(&ResultRow) -> Option<f64>;
    let params: [(&str, Getter); 3] = [("a_m", |r| r.a_m), ("l_d_m", |r| r.l_d_m), ("alpha_sq", |r| r.alpha_sq)];
    let mut series = Vec::new();
    for s in systems(rows) {
        for (p, get) in params {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.system == s && r.rate_bits_per_s > 0.0)
                .filter_map(|r| Some((r.range_m, get(r)?)))
                .collect();
            if !points.is_empty() {
                series.push(Series {
                    name: format!("{s}:{p}"),
                    points,
                });
            }
        }
    }
    Figure {
        name: "params",
        x_label: "range_m",
        y_label: "value",
        log_x: true,
        log_y: true,
        series,
    }
}

impl Figure {
    /// Long-format columns `series,x,y` under axis metadata comments.
    pub fn to_text(&self) -> String {
        let scale = |log: bool| if log { "log" } else { "linear" };
        let mut out = format!(
            "# figure = {}\n# x = {} ({})\n# y = {} ({})\nseries,x,y\n",
            self.name,
            self.x_label,
            scale(self.log_x),
            self.y_label,
            scale(self.log_y)
        );
        for s in &self.series {
            for (x, y) in &s.points {
                out.push_str(&format!("{},{x:e},{y:e}\n", s.name));
            }
        }
        out
    }
}
