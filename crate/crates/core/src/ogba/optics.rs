//! Power every beam of a grid deposits in every pixel.

use super::grid::{AxisLayout, PixelGrid};
use super::SquareLink;
use crate::error::Result;
use crate::mathkern::QuadratureSpec;
use crate::modes::{BeamParams, OpticalGeometry};

/// Separable beam-to-pixel power table of a grid.
///
/// Beam `(n, m)` deposits `x[n][u] * y[m][v]` in pixel `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOptics {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    // column sums: power from all beams along the axis into each cell
    x_in: Vec<f64>,
    y_in: Vec<f64>,
}

/// Odd antiderivative `H(x) = ∫_0^x C F²` tabulated at the distinct `|x|` an
/// axis layout needs.
struct Antiderivative {
    points: Vec<f64>,
    values: Vec<f64>,
    tol: f64,
}

impl Antiderivative {
    fn build(link: &SquareLink, mut points: Vec<f64>, scale: f64, spec: &QuadratureSpec) -> Result<Self> {
        let tol = 1e-12 * scale;
        points.sort_by(f64::total_cmp);
        points.dedup_by(|b, a| (*b - *a).abs() <= tol);
        let mut values = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &p in &points {
            acc += link.axis_power(prev, p, spec)?;
            values.push(acc);
            prev = p;
        }
        Ok(Self { points, values, tol })
    }

    fn at(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.tol {
            return 0.0;
        }
        let i = self.points.partition_point(|&p| p < ax - self.tol);
        debug_assert!(i < self.points.len() && (self.points[i] - ax).abs() <= self.tol);
        self.values[i].copysign(x)
    }
}

fn axis_table(link: &SquareLink, axis: &AxisLayout, scale: f64, spec: &QuadratureSpec) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::with_capacity(2 * axis.len() * axis.len());
    for &t in &axis.targets {
        for &(lo, hi) in &axis.cells {
            points.push((lo - t).abs());
            points.push((hi - t).abs());
        }
    }
    let h = Antiderivative::build(link, points, scale, spec)?;
    Ok(axis
        .targets
        .iter()
        .map(|&t| axis.cells.iter().map(|&(lo, hi)| h.at(hi - t) - h.at(lo - t)).collect())
        .collect())
}

fn column_sums(table: &[Vec<f64>]) -> Vec<f64> {
    let cells = table.first().map_or(0, Vec::len);
    (0..cells).map(|j| table.iter().map(|row| row[j]).sum()).collect()
}

impl GridOptics {
    pub fn evaluate(
        grid: &PixelGrid,
        params: &BeamParams,
        geom: &OpticalGeometry,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let link = SquareLink::new(params, geom)?;
        let x = axis_table(&link, &grid.x, grid.l_r, spec)?;
        let y = if grid.y == grid.x {
            x.clone()
        } else {
            axis_table(&link, &grid.y, grid.l_r, spec)?
        };
        Ok(Self {
            x_in: column_sums(&x),
            y_in: column_sums(&y),
            x,
            y,
        })
    }

    /// Power beam `(n, m)` deposits in pixel `(u, v)`.
    pub fn deposit(&self, beam: (usize, usize), pixel: (usize, usize)) -> f64 {
        self.x[beam.0][pixel.0] * self.y[beam.1][pixel.1]
    }

    /// Fraction of its own beam captured by pixel `(u, v)`.
    pub fn capture(&self, u: usize, v: usize) -> f64 {
        self.deposit((u, v), (u, v))
    }

    /// Summed power of every other beam landing in pixel `(u, v)`.
    pub fn leakage(&self, u: usize, v: usize) -> f64 {
        // Σ_{(n,m)≠(u,v)} = Σ_{n≠u} Σ_m + Σ_{m≠v} (n = u)
        let own_x = self.x[u][u];
        let own_y = self.y[v][v];
        (self.x_in[u] - own_x) * self.y_in[v] + own_x * (self.y_in[v] - own_y)
    }

    /// Power of beam `(n, m)` collected by all pixels together.
    pub fn beam_total(&self, n: usize, m: usize) -> f64 {
        self.x[n].iter().sum::<f64>() * self.y[m].iter().sum::<f64>()
    }
}
