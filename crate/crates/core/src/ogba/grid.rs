//! Receiver pixel layouts.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mathkern::Rect;

/// Pixel arrangement on the square receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelConfig {
    /// Odd number of pixels per side, one centered on the axis.
    CenteredSingle,
    /// Even number of pixels per side, four meeting at the axis.
    Centered2x2,
    /// Two `l_r/√2` squares side by side, beams offset by `±l_o`.
    OneByTwo,
}

impl PixelConfig {
    pub const ALL: [PixelConfig; 3] = [
        PixelConfig::CenteredSingle,
        PixelConfig::Centered2x2,
        PixelConfig::OneByTwo,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PixelConfig::CenteredSingle => "centered_single",
            PixelConfig::Centered2x2 => "centered_2x2",
            PixelConfig::OneByTwo => "one_by_two",
        }
    }

    /// Square grids are parameterized by the pixel side `l_d`.
    pub fn is_square_grid(&self) -> bool {
        !matches!(self, PixelConfig::OneByTwo)
    }
}

impl fmt::Display for PixelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PixelConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PixelConfig::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::domain(format!("unknown pixel configuration '{s}'")))
    }
}

/// Cells along one axis and the beam aimed at each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisLayout {
    /// `(lo, hi)` extent of each cell after clipping to the aperture.
    pub cells: Vec<(f64, f64)>,
    /// Beam target coordinate for each cell (center of the unclipped cell).
    pub targets: Vec<f64>,
}

impl AxisLayout {
    fn centered(count: usize, pitch: f64, half_width: f64) -> Self {
        let mid = (count as f64 - 1.0) / 2.0;
        let mut cells = Vec::with_capacity(count);
        let mut targets = Vec::with_capacity(count);
        for i in 0..count {
            let c = (i as f64 - mid) * pitch;
            let lo = (c - pitch / 2.0).max(-half_width);
            let hi = (c + pitch / 2.0).min(half_width);
            cells.push((lo, hi));
            targets.push(c);
        }
        Self { cells, targets }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// One detector pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub u: usize,
    pub v: usize,
    pub rect: Rect,
    /// Where the pixel's own beam is aimed.
    pub target: (f64, f64),
    /// Number of pixels equivalent to this one under the grid symmetry.
    pub multiplicity: usize,
}

/// Pixel grid plus the representative pixels that carry the whole rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    pub config: PixelConfig,
    pub l_r: f64,
    /// Full pixel side (square grids).
    pub l_d: Option<f64>,
    /// Beam offset (one_by_two).
    pub l_o: Option<f64>,
    pub x: AxisLayout,
    pub y: AxisLayout,
    representatives: Vec<Pixel>,
}

// a ratio within this of an integer counts as that integer
const COUNT_SLACK: f64 = 1e-9;

impl PixelGrid {
    /// `param` is `l_d` for square grids and `l_o` for `one_by_two`.
    pub fn build(config: PixelConfig, l_r: f64, param: f64) -> Result<Self> {
        if !(l_r > 0.0 && l_r.is_finite()) {
            return Err(Error::domain(format!("receiver side l_r = {l_r} must be positive")));
        }
        match config {
            PixelConfig::CenteredSingle | PixelConfig::Centered2x2 => {
                let l_d = param;
                if !(l_d > 0.0 && l_d.is_finite()) {
                    return Err(Error::domain(format!("pixel side l_d = {l_d} must be positive")));
                }
                let ratio = l_r / l_d;
                let count = if config == PixelConfig::CenteredSingle {
                    let half = ((ratio - 1.0) / 2.0 - COUNT_SLACK).ceil().max(0.0) as usize;
                    2 * half + 1
                } else {
                    let half = (ratio / 2.0 - COUNT_SLACK).ceil().max(1.0) as usize;
                    2 * half
                };
                let axis = AxisLayout::centered(count, l_d, l_r / 2.0);
                let mut grid = Self {
                    config,
                    l_r,
                    l_d: Some(l_d),
                    l_o: None,
                    x: axis.clone(),
                    y: axis,
                    representatives: Vec::new(),
                };
                grid.representatives = grid.octant_representatives();
                Ok(grid)
            }
            PixelConfig::OneByTwo => {
                let l_o = param;
                let l_s = l_r / 2f64.sqrt();
                if !(l_o >= 0.0 && l_o <= l_s / 2.0 * (1.0 + 1e-12)) {
                    return Err(Error::domain(format!(
                        "beam offset l_o = {l_o} outside [0, {}]",
                        l_s / 2.0
                    )));
                }
                let x = AxisLayout {
                    cells: vec![(-l_s, 0.0), (0.0, l_s)],
                    targets: vec![-l_o, l_o],
                };
                let y = AxisLayout {
                    cells: vec![(-l_s / 2.0, l_s / 2.0)],
                    targets: vec![0.0],
                };
                let mut grid = Self {
                    config,
                    l_r,
                    l_d: None,
                    l_o: Some(l_o),
                    x,
                    y,
                    representatives: Vec::new(),
                };
                grid.representatives = vec![grid.pixel(0, 0, 1), grid.pixel(1, 0, 1)];
                Ok(grid)
            }
        }
    }

    fn pixel(&self, u: usize, v: usize, multiplicity: usize) -> Pixel {
        let (x0, x1) = self.x.cells[u];
        let (y0, y1) = self.y.cells[v];
        Pixel {
            u,
            v,
            rect: Rect::new(x0, x1, y0, y1),
            target: (self.x.targets[u], self.y.targets[v]),
            multiplicity,
        }
    }

    /// One pixel per orbit of the square's symmetry group, in the octant
    /// `0 <= x <= y`, with its orbit size.
    fn octant_representatives(&self) -> Vec<Pixel> {
        let n = self.x.len();
        // twice the distance from the center, in pixel units
        let fold = |i: usize| (2 * i + 1).abs_diff(n);
        let mut orbits: Vec<((usize, usize), usize)> = Vec::new();
        for u in 0..n {
            for v in 0..n {
                let (a, b) = (fold(u), fold(v));
                let key = (a.min(b), a.max(b));
                match orbits.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, count)) => *count += 1,
                    None => orbits.push((key, 1)),
                }
            }
        }
        orbits.sort();
        let index_of = |d: usize| (d + n - 1) / 2;
        orbits
            .into_iter()
            .map(|((a, b), count)| self.pixel(index_of(a), index_of(b), count))
            .collect()
    }

    pub fn representatives(&self) -> &[Pixel] {
        &self.representatives
    }

    /// Every pixel individually, each with multiplicity 1.
    pub fn all_pixels(&self) -> Vec<Pixel> {
        let mut out = Vec::with_capacity(self.pixel_count());
        for v in 0..self.y.len() {
            for u in 0..self.x.len() {
                out.push(self.pixel(u, v, 1));
            }
        }
        out
    }

    pub fn pixel_count(&self) -> usize {
        self.x.len() * self.y.len()
    }

    /// Region covered by the pixels.
    pub fn receiver_rect(&self) -> Rect {
        let (x0, x1) = (self.x.cells[0].0, self.x.cells[self.x.len() - 1].1);
        let (y0, y1) = (self.y.cells[0].0, self.y.cells[self.y.len() - 1].1);
        Rect::new(x0, x1, y0, y1)
    }
}
