//! Adaptive Gauss–Kronrod quadrature.
//!
//! The engine is a global-error adaptive scheme over 15-point Kronrod panels
//! with the embedded 7-point Gauss rule as error estimate. It is generic over
//! the integrand's value type so that a whole family of integrals (for example
//! one radial profile per azimuthal order) can share the same abscissae.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and work limit for an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) {
            return Err(Error::domain("quadrature tolerances must be non-negative"));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(Error::domain(
                "at least one of abs_tol, rel_tol must be strictly positive",
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Error target for an integral whose magnitude is `norm`.
    pub fn target(&self, norm: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * norm)
    }

    /// Same relative tolerance, absolute tolerance divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }
}

/// Values an integrand may return: scalars, complex numbers, or vectors of them.
pub trait QuadValue: Clone {
    fn zeroed(&self) -> Self;
    fn add_scaled(&mut self, weight: f64, other: &Self);
    /// Max-abs norm.
    fn norm(&self) -> f64;
    /// Max-abs norm of the difference.
    fn distance(&self, other: &Self) -> f64;
}

impl QuadValue for f64 {
    fn zeroed(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, weight: f64, other: &Self) {
        *self += weight * other;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for Complex64 {
    fn zeroed(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, weight: f64, other: &Self) {
        *self += other * weight;
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl<T: QuadValue> QuadValue for Vec<T> {
    fn zeroed(&self) -> Self {
        self.iter().map(QuadValue::zeroed).collect()
    }
    fn add_scaled(&mut self, weight: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.add_scaled(weight, b);
        }
    }
    fn norm(&self) -> f64 {
        self.iter().map(QuadValue::norm).fold(0.0, f64::max)
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

/// Result of a converged (or best-effort) quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

/// Tolerance not reached within the subdivision budget.
#[derive(Debug, Clone, PartialEq)]
pub struct NonConvergence<T> {
    pub best: Estimate<T>,
    pub requested_error: f64,
}

impl<T: QuadValue> From<NonConvergence<T>> for Error {
    fn from(nc: NonConvergence<T>) -> Self {
        Error::Convergence {
            estimate_norm: nc.best.value.norm(),
            achieved_error: nc.best.error,
            requested_error: nc.requested_error,
            subdivisions: nc.best.subdivisions,
        }
    }
}

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

fn kronrod15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, lo: f64, hi: f64) -> Panel<T> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc.zeroed();
    let mut gauss = fc.zeroed();
    kronrod.add_scaled(WGK[7], &fc);
    gauss.add_scaled(WG[3], &fc);
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod.add_scaled(WGK[j], &f1);
        kronrod.add_scaled(WGK[j], &f2);
        if j % 2 == 1 {
            gauss.add_scaled(WG[j / 2], &f1);
            gauss.add_scaled(WG[j / 2], &f2);
        }
    }
    let mut value = kronrod.zeroed();
    value.add_scaled(half, &kronrod);
    let mut g = gauss.zeroed();
    g.add_scaled(half, &gauss);
    let error = value.distance(&g);
    Panel {
        lo,
        hi,
        value,
        error,
    }
}

struct ByError(f64, usize);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Integrate `f` over `[lo, hi]`.
pub fn integrate<T, F>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> std::result::Result<Estimate<T>, NonConvergence<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate_with_breaks(f, &[lo, hi], spec)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, starting from one panel per
/// gap between consecutive break points. Breaks must be monotone.
pub fn integrate_with_breaks<T, F>(
    mut f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> std::result::Result<Estimate<T>, NonConvergence<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    assert!(breaks.len() >= 2, "need at least two break points");
    let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
    if hi < lo {
        let reversed: Vec<f64> = breaks.iter().rev().copied().collect();
        return integrate_with_breaks(f, &reversed, spec).map(negate).map_err(|mut nc| {
            nc.best = negate(nc.best);
            nc
        });
    }

    let mut panels: Vec<Panel<T>> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            panels.push(kronrod15(&mut f, w[0], w[1]));
        }
    }
    let mut evaluations = 15 * panels.len();
    if panels.is_empty() {
        let zero = f(lo).zeroed();
        return Ok(Estimate {
            value: zero,
            error: 0.0,
            subdivisions: 0,
            evaluations: 1,
        });
    }

    let mut heap: BinaryHeap<ByError> = panels
        .iter()
        .enumerate()
        .map(|(i, p)| ByError(p.error, i))
        .collect();
    let mut subdivisions = 0usize;

    loop {
        let mut total = panels[0].value.zeroed();
        let mut total_err = 0.0;
        for p in &panels {
            total.add_scaled(1.0, &p.value);
            total_err += p.error;
        }
        let target = spec.target(total.norm());
        if total_err <= target {
            return Ok(Estimate {
                value: total,
                error: total_err,
                subdivisions,
                evaluations,
            });
        }
        let exhausted = subdivisions >= spec.max_subdivisions;
        let next = heap.pop();
        let idx = match (exhausted, next) {
            (false, Some(ByError(_, idx))) => idx,
            _ => {
                return Err(NonConvergence {
                    best: Estimate {
                        value: total,
                        error: total_err,
                        subdivisions,
                        evaluations,
                    },
                    requested_error: target,
                });
            }
        };
        let (a, b) = (panels[idx].lo, panels[idx].hi);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            // Panel cannot be split further in floating point; leave it out of
            // the queue so the remaining budget goes elsewhere.
            continue;
        }
        let left = kronrod15(&mut f, a, mid);
        let right = kronrod15(&mut f, mid, b);
        evaluations += 30;
        subdivisions += 1;
        heap.push(ByError(left.error, idx));
        panels[idx] = left;
        heap.push(ByError(right.error, panels.len()));
        panels.push(right);
    }
}

fn negate<T: QuadValue>(mut e: Estimate<T>) -> Estimate<T> {
    let mut neg = e.value.zeroed();
    neg.add_scaled(-1.0, &e.value);
    e.value = neg;
    e
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x0 + dx, self.x1 + dx, self.y0 + dy, self.y1 + dy)
    }
}

/// Adaptive integral of a complex function of one real variable.
pub fn quad_1d<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    spec.validate()?;
    Ok(integrate(f, lo, hi, spec)?.value)
}

/// Nested adaptive integral over a rectangle: the outer axis is `x`, and every
/// outer abscissa runs its own adaptive integral along `y`.
pub fn quad_2d<F>(f: F, rect: Rect, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Complex64,
{
    Ok(quad_2d_estimate(f, rect, spec)?.value)
}

/// Like [`quad_2d`] but also reports the combined error bound: the outer error
/// plus the width times the largest inner error.
pub fn quad_2d_estimate<F>(mut f: F, rect: Rect, spec: &QuadratureSpec) -> Result<Estimate<Complex64>>
where
    F: FnMut(f64, f64) -> Complex64,
{
    spec.validate()?;
    let width = rect.width().abs().max(f64::MIN_POSITIVE);
    let inner_spec = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol / width,
        rel_tol: 0.5 * spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
    };
    let outer_spec = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        rel_tol: 0.5 * spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
    };
    let mut failure: Option<Error> = None;
    let mut worst_inner = 0.0f64;
    let mut inner_evals = 0usize;
    let outer = integrate(
        |x| {
            if failure.is_some() {
                return Complex64::new(0.0, 0.0);
            }
            match integrate(|y| f(x, y), rect.y0, rect.y1, &inner_spec) {
                Ok(est) => {
                    worst_inner = worst_inner.max(est.error);
                    inner_evals += est.evaluations;
                    est.value
                }
                Err(nc) => {
                    failure = Some(nc.into());
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        rect.x0,
        rect.x1,
        &outer_spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(Estimate {
        error: outer.error + width * worst_inner,
        value: outer.value,
        subdivisions: outer.subdivisions,
        evaluations: inner_evals,
    })
}
