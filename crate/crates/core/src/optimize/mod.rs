//! Derivative-free maximization and the per-system rate searches built on it.

mod search;

pub use search::{
    best_intensity, optimize_lg_at_range, optimize_ogba_at_range, optimize_single_fb_square,
    optimize_soft_multimode, INTENSITY_BOUNDS,
    optimize_at_range, sweep, LinkSetup, OptimalParams, RangeOutcome, SeedProfile, SweepFailure,
    SweepResult, SystemKind,
};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Stopping rules for one local search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    /// Spread of simplex values relative to the best value.
    pub f_rel: f64,
    /// Simplex diameter relative to the box size.
    pub x_rel: f64,
    pub max_evaluations: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            f_rel: 1e-6,
            x_rel: 1e-5,
            max_evaluations: 2000,
        }
    }
}

impl Convergence {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_rel > 0.0 && self.f_rel.is_finite()) {
            return Err(Error::domain(format!("opt_f_rel = {} must be positive", self.f_rel)));
        }
        if !(self.x_rel > 0.0 && self.x_rel.is_finite()) {
            return Err(Error::domain(format!("opt_x_rel = {} must be positive", self.x_rel)));
        }
        if self.max_evaluations < 10 {
            return Err(Error::domain(format!(
                "opt_max_evaluations = {} must be at least 10",
                self.max_evaluations
            )));
        }
        Ok(())
    }
}

/// A box-constrained maximization problem.
pub struct OptimizationProblem<F> {
    pub objective: F,
    /// `(lo, hi)` per coordinate.
    pub bounds: Vec<(f64, f64)>,
    /// Starting points; each runs its own local search.
    pub seeds: Vec<Vec<f64>>,
    pub convergence: Convergence,
}

/// Best point found.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Index of the seed whose search produced `x`.
    pub seed: usize,
    pub evaluations: usize,
}

/// Corners of the box shrunk halfway toward the center, then the center.
pub fn box_seeds(bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let d = bounds.len();
    let at = |frac: f64, (lo, hi): (f64, f64)| lo + frac * (hi - lo);
    let mut seeds: Vec<Vec<f64>> = (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|i| at(if mask >> i & 1 == 1 { 0.75 } else { 0.25 }, bounds[i]))
                .collect()
        })
        .collect();
    seeds.push(bounds.iter().map(|&b| at(0.5, b)).collect());
    seeds
}

struct Scaled<'a, F> {
    f: &'a F,
    bounds: &'a [(f64, f64)],
    evaluations: usize,
}

impl<F: Fn(&[f64]) -> f64> Scaled<'_, F> {
    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.bounds)
            .map(|(&ui, &(lo, hi))| lo + ui.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    }

    /// Non-finite values rank below everything.
    fn eval(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(&self.to_x(u));
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn clamp_unit(u: &mut [f64]) {
    for v in u {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Nelder-Mead in unit-box coordinates, maximizing. Returns `(u, f)`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    obj: &mut Scaled<'_, F>,
    start: &[f64],
    step: f64,
    conv: &Convergence,
    budget: usize,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut s0 = start.to_vec();
    clamp_unit(&mut s0);
    let f0 = obj.eval(&s0);
    simplex.push((s0.clone(), f0));
    for i in 0..d {
        let mut p = s0.clone();
        p[i] += if p[i] + step <= 1.0 { step } else { -step };
        let f = obj.eval(&p);
        simplex.push((p, f));
    }
    let limit = obj.evaluations + budget;
    let centroid = |s: &[(Vec<f64>, f64)]| {
        let mut c = vec![0.0; d];
        for (p, _) in &s[..d] {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi / d as f64;
            }
        }
        c
    };
    let along = |c: &[f64], w: &[f64], t: f64| {
        let mut p: Vec<f64> = c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect();
        clamp_unit(&mut p);
        p
    };
    loop {
        // best first; ties keep their order so runs are reproducible
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let spread = if best.is_finite() && worst.is_finite() {
            best - worst
        } else if best == worst {
            0.0
        } else {
            f64::INFINITY
        };
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let f_ok = spread <= conv.f_rel * best.abs().max(1e-300);
        if (f_ok && diameter <= conv.x_rel) || diameter <= 1e-3 * conv.x_rel || obj.evaluations >= limit {
            break;
        }
        let c = centroid(&simplex);
        let w = simplex[d].0.clone();
        let r = along(&c, &w, -1.0);
        let fr = obj.eval(&r);
        if fr > simplex[0].1 {
            let e = along(&c, &w, -2.0);
            let fe = obj.eval(&e);
            simplex[d] = if fe > fr { (e, fe) } else { (r, fr) };
        } else if fr > simplex[d - 1].1 {
            simplex[d] = (r, fr);
        } else {
            let (k, fk) = if fr > simplex[d].1 {
                let k = along(&c, &r, 0.5);
                let fk = obj.eval(&k);
                (k, fk)
            } else {
                let k = along(&c, &w, 0.5);
                let fk = obj.eval(&k);
                (k, fk)
            };
            if fk > simplex[d].1.max(fr) || (fk >= simplex[d].1 && fr <= simplex[d].1) {
                simplex[d] = (k, fk);
            } else {
                let b = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let p = along(&b, &item.0, 0.5);
                    let f = obj.eval(&p);
                    *item = (p, f);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    simplex.swap_remove(0)
}

/// One search from a seed: Nelder-Mead, then a restart from its result with
/// a fresh simplex to escape premature collapse.
fn local_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    bounds: &[(f64, f64)],
    seed: &[f64],
    conv: &Convergence,
) -> (Vec<f64>, f64, usize) {
    let mut obj = Scaled { f, bounds, evaluations: 0 };
    let u0: Vec<f64> = seed
        .iter()
        .zip(bounds)
        .map(|(&x, &(lo, hi))| ((x - lo) / (hi - lo)).clamp(0.0, 1.0))
        .collect();
    let (u1, f1) = nelder_mead(&mut obj, &u0, 0.1, conv, conv.max_evaluations);
    let left = conv.max_evaluations.saturating_sub(obj.evaluations);
    let (u, fv) = if left > u1.len() + 1 {
        let (u2, f2) = nelder_mead(&mut obj, &u1, 0.02, conv, left);
        if f2 > f1 {
            (u2, f2)
        } else {
            (u1, f1)
        }
    } else {
        (u1, f1)
    };
    (obj.to_x(&u), fv, obj.evaluations)
}

/// Maximizes `problem.objective` over its box from every seed and returns
/// the best result. Seeds run in parallel; the merge is by seed order, so
/// the result does not depend on scheduling.
pub fn maximize<F>(problem: &OptimizationProblem<F>) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let bounds = &problem.bounds;
    if bounds.is_empty() {
        return Err(Error::Optimization("no parameters to optimize".into()));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Optimization(format!("bad bounds [{lo}, {hi}] for parameter {i}")));
        }
    }
    if problem.seeds.is_empty() {
        return Err(Error::Optimization("no seeds".into()));
    }
    for (i, s) in problem.seeds.iter().enumerate() {
        if s.len() != bounds.len() {
            return Err(Error::Optimization(format!("seed {i} has {} coordinates", s.len())));
        }
    }
    let interior = problem.seeds.iter().any(|s| {
        s.iter().zip(bounds.iter()).all(|(&x, &(lo, hi))| x > lo && x < hi)
    });
    if !interior {
        return Err(Error::Optimization("no seed lies strictly inside the bounds".into()));
    }
    let runs: Vec<(Vec<f64>, f64, usize)> = problem
        .seeds
        .par_iter()
        .map(|s| local_search(&problem.objective, bounds, s, &problem.convergence))
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let mut best: Option<usize> = None;
    for (i, run) in runs.iter().enumerate() {
        if run.1.is_finite() && best.is_none_or(|b| run.1 > runs[b].1) {
            best = Some(i);
        }
    }
    let seed = best.ok_or_else(|| Error::Optimization("objective was never finite".into()))?;
    let (x, value, _) = &runs[seed];
    Ok(Optimum {
        x: x.clone(),
        value: *value,
        seed,
        evaluations,
    })
}

/// Maximizes a function of one variable on `[lo, hi]`: a uniform scan of
/// `grid` points, then golden-section refinement around the best one.
/// Returns `(x, f(x))`.
pub fn maximize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize, x_tol: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || grid < 3 {
        return Err(Error::Optimization(format!("bad scalar search on [{lo}, {hi}]")));
    }
    let g = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let h = (hi - lo) / (grid - 1) as f64;
    let values: Vec<f64> = (0..grid).map(|i| g(lo + i as f64 * h)).collect();
    let (ib, &fb) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("grid is non-empty");
    if !fb.is_finite() {
        return Err(Error::Optimization("objective was never finite".into()));
    }
    let mut a = lo + ib.saturating_sub(1) as f64 * h;
    let mut b = lo + (ib + 1).min(grid - 1) as f64 * h;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while (b - a) > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d);
        }
    }
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    let grid_x = lo + ib as f64 * h;
    Ok(if v >= fb { (x, v) } else { (grid_x, fb) })
}
