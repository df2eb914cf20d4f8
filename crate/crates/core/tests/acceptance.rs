//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs under `cargo test` without the libtest harness.

mod common;

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::Instant;

use common::{bessel_integral, fresnel_disk, fresnel_square, gaussian_input, lg0_input, rel};
use fsqkd_core::mathkern::{bessel_j, erf_complex};
use fsqkd_core::modes::{eta_soft, lg_output_field, lg_overlap_numeric};
use fsqkd_core::ogba::{gaussian_output_field, GridOptics, SquareLink};
use fsqkd_core::optimize::{
    best_intensity, maximize, optimize_single_fb_square, sweep, Convergence, OptimizationProblem, RangeOutcome,
};
use fsqkd_core::qkd::{bb84_rate, capacity_multimode_soft, capacity_single, ChannelPoint, ChannelSpec};
use fsqkd_core::{
    Aperture, ApertureShape, BeamParams, CrosstalkMatrix, DetectorModel, LinkSetup, OpticalGeometry, PixelConfig,
    PixelGrid, QuadratureSpec, Rect, SystemKind,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = 1.55e-6;
const AREA: f64 = 0.005 * PI;
const SWEEP_RANGES: [f64; 8] = [500.0, 700.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0];
const SQUARE_GAP_DB: f64 = 8.3 + 1.5;
const ANY_GAP_DB: f64 = 6.3 + 1.5;
// identity separator wide enough to hold every live mode over the sweep
const IDENTITY_EXTENT: i32 = 120;

type Check = Result<String, String>;

fn pass_if(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn geometry(shape: ApertureShape, range: f64) -> OpticalGeometry {
    let ap = Aperture::with_area(shape, AREA).unwrap();
    OpticalGeometry::new(LAMBDA, range, ap, ap).unwrap()
}

fn subset_renormalization() -> Check {
    let labels: Vec<i32> = (-2..=2).collect();
    let profile = [0.80, 0.07, 0.03];
    let entries = labels
        .iter()
        .map(|&i| labels.iter().map(|&j| profile.get((i - j).unsigned_abs() as usize).copied().unwrap_or(0.0)).collect())
        .collect();
    let m = CrosstalkMatrix::new(labels, entries).map_err(|e| e.to_string())?;
    let t = m.normalize(&[-1, 0, 1]).map_err(|e| e.to_string())?;
    let got = [t.get(0, -1).unwrap(), t.get(0, 0).unwrap(), t.get(0, 1).unwrap()];
    let want = [0.07447, 0.8511, 0.07447];
    let err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    pass_if(err <= 5e-4, format!("row 0 -> {got:.5?}, max error {err:.1e}"))
}

fn eigenvalue_algebra() -> Check {
    let mut worst: f64 = 0.0;
    for q in 1..=20 {
        let eta = eta_soft(q, 2.0).map_err(|e| e.to_string())?;
        worst = worst.max((eta / 0.5f64.powi(q as i32) - 1.0).abs());
    }
    pass_if(worst <= 1e-14, format!("max relative error {worst:.1e} over q = 1..20"))
}

fn far_field_limit() -> Check {
    let d = 1e-4;
    let err = (eta_soft(1, d).map_err(|e| e.to_string())? / d - 1.0).abs();
    pass_if(err < 1e-3, format!("|eta_1/D - 1| = {err:.3e}"))
}

fn capacity_slope() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for eta in [1e-3, 1e-2] {
        let c = capacity_single(eta).map_err(|e| e.to_string())?;
        let err = (2.0 * c / (2.885 * eta) - 1.0).abs();
        ok &= err < 0.01;
        parts.push(format!("eta={eta:e}: {err:.2e}"));
    }
    pass_if(ok, parts.join(", "))
}

fn azimuthal_orthogonality() -> Check {
    let geom = geometry(ApertureShape::HardCircle, 1000.0);
    let params = BeamParams::new(0.02, 1.0).unwrap();
    let v = lg_overlap_numeric((0, 1), (0, 2), &params, &geom, &QuadratureSpec::default()).map_err(|e| e.to_string())?;
    pass_if(v < 1e-10, format!("|<phi_1, phi_2>|^2 = {v:.2e}"))
}

fn power_conservation() -> Check {
    let spec = QuadratureSpec::default();
    let cases = [
        (1000.0, 0.02, PixelConfig::CenteredSingle, 0.2),
        (5000.0, 0.05, PixelConfig::Centered2x2, 0.5),
        (20000.0, 0.1, PixelConfig::OneByTwo, 0.15),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (range, a, config, frac) in cases {
        let geom = geometry(ApertureShape::HardSquare, range);
        let l_r = geom.rx.characteristic_length();
        let params = BeamParams::new(a, 1.0).unwrap();
        let link = SquareLink::new(&params, &geom).map_err(|e| e.to_string())?;
        let grid = PixelGrid::build(config, l_r, frac * l_r).map_err(|e| e.to_string())?;
        let optics = GridOptics::evaluate(&grid, &params, &geom, &spec).map_err(|e| e.to_string())?;
        let aperture = Rect::new(-l_r / 2.0, l_r / 2.0, -l_r / 2.0, l_r / 2.0);
        let tiled = grid.receiver_rect();
        let mut worst_ratio: f64 = 0.0;
        for n in 0..grid.x.len() {
            for m in 0..grid.y.len() {
                let target = (grid.x.targets[n], grid.y.targets[m]);
                let whole = link.rect_power(&aperture, target, &spec).map_err(|e| e.to_string())?;
                ok &= (0.0..=1.0 + 1e-6).contains(&whole);
                let cover = link.rect_power(&tiled, target, &spec).map_err(|e| e.to_string())?;
                let diff = (optics.beam_total(n, m) - cover).abs();
                let tol = 2.0 * spec.target(cover);
                ok &= diff <= tol;
                worst_ratio = worst_ratio.max(diff / tol);
            }
        }
        parts.push(format!("{config}@{range}m: tiling error {worst_ratio:.2} of allowance"));
    }
    pass_if(ok, parts.join(", "))
}

fn ideal_bb84() -> Check {
    let det = DetectorModel::new(0.0, 1.0, 1.0, 1.0, 1e10).map_err(|e| e.to_string())?;
    let spec = ChannelSpec {
        label: 0,
        multiplicity: 1,
        transmissivity: 1.0,
        noise_per_photon: 0.0,
    };
    let (mu, rate) = best_intensity(&[spec], &det).map_err(|e| e.to_string())?;
    let problem = OptimizationProblem {
        objective: |x: &[f64]| {
            let point = ChannelPoint::new(1.0, 0.0).unwrap();
            bb84_rate(&point, &det, x[0]).map_or(f64::NAN, |b| b.rate_unclamped)
        },
        bounds: vec![(1e-4, 20.0)],
        seeds: vec![vec![0.3], vec![4.0]],
        convergence: Convergence::default(),
    };
    let nm = maximize(&problem).map_err(|e| e.to_string())?;
    let target = 1.0 / E;
    let at_one = bb84_rate(&ChannelPoint::new(1.0, 0.0).unwrap(), &det, 1.0).map_err(|e| e.to_string())?;
    let rate_err = [at_one.rate(), rate.bits_per_mode, nm.value]
        .into_iter()
        .map(|r| (r - target).abs())
        .fold(0.0, f64::max);
    // the location of a flat maximum is only as sharp as the search tolerance
    let width = problem.bounds[0].1 - problem.bounds[0].0;
    let mu_ok = (mu - 1.0).abs() <= 1e-6 && (nm.x[0] - 1.0).abs() <= Convergence::default().x_rel * width;
    pass_if(
        rate_err <= 1e-6 && mu_ok,
        format!(
            "R(mu=1)={:.12}; scalar: mu={mu:.9} R={:.12}; simplex: mu={:.7} R={:.12}; max rate error {rate_err:.1e}",
            at_one.rate(),
            rate.bits_per_mode,
            nm.x[0],
            nm.value
        ),
    )
}

fn multiplexing_gain(setup: &LinkSetup) -> Check {
    let range = 1000.0;
    let soft = geometry(ApertureShape::SoftGaussian, range);
    let capacity = capacity_multimode_soft(&soft, setup.detector.rep_rate).map_err(|e| e.to_string())?;
    let single = optimize_single_fb_square(setup, range, None).map_err(|e| e.to_string())?;
    let ratio = capacity / single.bits_per_s();
    pass_if(
        (10.0..=100.0).contains(&ratio),
        format!(
            "capacity {capacity:.4e} b/s / single beam {:.4e} b/s = {ratio:.1} (band [10, 100])",
            single.bits_per_s()
        ),
    )
}

fn db(a: f64, b: f64) -> f64 {
    10.0 * (a / b).log10()
}

struct SweepTable {
    ranges: Vec<f64>,
    lg: Vec<RangeOutcome>,
    matrix: Vec<RangeOutcome>,
    square: Vec<RangeOutcome>,
    any: Vec<RangeOutcome>,
}

fn run_sweep(setup: &LinkSetup) -> Result<SweepTable, String> {
    let mut setup = setup.clone();
    setup.matrix = Some(CrosstalkMatrix::identity((-IDENTITY_EXTENT..=IDENTITY_EXTENT).collect()).unwrap());
    let systems = [
        SystemKind::LgIdeal,
        SystemKind::LgMatrix,
        SystemKind::Ogba(PixelConfig::CenteredSingle),
        SystemKind::Ogba(PixelConfig::Centered2x2),
        SystemKind::Ogba(PixelConfig::OneByTwo),
    ];
    let result = sweep(&setup, &SWEEP_RANGES, &systems).map_err(|e| e.to_string())?;
    if let Some(f) = result.failures.first() {
        return Err(format!("{} at {} m failed: {}", f.system, f.range, f.message));
    }
    let pick = |range: f64, system: SystemKind| {
        result
            .outcomes
            .iter()
            .find(|o| o.range == range && o.system == system)
            .cloned()
            .expect("every point succeeded")
    };
    let best_of = |range: f64, configs: &[PixelConfig]| {
        configs
            .iter()
            .map(|&c| pick(range, SystemKind::Ogba(c)))
            .max_by(|a, b| a.bits_per_s().total_cmp(&b.bits_per_s()))
            .unwrap()
    };
    let square = [PixelConfig::CenteredSingle, PixelConfig::Centered2x2];
    Ok(SweepTable {
        ranges: SWEEP_RANGES.to_vec(),
        lg: SWEEP_RANGES.iter().map(|&r| pick(r, SystemKind::LgIdeal)).collect(),
        matrix: SWEEP_RANGES.iter().map(|&r| pick(r, SystemKind::LgMatrix)).collect(),
        square: SWEEP_RANGES.iter().map(|&r| best_of(r, &square)).collect(),
        any: SWEEP_RANGES.iter().map(|&r| best_of(r, &PixelConfig::ALL)).collect(),
    })
}

fn worst_gap(lg: &[RangeOutcome], ogba: &[RangeOutcome]) -> (f64, f64) {
    lg.iter()
        .zip(ogba)
        .map(|(l, o)| (l.range, db(l.bits_per_s(), o.bits_per_s())))
        .fold((f64::NAN, f64::NEG_INFINITY), |w, g| if g.1 > w.1 { g } else { w })
}

fn ogba_gap(table: &Result<SweepTable, String>) -> Check {
    let t = table.as_ref().map_err(Clone::clone)?;
    let (sq_at, sq_db) = worst_gap(&t.lg, &t.square);
    let (any_at, any_db) = worst_gap(&t.lg, &t.any);
    let mut ok = sq_db <= SQUARE_GAP_DB && any_db <= ANY_GAP_DB;
    let mut parts = vec![
        format!("square grids worst {sq_db:.2} dB at {sq_at} m (limit {SQUARE_GAP_DB})"),
        format!("with one_by_two worst {any_db:.2} dB at {any_at} m (limit {ANY_GAP_DB})"),
    ];
    let behind: Vec<String> = t
        .lg
        .iter()
        .zip(&t.any)
        .filter(|(l, o)| l.bits_per_s() < o.bits_per_s())
        .map(|(l, o)| format!("{} m: LG {:.4e} < OGBA {:.4e} ({})", l.range, l.bits_per_s(), o.bits_per_s(), o.config_label))
        .collect();
    ok &= behind.is_empty();
    parts.push(if behind.is_empty() {
        "ideal LG >= OGBA at every range".into()
    } else {
        format!("ideal LG below OGBA at {}", behind.join("; "))
    });
    let mismatch = t
        .lg
        .iter()
        .zip(&t.matrix)
        .map(|(a, b)| (b.bits_per_s() / a.bits_per_s() - 1.0).abs())
        .fold(0.0, f64::max);
    let widest = t
        .lg
        .iter()
        .flat_map(|o| o.rate.channels.iter().filter(|c| c.breakdown.rate() > 0.0).map(|c| c.label.abs()))
        .max()
        .unwrap_or(0);
    ok &= mismatch <= 1e-9 && widest < IDENTITY_EXTENT as i64;
    parts.push(format!("identity matrix vs ideal max relative difference {mismatch:.1e} (widest live |l| = {widest})"));
    pass_if(ok, parts.join("; "))
}

fn fresnel_oracles() -> Check {
    let range = 1000.0;
    let k = 2.0 * PI / LAMBDA;
    let spec = QuadratureSpec::default();
    let circle = geometry(ApertureShape::HardCircle, range);
    let square = geometry(ApertureShape::HardSquare, range);
    let r_t = (AREA / PI).sqrt();
    let a = 0.02;
    let params = BeamParams::new(a, 1.0).unwrap();
    let mut lg_worst: f64 = 0.0;
    let mut g_worst: f64 = 0.0;
    for (i, r) in [0.004, 0.012, 0.024].into_iter().enumerate() {
        for (j, theta) in [0.3, 2.0, 4.1].into_iter().enumerate() {
            let l = 3;
            let lib = lg_output_field(0, l, r, theta, &params, &circle, &spec).map_err(|e| e.to_string())?;
            let pt = (r * theta.cos(), r * theta.sin());
            let oracle = fresnel_disk(|rr, t| lg0_input(l, rr, t, a, k, range), r_t, pt, LAMBDA, range);
            lg_worst = lg_worst.max(rel(lib, oracle));

            let (x, y) = ([0.0, 0.008, 0.025][i], [0.0, -0.011, 0.03][j]);
            let lib = gaussian_output_field(x, y, &params, &square).map_err(|e| e.to_string())?;
            let oracle = fresnel_square(|u, v| gaussian_input(u, v, a, k, range), AREA.sqrt(), (x, y), LAMBDA, range);
            g_worst = g_worst.max(rel(lib, oracle));
        }
    }
    pass_if(
        lg_worst <= 1e-6 && g_worst <= 1e-6,
        format!("LG(0,3) worst {lg_worst:.1e}, Gaussian worst {g_worst:.1e} over 9 points each"),
    )
}

fn trend(table: &Result<SweepTable, String>) -> Check {
    let t = table.as_ref().map_err(Clone::clone)?;
    let at = |range: f64| {
        let i = t.ranges.iter().position(|&r| r == range).unwrap();
        &t.square[i]
    };
    let (near, far) = (at(1000.0), at(5000.0));
    let (ld_near, ld_far) = (near.params.l_d.unwrap(), far.params.l_d.unwrap());
    let (n_near, n_far) = (near.channel_count(), far.channel_count());
    pass_if(
        ld_near < ld_far && n_near > n_far,
        format!(
            "1 km: {} l_d={ld_near:.4} m, {n_near} px; 5 km: {} l_d={ld_far:.4} m, {n_far} px",
            near.config_label, far.config_label
        ),
    )
}

fn special_function_identities() -> Check {
    let mut bessel_worst: f64 = 0.0;
    for n in 0..=30 {
        for i in 0..=40 {
            let x = 5.0 * i as f64;
            let lib = bessel_j(n, x).map_err(|e| e.to_string())?;
            bessel_worst = bessel_worst.max((lib - bessel_integral(n, x)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut erf_worst: f64 = 0.0;
    for _ in 0..2000 {
        let z = Complex64::new(rng.random_range(-6.0..6.0), rng.random_range(-5.0..5.0));
        let f = erf_complex(z).map_err(|e| e.to_string())?;
        let odd = erf_complex(-z).map_err(|e| e.to_string())?;
        let conj = erf_complex(z.conj()).map_err(|e| e.to_string())?;
        let scale = f.norm().max(1.0);
        erf_worst = erf_worst.max((odd + f).norm() / scale).max((conj - f.conj()).norm() / scale);
    }
    pass_if(
        bessel_worst <= 1e-8 && erf_worst <= 1e-12,
        format!("Bessel worst {bessel_worst:.1e} (n <= 30, x <= 200); erf symmetry worst {erf_worst:.1e}"),
    )
}

fn main() -> ExitCode {
    let setup = LinkSetup::default();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {id:>2} {name}: {detail} [{secs:.1} s]");
    };
    report(1, "cross-talk row normalization", &mut subset_renormalization);
    report(2, "soft eigenvalues at D_f = 2", &mut eigenvalue_algebra);
    report(3, "far-field eigenvalue", &mut far_field_limit);
    report(4, "capacity slope", &mut capacity_slope);
    report(5, "azimuthal orthogonality", &mut azimuthal_orthogonality);
    report(6, "power conservation", &mut power_conservation);
    report(7, "ideal BB84 optimum", &mut ideal_bb84);
    report(8, "multiplexing gain band", &mut || multiplexing_gain(&setup));
    let start = Instant::now();
    let table = run_sweep(&setup);
    println!("# range sweep for 9 and 11: {:.1} s", start.elapsed().as_secs_f64());
    report(9, "OGBA vs LG gap", &mut || ogba_gap(&table));
    report(10, "Fresnel oracles", &mut fresnel_oracles);
    report(11, "pixel size trend", &mut || trend(&table));
    report(12, "Bessel and erf identities", &mut special_function_identities);
    println!("acceptance: {} of 12 criteria failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
