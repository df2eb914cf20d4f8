//! Bessel functions of the first kind and integer order.

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `J_0(z), J_1(z), …, J_nmax(z)` from one Miller backward recurrence,
/// normalized with `J_0 + 2 Σ J_2k = 1`.
///
/// The recurrence starts above `max(nmax, |z|)` so it is stable for every
/// order returned. `z` must be finite.
pub fn bessel_j_orders(nmax: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    bessel_j_orders_into(z, &mut out);
    out
}

/// Fills `out[n] = J_n(z)` for `n < out.len()`.
pub fn bessel_j_orders_into(z: f64, out: &mut [f64]) {
    debug_assert!(z.is_finite());
    if out.is_empty() {
        return;
    }
    let nmax = out.len() - 1;
    let x = z.abs();
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }

    let top = nmax.max(x.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;

    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut current = 1.0; // J_k, arbitrary scale
    let mut sum = 2.0 * current; // m is even
    out.fill(0.0);

    for k in (1..=m).rev() {
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let order = k - 1;
        if order <= nmax {
            out[order] = current;
        }
        if order == 0 {
            sum += current;
        } else if order % 2 == 0 {
            sum += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            sum *= RESCALE_BY;
            if order <= nmax {
                for v in &mut out[order..] {
                    *v *= RESCALE_BY;
                }
            }
        }
    }

    let norm = 1.0 / sum;
    for v in out.iter_mut() {
        *v *= norm;
    }
    if z < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

/// `J_n(z)` for any integer order.
pub fn bessel_j(n: i32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain(format!("bessel_j: argument {z} is not finite")));
    }
    let order = n.unsigned_abs() as usize;
    let value = bessel_j_orders(order, z)[order];
    Ok(if n < 0 && order % 2 == 1 { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkern::quadrature::QuadratureSpec;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    /// J_n(z) = e^{inπ/2}/(2π) ∫_0^{2π} e^{inθ − iz cos θ} dθ, evaluated by quadrature.
    fn integral_representation(n: i32, z: f64) -> f64 {
        let spec = QuadratureSpec::new(1e-14, 1e-13, 4000).unwrap();
        let nf = n as f64;
        let breaks: Vec<f64> = (0..=16).map(|i| i as f64 * PI / 8.0).collect();
        let v = crate::mathkern::quadrature::integrate_with_breaks(
            |t: f64| Complex64::new(0.0, nf * t - z * t.cos()).exp(),
            &breaks,
            &spec,
        )
        .unwrap()
        .value;
        (Complex64::new(0.0, nf * PI / 2.0).exp() * v / (2.0 * PI)).re
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn order_one_at_two_matches_integral() {
        let direct = bessel_j(1, 2.0).unwrap();
        let oracle = integral_representation(1, 2.0);
        assert!((direct - oracle).abs() < 1e-10, "{direct} vs {oracle}");
        // reference value from a 30-digit evaluation
        assert!((direct - 0.576_724_807_756_873_4).abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0, 100.0, 0.019_985_850_304_223_122),
            (5, 0.001, 2.604_166_558_159_724_6e-19),
            (30, 12.5, 7.836_631_126_330_117e-10),
            (40, 75.0, -0.094_674_484_520_264_21),
            (2, -3.3, 0.478_031_686_450_545_9),
        ];
        for (n, z, expected) in cases {
            let got = bessel_j(n, z).unwrap();
            assert!(
                (got - expected).abs() <= 1e-13 * expected.abs().max(1e-3),
                "J_{n}({z}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn negative_order_and_argument_symmetry() {
        for n in 0..8 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let pos = bessel_j(n, 3.7).unwrap();
            assert_eq!(bessel_j(-n, 3.7).unwrap(), sign * pos);
            assert!((bessel_j(n, -3.7).unwrap() - sign * pos).abs() < 1e-16);
        }
    }

    #[test]
    fn matches_integral_representation_on_grid() {
        for n in -30..=30 {
            for i in 0..=20 {
                let z = -10.0 + i as f64;
                let direct = bessel_j(n, z).unwrap();
                let oracle = integral_representation(n, z);
                assert!(
                    (direct - oracle).abs() < 1e-8,
                    "J_{n}({z}): {direct} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn non_finite_argument_is_rejected() {
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(0, f64::INFINITY).is_err());
    }
}
