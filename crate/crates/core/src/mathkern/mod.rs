//! Special functions and quadrature used by the propagation and rate models.

pub mod bessel;
pub mod erf;
pub mod quadrature;

pub use bessel::{bessel_j, bessel_j_orders};
pub use erf::{erf_complex, erf_damped, erf_real, faddeeva_upper};
pub use quadrature::{quad_1d, quad_2d, QuadratureSpec, Rect};

use crate::error::{Error, Result};

/// Generalized Laguerre polynomial `L_p^α(x)` by the three-term recurrence.
pub fn laguerre_gen(p: i32, alpha: i32, x: f64) -> Result<f64> {
    if p < 0 {
        return Err(Error::domain(format!("laguerre_gen: degree {p} is negative")));
    }
    if alpha < 0 {
        return Err(Error::domain(format!("laguerre_gen: alpha {alpha} is negative")));
    }
    Ok(laguerre_unchecked(p as u32, alpha as f64, x))
}

pub(crate) fn laguerre_unchecked(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: i32, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("hermite: degree {n} is negative")));
    }
    Ok(hermite_unchecked(n as u32, x))
}

pub(crate) fn hermite_unchecked(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Binary entropy in bits, with `h2(0) = h2(1) = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("binary_entropy: {q} is not a probability")));
    }
    Ok(h2(q))
}

/// Binary entropy without the range check; arguments are clamped to `[0, 1]`.
pub(crate) fn h2(q: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(q) + term(1.0 - q)
}

/// `ln(n!)` by direct summation; exact enough for the orders used here.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn laguerre_low_orders() {
        for &x in &[-1.0, 0.0, 0.3, 7.5] {
            assert_eq!(laguerre_gen(0, 4, x).unwrap(), 1.0);
            assert_eq!(laguerre_gen(1, 0, x).unwrap(), 1.0 - x);
        }
    }

    #[test]
    fn laguerre_matches_explicit_expansion() {
        // L_2^1(x) = x²/2 - 3x + 3
        let x = 0.5;
        let oracle = x * x / 2.0 - 3.0 * x + 3.0;
        assert!((laguerre_gen(2, 1, x).unwrap() - oracle).abs() < 1e-15);
        // L_3^2(x) = -x³/6 + 5x²/2 - 10x + 10
        let x = 1.7;
        let oracle = -x * x * x / 6.0 + 2.5 * x * x - 10.0 * x + 10.0;
        assert!((laguerre_gen(3, 2, x).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn laguerre_rejects_negative_degree() {
        assert!(laguerre_gen(-1, 0, 1.0).is_err());
        assert!(laguerre_gen(1, -2, 1.0).is_err());
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0, 2.5).unwrap(), 1.0);
        assert_eq!(hermite(1, 2.5).unwrap(), 5.0);
        let x: f64 = 0.7;
        let oracle = 8.0 * x.powi(3) - 12.0 * x;
        assert!((hermite(3, x).unwrap() - oracle).abs() < 1e-14);
        assert!(hermite(-1, 0.0).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        let q: f64 = 0.11;
        let oracle = -q * q.log2() - (1.0 - q) * (1.0 - q).log2();
        let got = binary_entropy(q).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 0.4999).abs() < 1e-3);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric(q in 0.0f64..=1.0) {
            let a = binary_entropy(q).unwrap();
            let b = binary_entropy(1.0 - q).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn erf_conjugate_identity(u in -2.0f64..2.0, v in -2.0f64..2.0) {
            use num_complex::Complex64;
            let plus = erf_complex(Complex64::new(u, v)).unwrap();
            let minus = erf_complex(Complex64::new(u, -v)).unwrap();
            let lhs = plus + minus - Complex64::new(2.0 * plus.re, 0.0);
            prop_assert!(lhs.norm() < 1e-12);
        }
    }
}
