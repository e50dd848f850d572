//! Bessel functions of the first kind, `J_m(x)`, for integer order.
//!
//! Two independent routes: the power series (primary) and the integral
//! representation `J_m(x) = (1/2π) ∫₀^{2π} cos(mτ − x sin τ) dτ` evaluated by
//! composite Simpson over one full period (cross-check).

use crate::error::{Error, Result};
use crate::real::Real;

/// Non-negative integer order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BesselOrder(pub u32);

impl BesselOrder {
    pub const ZERO: BesselOrder = BesselOrder(0);
    pub const TWO: BesselOrder = BesselOrder(2);
}

impl From<u32> for BesselOrder {
    fn from(m: u32) -> Self {
        BesselOrder(m)
    }
}

/// Simpson panels for the quadrature route (even).
pub const QUADRATURE_PANELS: usize = 4096;

const MAX_SERIES_TERMS: usize = 300;

fn check_arg<T: Real>(x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteArgument(x.to_f64().unwrap_or(f64::NAN)))
    }
}

/// `J_m(x)` by the power series `Σ_k (−1)^k (x/2)^{2k+m} / (k!(k+m)!)`.
///
/// Accurate to ~1e-13 absolute for `|x| ≤ 10` in `f64`.
pub fn bessel_j<T: Real>(m: BesselOrder, x: T) -> Result<T> {
    check_arg(x)?;
    let half_x = T::half() * x;
    let mut term = T::one();
    for i in 1..=m.0 {
        term = term * half_x / T::lit(f64::from(i));
    }
    if term == T::zero() {
        return Ok(T::zero());
    }
    let q = half_x * half_x;
    let order = T::lit(f64::from(m.0));
    let mut sum = term;
    for k in 1..MAX_SERIES_TERMS {
        let kf = T::lit(k as f64);
        term = -term * q / (kf * (kf + order));
        sum = sum + term;
        if kf > half_x.abs() && term.abs() <= T::epsilon() * sum.abs().max(T::min_positive_value()) {
            break;
        }
    }
    Ok(sum)
}

/// `J_m(x)` from the integral representation by composite Simpson.
pub fn bessel_j_quadrature<T: Real>(m: BesselOrder, x: T) -> Result<T> {
    check_arg(x)?;
    let n = QUADRATURE_PANELS;
    let two_pi = T::two() * T::PI();
    let h = two_pi / T::lit(n as f64);
    let order = T::lit(f64::from(m.0));
    let f = |i: usize| {
        let tau = h * T::lit(i as f64);
        (order * tau - x * tau.sin()).cos()
    };
    let mut acc = f(0) + f(n);
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::two() };
        acc = acc + w * f(i);
    }
    Ok(acc * h / T::lit(3.0) / two_pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: direct power series with explicit factorials.
    fn series_oracle(m: u32, x: f64) -> f64 {
        let fact = |n: u32| (1..=n).fold(1.0f64, |a, i| a * f64::from(i));
        (0..30)
            .map(|k: u32| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * (x / 2.0).powi((2 * k + m) as i32) / (fact(k) * fact(k + m))
            })
            .sum()
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(BesselOrder(0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(BesselOrder(2), 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bessel_j_quadrature(BesselOrder(0), 0.0).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn frozen_values_at_half() {
        // from series_oracle
        assert_abs_diff_eq!(series_oracle(0, 0.5), 0.9384698072, epsilon = 1e-10);
        assert_abs_diff_eq!(series_oracle(2, 0.5), 0.0306040235, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j(BesselOrder(0), 0.5).unwrap(), 0.9384698072, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j(BesselOrder(2), 0.5).unwrap(), 0.0306040235, epsilon = 1e-10);
        assert_abs_diff_eq!(
            bessel_j_quadrature(BesselOrder(0), 0.5).unwrap(),
            0.9384698072,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            bessel_j_quadrature(BesselOrder(2), 0.5).unwrap(),
            0.0306040235,
            epsilon = 1e-10
        );
    }

    #[test]
    fn series_matches_factorial_oracle() {
        for m in 0..=4 {
            for i in -20..=20 {
                let x = 0.5 * f64::from(i);
                let got = bessel_j(BesselOrder(m), x).unwrap();
                assert_abs_diff_eq!(got, series_oracle(m, x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(bessel_j(BesselOrder(0), f64::NAN), Err(Error::NonFiniteArgument(_))));
        assert!(bessel_j_quadrature(BesselOrder(1), f64::INFINITY).is_err());
    }

    #[test]
    fn recurrence() {
        for m in 1..=3u32 {
            for &x in &[0.1, 0.5, 1.0, 2.0] {
                let lhs = bessel_j(BesselOrder(m - 1), x).unwrap() + bessel_j(BesselOrder(m + 1), x).unwrap();
                let rhs = 2.0 * f64::from(m) / x * bessel_j(BesselOrder(m), x).unwrap();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn parity() {
        for m in 0..=4u32 {
            for &x in &[0.3, 1.7, 4.2, 9.5] {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert_abs_diff_eq!(
                    bessel_j(BesselOrder(m), -x).unwrap(),
                    sign * bessel_j(BesselOrder(m), x).unwrap(),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn routes_agree_on_grid() {
        for m in 0..=4u32 {
            for i in -50..=50 {
                let x = 0.1 * f64::from(i);
                let a = bessel_j(BesselOrder(m), x).unwrap();
                let b = bessel_j_quadrature(BesselOrder(m), x).unwrap();
                assert!((a - b).abs() <= 1e-10, "m={m} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn jacobi_anger_expansion() {
        // cos(a sin φ) = J0(a) + 2 Σ J_{2m}(a) cos(2mφ); sin(a sin φ) = 2 Σ J_{2m+1}(a) sin((2m+1)φ)
        let a = 0.5;
        for i in 0..16 {
            let phi = 0.4 * f64::from(i);
            let mut c = bessel_j(BesselOrder(0), a).unwrap();
            let mut s = 0.0;
            for m in 1..8u32 {
                c += 2.0 * bessel_j(BesselOrder(2 * m), a).unwrap() * (f64::from(2 * m) * phi).cos();
            }
            for m in 0..8u32 {
                s += 2.0 * bessel_j(BesselOrder(2 * m + 1), a).unwrap() * (f64::from(2 * m + 1) * phi).sin();
            }
            assert_abs_diff_eq!(c, (a * phi.sin()).cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(s, (a * phi.sin()).sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn wide_argument_accuracy() {
        // J0(10), J1(10) reference values
        assert_abs_diff_eq!(bessel_j(BesselOrder(0), 10.0).unwrap(), -0.245_935_764_451_348_3, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j(BesselOrder(1), 10.0).unwrap(), 0.043_472_746_168_861_44, epsilon = 1e-12);
    }
}
