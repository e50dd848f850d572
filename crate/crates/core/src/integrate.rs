//! Fixed-step classical Runge–Kutta.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, vadd, vscale};
use crate::real::Real;

/// One RK4 step of `ẋ = f(t, x)` from `t` to `t + dt`.
///
/// Inputs held by the caller (the ZOH control) stay constant over the step.
/// A non-finite result aborts with [`Error::NonFiniteState`] at `t + dt`.
pub fn rk4_step<T, F, const N: usize>(f: F, t: T, x: &[T; N], dt: T) -> Result<[T; N]>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let half = T::half() * dt;
    let k1 = f(t, x);
    let k2 = f(t + half, &vadd(x, &vscale(half, &k1)));
    let k3 = f(t + half, &vadd(x, &vscale(half, &k2)));
    let k4 = f(t + dt, &vadd(x, &vscale(dt, &k3)));
    let two = T::two();
    let incr: [T; N] = std::array::from_fn(|i| k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    let next = vadd(x, &vscale(dt / T::lit(6.0), &incr));
    if all_finite(&next) {
        Ok(next)
    } else {
        Err(Error::NonFiniteState { t: (t + dt).to_f64().unwrap_or(f64::NAN) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_rate_is_exact() {
        let x = rk4_step(|_, _: &[f64; 1]| [1.0], 0.0, &[0.0], 0.1).unwrap();
        assert_eq!(x[0], 0.1);
    }

    #[test]
    fn exponential_growth() {
        let x = rk4_step(|_, x: &[f64; 1]| [x[0]], 0.0, &[1.0], 0.1).unwrap();
        assert_abs_diff_eq!(x[0], 1.105170917, epsilon = 1e-7);
    }

    #[test]
    fn zero_derivative_leaves_state_untouched() {
        let start = [0.1 + 0.2, -7.3e-9, 1e300];
        let x = rk4_step(|_, _: &[f64; 3]| [0.0; 3], 3.0, &start, 0.25).unwrap();
        assert_eq!(x, start);
    }

    #[test]
    fn blow_up_is_reported() {
        let err = rk4_step(|_, x: &[f64; 1]| [x[0] * x[0] * 1e300], 1.0, &[1e10], 1.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { t } if t == 2.0));
    }

    #[test]
    fn fourth_order_convergence() {
        // ẋ = cos t on [0, 1]; halving dt cuts the error by ~16
        let run = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut x = [0.0];
            for i in 0..n {
                x = rk4_step(|t, _: &[f64; 1]| [f64::cos(t) * (1.0 + t)], i as f64 * dt, &x, dt).unwrap();
            }
            (x[0] - (1.0f64.sin() * 2.0 + 1.0f64.cos() - 1.0)).abs()
        };
        let ratio = run(10) / run(20);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }
}
