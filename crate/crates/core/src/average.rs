//! Averaged linear closed loop.
//!
//! Along the average loop `Ĝ_av = q̃_av`, so only `Ĝ_av` is carried. The loop is
//! integrated in the original time `t`, where `dĜ_av/dt = (A − BK)Ĝ_av − BK·e_av + Δ̄`.
//! The oscillatory zero-mean parts of `A(t)`, `B(t)`, `Δ(t)` are not modeled.

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, BesselOrder};
use crate::error::{Error, Result};
use crate::estimator::GradientEstimate;
use crate::integrate::rk4_step;
use crate::linalg::{mat_mul, mat_sub, mat_vec, norm, vadd, vsub, Mat3, Vec3};
use crate::real::Real;
use crate::trigger::{Event, GainMatrix, TriggerConstants, TriggerState};
use crate::vehicle::DitherParams;

/// Constant matrices of the averaged error dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageModel<T> {
    pub a: Mat3<T>,
    pub b: [[T; 2]; 3],
    pub delta_bar: Vec3<T>,
    /// Dither period `2π/ω3`.
    pub period: T,
}

pub fn build_average_matrices<T: Real>(theta_star: T, d: &DitherParams<T>) -> Result<AverageModel<T>> {
    let j0 = bessel_j(BesselOrder::ZERO, d.a3)?;
    let j2 = bessel_j(BesselOrder::TWO, d.a3)?;
    let r = T::FRAC_1_SQRT_2();
    let plus = (T::two() * theta_star + T::FRAC_PI_4()).cos();
    let minus = (T::two() * theta_star - T::FRAC_PI_4()).cos();
    let drift = r * d.a1 * d.omega3 * j2;
    let z = T::zero();

    let a = [[z, z, drift * plus], [z, z, drift * minus], [z, z, z]];
    let b = [
        [T::half() + r * minus * j0, z],
        [T::half() - r * plus * j0, z],
        [z, T::one()],
    ];
    let delta_bar = [drift * minus, -(drift * minus), z];
    Ok(AverageModel { a, b, delta_bar, period: d.period() })
}

impl<T: Real> AverageModel<T> {
    /// `B·K` (3×3).
    pub fn bk(&self, k: &GainMatrix<T>) -> Mat3<T> {
        mat_mul(&self.b, &k.0)
    }

    /// `A − B·K`.
    pub fn closed_loop(&self, k: &GainMatrix<T>) -> Mat3<T> {
        mat_sub(&self.a, &self.bk(k))
    }

    /// Structural zero pattern of `A`, `B` and `Δ̄`.
    pub fn has_expected_structure(&self) -> bool {
        let z = T::zero();
        let a_ok = (0..3).all(|i| (0..3).all(|j| (j == 2 && i < 2) || self.a[i][j] == z));
        let b_ok = self.b[0][1] == z && self.b[1][1] == z && self.b[2][1] == T::one() && self.b[2][0] == z;
        let d_ok = self.delta_bar[1] == -self.delta_bar[0] && self.delta_bar[2] == z;
        a_ok && b_ok && d_ok
    }
}

/// `(‖Δ̄‖, a1·ω3·|J2(a3)|)`; the first never exceeds the second.
pub fn delta_bar_norm_bound<T: Real>(model: &AverageModel<T>, d: &DitherParams<T>) -> Result<(T, T)> {
    let bound = d.a1 * d.omega3 * bessel_j(BesselOrder::TWO, d.a3)?.abs();
    Ok((norm(&model.delta_bar), bound))
}

/// `(A − BK)Ĝ_av − BK·e_av + Δ̄`.
pub fn average_derivative<T: Real>(
    g_av: &Vec3<T>,
    e_av: &Vec3<T>,
    model: &AverageModel<T>,
    k: &GainMatrix<T>,
) -> Vec3<T> {
    let acl = model.closed_loop(k);
    let bk = model.bk(k);
    vadd(&vsub(&mat_vec(&acl, g_av), &mat_vec(&bk, e_av)), &model.delta_bar)
}

/// How the average loop updates its control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AverageControl {
    /// Average static trigger with zero-order hold.
    Triggered,
    /// `u = −K·Ĝ_av` refreshed at every grid sample.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageSample<T> {
    pub t: T,
    pub g: Vec3<T>,
    /// Error after this sample's trigger decision (zero on event samples).
    pub e: Vec3<T>,
    /// Trigger value before any latch at this sample.
    pub xi: T,
    /// Control held over `[t, t + dt)`.
    pub u: [T; 2],
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageTrace<T> {
    pub dt: T,
    pub samples: Vec<AverageSample<T>>,
    pub events: Vec<Event<T>>,
}

impl<T: Real> AverageTrace<T> {
    pub fn event_times(&self) -> Vec<T> {
        self.events.iter().map(|e| e.time).collect()
    }
}

/// Number of grid steps for a horizon.
pub(crate) fn step_count<T: Real>(dt: T, t_final: T) -> Result<usize> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(Error::invalid("run.dt", "must be finite and > 0"));
    }
    if !(t_final.is_finite() && t_final > T::zero()) {
        return Err(Error::invalid("run.t_final", "must be finite and > 0"));
    }
    (t_final / dt)
        .round()
        .to_usize()
        .filter(|n| *n >= 1)
        .ok_or_else(|| Error::invalid("run.t_final", "must be at least one step"))
}

/// Integrates the average loop on the grid `t_i = i·dt`, `i = 0..=round(t_final/dt)`.
pub fn run_average_loop<T: Real>(
    model: &AverageModel<T>,
    k: &GainMatrix<T>,
    c: &TriggerConstants<T>,
    g0: Vec3<T>,
    dt: T,
    t_final: T,
    control: AverageControl,
) -> Result<AverageTrace<T>> {
    let n = step_count(dt, t_final)?;
    let mut g = g0;
    let mut trig = TriggerState::start(T::zero(), GradientEstimate(g0), k);
    let mut samples = Vec::with_capacity(n + 1);

    for i in 0..=n {
        let t = T::lit(i as f64) * dt;
        let current = GradientEstimate(g);
        let (xi, e, event) = if i == 0 {
            (crate::trigger::trigger_value(&current, &[T::zero(); 3], c), [T::zero(); 3], true)
        } else if i == n {
            let e = crate::trigger::error_vector(trig.held_g(), &current);
            (crate::trigger::trigger_value(&current, &e, c), e, false)
        } else {
            match control {
                AverageControl::Triggered => {
                    let s = trig.step(t, current, c, k)?;
                    (s.xi, s.error, s.fired)
                }
                AverageControl::Continuous => {
                    let e = crate::trigger::error_vector(trig.held_g(), &current);
                    let xi = crate::trigger::trigger_value(&current, &e, c);
                    trig.force_event(t, current, k)?;
                    (xi, [T::zero(); 3], true)
                }
            }
        };
        let u = trig.held_u();
        samples.push(AverageSample { t, g, e, xi, u, event });
        if i == n {
            break;
        }
        let bu = mat_vec(&model.b, &u);
        g = rk4_step(
            |_, x: &Vec3<T>| vadd(&vadd(&mat_vec(&model.a, x), &bu), &model.delta_bar),
            t,
            &g,
            dt,
        )?;
    }

    Ok(AverageTrace { dt, samples, events: trig.into_events() })
}
