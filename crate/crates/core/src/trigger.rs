//! Static event trigger and the zero-order-hold control law it gates.
//!
//! The trigger is monitored on the integration grid: `Ξ` is evaluated once per
//! sample and an event fires at the first sample after the last event where
//! `Ξ < 0`. `Ξ = 0` does not fire.

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, BesselOrder};
use crate::error::{Error, Result};
use crate::estimator::GradientEstimate;
use crate::linalg::{mat_vec, norm, vsub, Vec3};
use crate::real::Real;
use crate::vehicle::DitherParams;

/// `σ`, `α` and the constant bias `a1·ω3·|J2(a3)|` of the static trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConstants<T> {
    pub sigma: T,
    pub alpha: T,
    pub bias: T,
}

impl<T: Real> TriggerConstants<T> {
    pub fn new(sigma: T, alpha: T, bias: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma < T::one()) {
            return Err(Error::invalid("trigger.sigma", format!("{sigma} is outside (0, 1)")));
        }
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(Error::invalid("trigger.alpha", format!("{alpha} must be finite and > 0")));
        }
        if !(bias.is_finite() && bias >= T::zero()) {
            return Err(Error::invalid("trigger.bias", format!("{bias} must be finite and >= 0")));
        }
        Ok(Self { sigma, alpha, bias })
    }

    /// Derives the bias from the dithers.
    pub fn from_dithers(sigma: T, alpha: T, d: &DitherParams<T>) -> Result<Self> {
        Self::new(sigma, alpha, trigger_bias(d)?)
    }

    /// Radius `2(α/σ)·bias` of the ball the trigger cannot certify decay inside.
    pub fn floor_radius(&self) -> T {
        T::two() * self.alpha / self.sigma * self.bias
    }
}

/// `a1·ω3·|J2(a3)|`.
pub fn trigger_bias<T: Real>(d: &DitherParams<T>) -> Result<T> {
    Ok(d.a1 * d.omega3 * bessel_j(BesselOrder::TWO, d.a3)?.abs())
}

/// State-feedback gain `K` (2×3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMatrix<T>(pub [[T; 3]; 2]);

impl<T: Real> GainMatrix<T> {
    pub fn new(rows: [[T; 3]; 2]) -> Result<Self> {
        if rows.iter().flatten().all(|k| k.is_finite()) {
            Ok(GainMatrix(rows))
        } else {
            Err(Error::invalid("gain", "entries must be finite"))
        }
    }

    pub fn rows(&self) -> &[[T; 3]; 2] {
        &self.0
    }
}

/// `e = Ĝ(t_k) − Ĝ(t)`.
pub fn error_vector<T: Real>(held: &GradientEstimate<T>, current: &GradientEstimate<T>) -> Vec3<T> {
    vsub(&held.0, &current.0)
}

/// `Ξ = σ‖Ĝ‖ − α(‖e‖ + bias)`.
pub fn trigger_value<T: Real>(current: &GradientEstimate<T>, e: &Vec3<T>, c: &TriggerConstants<T>) -> T {
    c.sigma * norm(&current.0) - c.alpha * (norm(e) + c.bias)
}

/// `u = −K·Ĝ`.
pub fn control_input<T: Real>(k: &GainMatrix<T>, latched: &GradientEstimate<T>) -> [T; 2] {
    let ku = mat_vec(&k.0, &latched.0);
    [-ku[0], -ku[1]]
}

/// One logged control update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub time: T,
    pub latched: GradientEstimate<T>,
    pub control: [T; 2],
}

/// Outcome of one trigger evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerStep<T> {
    /// `Ξ` evaluated with the error before any latch.
    pub xi: T,
    /// Error after the step: zero if an event fired.
    pub error: Vec3<T>,
    pub fired: bool,
}

/// Held sample, held control and the append-only event log.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState<T> {
    held_g: GradientEstimate<T>,
    held_u: [T; 2],
    last_event_time: T,
    events: Vec<Event<T>>,
}

impl<T: Real> TriggerState<T> {
    /// Initial event at `t0` with `u0 = −K·Ĝ(t0)`.
    pub fn start(t0: T, g0: GradientEstimate<T>, k: &GainMatrix<T>) -> Self {
        let mut st = TriggerState {
            held_g: g0,
            held_u: [T::zero(); 2],
            last_event_time: t0,
            events: Vec::new(),
        };
        st.latch(t0, g0, k);
        st
    }

    fn latch(&mut self, t: T, g: GradientEstimate<T>, k: &GainMatrix<T>) {
        self.held_g = g;
        self.held_u = control_input(k, &g);
        self.last_event_time = t;
        self.events.push(Event { time: t, latched: g, control: self.held_u });
    }

    /// Latches `g` unconditionally (periodic or continuous update schedules).
    pub fn force_event(&mut self, t: T, g: GradientEstimate<T>, k: &GainMatrix<T>) -> Result<()> {
        self.check_time(t)?;
        if t == self.last_event_time {
            return Err(Error::NonMonotoneTime {
                t: t.to_f64().unwrap_or(f64::NAN),
                last: self.last_event_time.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.latch(t, g, k);
        Ok(())
    }

    fn check_time(&self, t: T) -> Result<()> {
        if t < self.last_event_time || !t.is_finite() {
            return Err(Error::NonMonotoneTime {
                t: t.to_f64().unwrap_or(f64::NAN),
                last: self.last_event_time.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Evaluates the static trigger at `t` and latches on `Ξ < 0`.
    ///
    /// Only times strictly after the last event can fire.
    pub fn step(
        &mut self,
        t: T,
        current: GradientEstimate<T>,
        c: &TriggerConstants<T>,
        k: &GainMatrix<T>,
    ) -> Result<TriggerStep<T>> {
        self.check_time(t)?;
        let e = error_vector(&self.held_g, &current);
        let xi = trigger_value(&current, &e, c);
        if xi < T::zero() && t > self.last_event_time {
            self.latch(t, current, k);
            Ok(TriggerStep { xi, error: error_vector(&self.held_g, &current), fired: true })
        } else {
            Ok(TriggerStep { xi, error: e, fired: false })
        }
    }

    pub fn held_g(&self) -> &GradientEstimate<T> {
        &self.held_g
    }

    pub fn held_u(&self) -> [T; 2] {
        self.held_u
    }

    pub fn last_event_time(&self) -> T {
        self.last_event_time
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event<T>> {
        self.events
    }
}
