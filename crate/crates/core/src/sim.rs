//! Fixed-grid closed-loop simulation.
//!
//! Every run samples the grid `t_i = i·dt`, `i = 0..=N` with `N = round(t_final/dt)`.
//! At each sample below `N` the measurement is demodulated, the update rule of the
//! scenario's mode decides whether to latch a new control, and the held control
//! is applied over `[t_i, t_{i+1})` with one RK4 step. The terminal sample is
//! recorded but never latches, so `num_events ≤ num_steps = N`.

use serde::{Deserialize, Serialize};

use crate::analysis::{averaging_error, TheoryReport};
use crate::average::{build_average_matrices, run_average_loop, AverageControl};
use crate::error::{Error, Result};
use crate::estimator::{demodulation_vector, gradient_estimate, GradientEstimate};
use crate::integrate::rk4_step;
use crate::linalg::{vadd, vsub, Vec3};
use crate::scenario::{Mode, Scenario};
use crate::trigger::{error_vector, trigger_value, Event, TriggerState};
use crate::vehicle::{dither_velocities, estimator_pose, state_derivative, VehicleState};

/// Which loop produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    Full,
    Average,
}

/// One grid sample. `u` is the control held over `[t, t + dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub xhat: f64,
    pub yhat: f64,
    pub thetahat: f64,
    pub q: f64,
    pub g: [f64; 3],
    pub u: [f64; 2],
    pub xi: f64,
    pub event: bool,
}

impl TraceRow {
    pub fn pose(&self) -> VehicleState<f64> {
        VehicleState::new(self.x, self.y, self.theta)
    }

    pub fn estimator_pose(&self) -> Vec3<f64> {
        [self.xhat, self.yhat, self.thetahat]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub system: System,
    pub dt: f64,
    pub rows: Vec<TraceRow>,
    pub events: Vec<Event<f64>>,
}

impl SimulationTrace {
    /// `q̂ − q*` on every row.
    pub fn estimation_errors(&self, s: &Scenario) -> Vec<(f64, Vec3<f64>)> {
        let star = s.field.maximizer().to_array();
        self.rows.iter().map(|r| (r.t, vsub(&r.estimator_pose(), &star))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub num_steps: usize,
    pub num_events: usize,
    pub min_inter_event: Option<f64>,
    pub mean_inter_event: Option<f64>,
    /// `‖q(t_f) − q*‖` over `(x, y, θ)`, heading unwrapped.
    pub final_error_norm: f64,
    /// `‖(x, y)(t_f) − (x*, y*)‖`.
    pub final_position_error: f64,
    /// `|θ(t_f) − θ*|` wrapped to `[0, π]`.
    pub final_heading_error: f64,
    pub theory: Option<TheoryReport>,
}

impl RunMetrics {
    fn new(s: &Scenario, events: &[Event<f64>], last: &VehicleState<f64>) -> Self {
        // gaps in whole grid steps, so a one-step gap is exactly dt
        let index = |t: f64| (t / s.dt).round();
        let gaps: Vec<f64> = events.windows(2).map(|w| (index(w[1].time) - index(w[0].time)) * s.dt).collect();
        let min_inter_event = gaps.iter().copied().reduce(f64::min);
        let mean_inter_event = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
        let off = s.field.offset(last);
        RunMetrics {
            num_steps: s.num_steps(),
            num_events: events.len(),
            min_inter_event,
            mean_inter_event,
            final_error_norm: crate::linalg::norm(&off),
            final_position_error: off[0].hypot(off[1]),
            final_heading_error: wrap_angle(off[2]).abs(),
            theory: None,
        }
    }
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Runs the scenario and keeps the whole trace.
pub fn run_simulation(s: &Scenario) -> Result<(SimulationTrace, RunMetrics)> {
    let mut rows = Vec::with_capacity(s.num_steps() + 1);
    let (events, metrics) = run_simulation_with(s, |r| rows.push(*r))?;
    let system = if s.mode == Mode::Average { System::Average } else { System::Full };
    Ok((SimulationTrace { system, dt: s.dt, rows, events }, metrics))
}

/// Runs the scenario, handing each row to `sink` instead of storing it.
pub fn run_simulation_with<F: FnMut(&TraceRow)>(
    s: &Scenario,
    sink: F,
) -> Result<(Vec<Event<f64>>, RunMetrics)> {
    let s = s.clone().validate()?;
    let (events, last) = match s.mode {
        Mode::Average => run_average(&s, sink)?,
        Mode::Full => run_full(&s, None, sink)?,
        Mode::ContinuousControl => run_full(&s, Some(1), sink)?,
        Mode::SampledData { period } => {
            let every = ((period / s.dt).round() as usize).max(1);
            run_full(&s, Some(every), sink)?
        }
    };
    let metrics = RunMetrics::new(&s, &events, &last);
    log::info!(
        "{} run: {} steps, {} events, final error {:.6}",
        s.mode.name(),
        metrics.num_steps,
        metrics.num_events,
        metrics.final_error_norm
    );
    Ok((events, metrics))
}

/// Full nonlinear loop. `periodic = Some(k)` latches every `k` samples instead
/// of consulting the trigger.
fn run_full<F: FnMut(&TraceRow)>(
    s: &Scenario,
    periodic: Option<usize>,
    mut sink: F,
) -> Result<(Vec<Event<f64>>, VehicleState<f64>)> {
    let n = s.num_steps();
    let (d, k, c) = (s.dithers, s.gain, s.trigger);
    let measure = |q: &Vec3<f64>, t: f64| -> Result<(f64, GradientEstimate<f64>)> {
        let y = s.field.evaluate(&VehicleState::from_array(*q));
        Ok((y, gradient_estimate(&demodulation_vector(&d, t)?, y)))
    };

    let mut q = s.initial.to_array();
    let (_, g0) = measure(&q, 0.0)?;
    let mut trig = TriggerState::start(0.0, g0, &k);

    for i in 0..=n {
        let t = i as f64 * s.dt;
        let (y, g) = measure(&q, t)?;
        let (xi, event) = if i == 0 {
            (trigger_value(&g, &[0.0; 3], &c), true)
        } else if i == n {
            (trigger_value(&g, &error_vector(trig.held_g(), &g), &c), false)
        } else if let Some(every) = periodic {
            let xi = trigger_value(&g, &error_vector(trig.held_g(), &g), &c);
            if i % every == 0 {
                trig.force_event(t, g, &k)?;
                (xi, true)
            } else {
                (xi, false)
            }
        } else {
            let step = trig.step(t, g, &c, &k)?;
            (step.xi, step.fired)
        };

        let u = trig.held_u();
        let pose = VehicleState::from_array(q);
        let qhat = estimator_pose(&pose, &d, t);
        sink(&TraceRow {
            t,
            x: q[0],
            y: q[1],
            theta: q[2],
            xhat: qhat[0],
            yhat: qhat[1],
            thetahat: qhat[2],
            q: y,
            g: g.0,
            u,
            xi,
            event,
        });
        if i == n {
            break;
        }
        q = rk4_step(
            |tt, x: &Vec3<f64>| {
                let st = VehicleState::from_array(*x);
                state_derivative(&st, dither_velocities(&d, tt, st.theta, u)).to_array()
            },
            t,
            &q,
            s.dt,
        )?;
    }
    Ok((trig.into_events(), VehicleState::from_array(q)))
}

/// Averaged loop; poses are reconstructed as `q = q* + Ĝ_av + S(t)`.
fn run_average<F: FnMut(&TraceRow)>(s: &Scenario, mut sink: F) -> Result<(Vec<Event<f64>>, VehicleState<f64>)> {
    let model = build_average_matrices(s.field.theta_star, &s.dithers)?;
    let star = s.field.maximizer().to_array();
    let g0 = vsub(&estimator_pose(&s.initial, &s.dithers, 0.0), &star);
    let trace = run_average_loop(&model, &s.gain, &s.trigger, g0, s.dt, s.t_final, AverageControl::Triggered)?;
    let mut last = s.initial;
    for smp in &trace.samples {
        let qhat = vadd(&star, &smp.g);
        let pose = VehicleState::from_array(vadd(&qhat, &s.dithers.dither_vector(smp.t)));
        last = pose;
        sink(&TraceRow {
            t: smp.t,
            x: pose.x,
            y: pose.y,
            theta: pose.theta,
            xhat: qhat[0],
            yhat: qhat[1],
            thetahat: qhat[2],
            q: s.field.evaluate(&pose),
            g: smp.g,
            u: smp.u,
            xi: smp.xi,
            event: smp.event,
        });
    }
    Ok((trace.events, last))
}

/// Outcome of [`check_trigger_soundness`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SoundnessReport {
    /// `L_Ξ·dt`, with `L_Ξ` the largest `|ΔΞ|/dt` between adjacent non-event samples.
    pub eps_grid: f64,
    /// Non-event samples before the terminal one with `Ξ < −eps_grid`.
    pub between_violations: usize,
    /// Events after the first with `Ξ ≥ 0`.
    pub event_violations: usize,
    /// Event samples whose latched estimate differs from the row (`e ≠ 0`).
    pub latch_violations: usize,
    /// Rows whose control differs bitwise from the last event's.
    pub hold_violations: usize,
    /// Event flags that do not match the event log.
    pub flag_mismatches: usize,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.between_violations == 0
            && self.event_violations == 0
            && self.latch_violations == 0
            && self.hold_violations == 0
            && self.flag_mismatches == 0
    }
}

/// Checks event semantics along a trace. `triggered` selects whether the
/// static-trigger sign conditions apply (they do not for periodic updates).
pub fn check_trigger_soundness(trace: &SimulationTrace, triggered: bool) -> SoundnessReport {
    let rows = &trace.rows;
    let mut rep = SoundnessReport::default();

    let flagged: Vec<&TraceRow> = rows.iter().filter(|r| r.event).collect();
    rep.flag_mismatches = flagged.len().abs_diff(trace.events.len())
        + flagged.iter().zip(&trace.events).filter(|(r, e)| r.t.to_bits() != e.time.to_bits()).count();

    let lipschitz = rows
        .windows(2)
        .filter(|w| !w[0].event && !w[1].event)
        .map(|w| (w[1].xi - w[0].xi).abs() / trace.dt)
        .fold(0.0, f64::max);
    rep.eps_grid = lipschitz * trace.dt;

    let mut held: Option<&Event<f64>> = None;
    let mut next = trace.events.iter().peekable();
    let last_index = rows.len().saturating_sub(1);
    for (i, r) in rows.iter().enumerate() {
        if r.event {
            let ev = next.next();
            if let Some(ev) = ev {
                let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
                if !same(&ev.latched.0, &r.g) {
                    rep.latch_violations += 1;
                }
                if triggered && held.is_some() && !(r.xi < 0.0) {
                    rep.event_violations += 1;
                }
            }
            held = ev.or(held);
        } else if triggered && i < last_index && r.xi < -rep.eps_grid {
            rep.between_violations += 1;
        }
        if let Some(ev) = held {
            if ev.control.iter().zip(&r.u).any(|(a, b)| a.to_bits() != b.to_bits()) {
                rep.hold_violations += 1;
            }
        }
    }
    rep
}

/// Averaging error of one base frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub omega3: f64,
    pub sup_error: f64,
    pub full_events: usize,
    pub average_events: usize,
}

/// For each base frequency, runs the full and averaged loops (dither products
/// `ai·ωi` held fixed) and reports `sup_t ‖q̃(t) − q̃_av(t)‖`.
///
/// Independent runs execute on scoped threads.
pub fn compare(s: &Scenario, omegas: &[f64]) -> Result<Vec<CompareResult>> {
    let scenarios: Vec<Scenario> = omegas.iter().map(|&w| s.with_base_frequency(w)).collect::<Result<_>>()?;
    let star = s.field.maximizer().to_array();

    let run = |sc: &Scenario, mode: Mode| -> Result<(Vec<(f64, Vec3<f64>)>, usize)> {
        let mut sc = sc.clone();
        sc.mode = mode;
        let mut err = Vec::with_capacity(sc.num_steps() + 1);
        let (events, _) = run_simulation_with(&sc, |r| err.push((r.t, vsub(&r.estimator_pose(), &star))))?;
        Ok((err, events.len()))
    };

    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|sc| {
                let full = scope.spawn(move || run(sc, Mode::Full));
                let avg = scope.spawn(move || run(sc, Mode::Average));
                (sc.dithers.omega3, full, avg)
            })
            .collect();
        handles
            .into_iter()
            .map(|(omega3, full, avg)| {
                let (f, full_events) = full.join().map_err(|_| Error::invalid("compare", "worker panicked"))??;
                let (a, average_events) = avg.join().map_err(|_| Error::invalid("compare", "worker panicked"))??;
                Ok(CompareResult { omega3, sup_error: averaging_error(&f, &a)?, full_events, average_events })
            })
            .collect()
    })
}
