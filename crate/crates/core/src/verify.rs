//! Assembles a [`TheoryReport`] for a scenario.

use crate::analysis::{
    alpha_lower_bound, alpha_sufficient_bound, decay_envelope_check, decay_rate, dwell_time_bound,
    envelope_samples, hurwitz_check, lyapunov_derivative_violations, max_real_part, residual_scales,
    solve_lyapunov, OmegaError, TheoryReport,
};
use crate::average::{build_average_matrices, run_average_loop, AverageControl, AverageTrace};
use crate::error::Result;
use crate::linalg::{identity3, spectral_norm3, vsub};
use crate::scenario::Scenario;
use crate::sim::compare;
use crate::vehicle::estimator_pose;

/// Relative slack of the envelope and `V̇` checks.
pub const ENVELOPE_TOLERANCE: f64 = 0.05;

/// Average run used by the report: triggered loop from `q̂(0) − q*` over the scenario grid.
pub fn average_run(s: &Scenario) -> Result<AverageTrace<f64>> {
    let model = build_average_matrices(s.field.theta_star, &s.dithers)?;
    let g0 = vsub(&estimator_pose(&s.initial, &s.dithers, 0.0), &s.field.maximizer().to_array());
    run_average_loop(&model, &s.gain, &s.trigger, g0, s.dt, s.t_final, AverageControl::Triggered)
}

/// Checks Hurwitz stability, solves the Lyapunov equation with `Q = I`, evaluates
/// the `α` and dwell-time bounds, runs the averaged loop for the decay envelope
/// and, for each entry of `omegas`, the full-versus-average comparison.
pub fn theory_report(s: &Scenario, omegas: &[f64]) -> Result<TheoryReport> {
    let model = build_average_matrices(s.field.theta_star, &s.dithers)?;
    let acl = model.closed_loop(&s.gain);
    let bk = model.bk(&s.gain);
    let hurwitz = hurwitz_check(&acl);
    let tau_star = dwell_time_bound(s.trigger.sigma, spectral_norm3(&acl), spectral_norm3(&bk))?;
    let floor = s.trigger.floor_radius();

    let trace = average_run(s)?;
    let index = |t: f64| (t / s.dt).round();
    let min_inter_event = trace
        .events
        .windows(2)
        .map(|w| (index(w[1].time) - index(w[0].time)) * s.dt)
        .reduce(f64::min);

    let cert = if hurwitz { Some(solve_lyapunov(&acl, &identity3())?) } else { None };
    let alpha_min = cert.map(|c| alpha_lower_bound(&c, &acl));
    let rate = cert.map(|c| decay_rate(&c, s.trigger.sigma));
    let envelope_violations = cert.map(|c| {
        decay_envelope_check(&envelope_samples(&trace, &c), rate.unwrap_or(0.0), ENVELOPE_TOLERANCE, floor)
    });
    let derivative_violations =
        cert.map(|c| lyapunov_derivative_violations(&trace, &c, s.trigger.sigma, floor, ENVELOPE_TOLERANCE));

    let averaging_sup_error = if omegas.is_empty() {
        Vec::new()
    } else {
        compare(s, omegas)?
            .into_iter()
            .map(|c| OmegaError { omega3: c.omega3, sup_error: c.sup_error })
            .collect()
    };

    let (residual_scale_heading, residual_scale_norm) = residual_scales(&s.dithers.amplitudes());
    Ok(TheoryReport {
        hurwitz,
        max_real_eigenvalue: max_real_part(&acl),
        lyapunov_residual: cert.map(|c| c.residual),
        alpha: s.trigger.alpha,
        alpha_min,
        alpha_ok: alpha_min.map(|m| s.trigger.alpha >= m),
        alpha_sufficient: cert.map(|c| alpha_sufficient_bound(&c, &bk)),
        tau_star,
        min_inter_event,
        decay_rate: rate,
        trigger_floor: floor,
        envelope_violations,
        derivative_violations,
        residual_scale_heading,
        residual_scale_norm,
        averaging_sup_error,
    })
}
