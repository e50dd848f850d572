//! Numerical checks of the stability, dwell-time and averaging guarantees.

use serde::{Deserialize, Serialize};

use crate::average::AverageTrace;
use crate::error::{Error, Result};
use crate::linalg::{
    dot, eigenvalues3, is_symmetric, mat_add, mat_mul, mat_vec, max_abs, norm, solve_linear,
    spectral_norm3, sym_eigenvalues3, symmetrize, transpose, vsub, Mat3, Vec3,
};
use crate::real::Real;

/// Solution `P` of `AclᵀP + P·Acl = −Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCertificate<T> {
    pub p: Mat3<T>,
    pub q: Mat3<T>,
    /// Max-abs entry of `AclᵀP + P·Acl + Q`.
    pub residual: T,
}

impl<T: Real> LyapunovCertificate<T> {
    pub fn lambda_min_q(&self) -> T {
        sym_eigenvalues3(&self.q)[0]
    }

    pub fn lambda_max_p(&self) -> T {
        sym_eigenvalues3(&self.p)[2]
    }

    pub fn lambda_min_p(&self) -> T {
        sym_eigenvalues3(&self.p)[0]
    }

    /// `V = Ĝᵀ P Ĝ`.
    pub fn value(&self, g: &Vec3<T>) -> T {
        dot(g, &mat_vec(&self.p, g))
    }
}

/// Largest eigenvalue real part of `acl`.
pub fn max_real_part<T: Real>(acl: &Mat3<T>) -> T {
    eigenvalues3(acl)[2].re
}

/// All eigenvalue real parts below `−1e−9`.
pub fn hurwitz_check<T: Real>(acl: &Mat3<T>) -> bool {
    max_real_part(acl) < -T::lit(1e-9)
}

fn is_spd<T: Real>(m: &Mat3<T>) -> bool {
    let scale = max_abs(m).max(T::min_positive_value());
    is_symmetric(m, T::lit(1e-12) * scale) && sym_eigenvalues3(&symmetrize(m))[0] > T::zero()
}

fn lyapunov_residual<T: Real>(acl: &Mat3<T>, p: &Mat3<T>, q: &Mat3<T>) -> T {
    let lhs = mat_add(&mat_mul(&transpose(acl), p), &mat_mul(p, acl));
    max_abs(&mat_add(&lhs, q))
}

/// Solves `AclᵀP + P·Acl = −Q` through the vectorized 9×9 system.
pub fn solve_lyapunov<T: Real>(acl: &Mat3<T>, q: &Mat3<T>) -> Result<LyapunovCertificate<T>> {
    let max_re = max_real_part(acl);
    if !(max_re < -T::lit(1e-9)) {
        return Err(Error::NotHurwitz { max_re: max_re.to_f64().unwrap_or(f64::NAN) });
    }
    if !is_spd(q) {
        return Err(Error::NotPositiveDefinite);
    }

    // Unknown index 3i + j holds P[i][j]; row 3i + j is entry (i, j) of the equation.
    let mut m = [[T::zero(); 9]; 9];
    let mut rhs = [T::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            let row = 3 * i + j;
            for k in 0..3 {
                m[row][3 * k + j] = m[row][3 * k + j] + acl[k][i];
                m[row][3 * i + k] = m[row][3 * i + k] + acl[k][j];
            }
            rhs[row] = -q[i][j];
        }
    }
    let x = solve_linear(m, rhs).ok_or(Error::Singular { context: "Lyapunov solve" })?;
    let p = symmetrize(&std::array::from_fn(|i| std::array::from_fn(|j| x[3 * i + j])));

    let residual = lyapunov_residual(acl, &p, q);
    let limit = T::lit(1e-8) * spectral_norm3(q);
    if !(residual <= limit) {
        return Err(Error::Residual {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(sym_eigenvalues3(&p)[0] > T::zero()) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(LyapunovCertificate { p, q: *q, residual })
}

/// `2‖P·Acl‖₂ / λ_min(Q)`, the smallest `α` the stability argument admits.
pub fn alpha_lower_bound<T: Real>(cert: &LyapunovCertificate<T>, acl: &Mat3<T>) -> T {
    T::two() * spectral_norm3(&mat_mul(&cert.p, acl)) / cert.lambda_min_q()
}

/// `2·max(‖P·BK‖₂, ‖P‖₂) / λ_min(Q)`.
///
/// Bounding the cross terms `−2ĜᵀPBK·e` and `2ĜᵀPΔ̄` directly gives this
/// threshold; [`alpha_lower_bound`] bounds them through `P·Acl` instead.
pub fn alpha_sufficient_bound<T: Real>(cert: &LyapunovCertificate<T>, bk: &Mat3<T>) -> T {
    let pbk = spectral_norm3(&mat_mul(&cert.p, bk));
    T::two() * pbk.max(spectral_norm3(&cert.p)) / cert.lambda_min_q()
}

/// Minimum inter-event time `τ*` with the `O(1/ω)` corrections dropped.
///
/// `n = σ/2`, `m = 1/(2σ)`, `τ* = (m/n) / ((‖Acl‖ + ‖BK‖)(1 + √(m/n)))`.
pub fn dwell_time_bound<T: Real>(sigma: T, acl_norm: T, bk_norm: T) -> Result<T> {
    if !(sigma > T::zero() && sigma < T::one()) {
        return Err(Error::invalid("sigma", format!("{sigma} is outside (0, 1)")));
    }
    let total = acl_norm + bk_norm;
    if !(acl_norm.is_finite() && bk_norm.is_finite() && acl_norm >= T::zero() && bk_norm >= T::zero())
        || !(total > T::zero())
    {
        return Err(Error::invalid("norms", "must be finite, non-negative and not both zero"));
    }
    let n = T::half() * sigma;
    let m = T::one() / (T::two() * sigma);
    let ratio = m / n;
    Ok(ratio / (T::one() + ratio.sqrt()) / total)
}

/// `ρ = λ_min(Q)(1 − σ)/λ_max(P)`.
pub fn decay_rate<T: Real>(cert: &LyapunovCertificate<T>, sigma: T) -> T {
    cert.lambda_min_q() * (T::one() - sigma) / cert.lambda_max_p()
}

/// One point of a Lyapunov trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample<T> {
    pub t: T,
    pub v: T,
    pub g_norm: T,
}

/// `V_av` at every event of an average run, followed by the terminal sample.
///
/// The terminal segment is kept so a run that stops triggering while the
/// state grows is still tested against the envelope.
pub fn envelope_samples<T: Real>(trace: &AverageTrace<T>, cert: &LyapunovCertificate<T>) -> Vec<LyapunovSample<T>> {
    let mut out: Vec<_> = trace
        .samples
        .iter()
        .filter(|s| s.event)
        .map(|s| LyapunovSample { t: s.t, v: cert.value(&s.g), g_norm: norm(&s.g) })
        .collect();
    if let Some(last) = trace.samples.last() {
        if !last.event {
            out.push(LyapunovSample { t: last.t, v: cert.value(&last.g), g_norm: norm(&last.g) });
        }
    }
    out
}

/// Counts consecutive pairs with `V(t_{k+1}) > exp(−ρ(t_{k+1} − t_k))·V(t_k)·(1 + tol)`.
///
/// Pairs starting inside the ball `‖Ĝ‖ ≤ floor` are skipped.
pub fn decay_envelope_check<T: Real>(samples: &[LyapunovSample<T>], rate: T, tol: T, floor: T) -> usize {
    samples
        .windows(2)
        .filter(|w| w[0].g_norm > floor)
        .filter(|w| {
            let bound = (-rate * (w[1].t - w[0].t)).exp() * w[0].v * (T::one() + tol);
            !(w[1].v <= bound)
        })
        .count()
}

/// Counts inter-event grid pairs where the finite-difference `V̇_av` exceeds
/// `−λ_min(Q)(1 − σ)‖Ĝ‖²` by more than `slack` of its magnitude.
pub fn lyapunov_derivative_violations<T: Real>(
    trace: &AverageTrace<T>,
    cert: &LyapunovCertificate<T>,
    sigma: T,
    floor: T,
    slack: T,
) -> usize {
    let lq = cert.lambda_min_q();
    trace
        .samples
        .windows(2)
        .filter(|w| !w[1].event && norm(&w[0].g) > floor)
        .filter(|w| {
            let vdot = (cert.value(&w[1].g) - cert.value(&w[0].g)) / (w[1].t - w[0].t);
            let mid: Vec3<T> = std::array::from_fn(|i| T::half() * (w[0].g[i] + w[1].g[i]));
            let bound = -lq * (T::one() - sigma) * dot(&mid, &mid);
            vdot > bound * (T::one() - slack)
        })
        .count()
}

/// `sup_t ‖q̃(t) − q̃_av(t)‖` over two traces on the same grid.
pub fn averaging_error<T: Real>(full: &[(T, Vec3<T>)], avg: &[(T, Vec3<T>)]) -> Result<T> {
    if full.len() != avg.len() {
        return Err(Error::GridMismatch { reason: format!("{} vs {} samples", full.len(), avg.len()) });
    }
    let mut sup = T::zero();
    for (i, ((tf, qf), (ta, qa))) in full.iter().zip(avg).enumerate() {
        let tol = T::lit(1e-9) * tf.abs().max(T::one());
        if (*tf - *ta).abs() > tol {
            return Err(Error::GridMismatch { reason: format!("sample {i}: t = {tf} vs {ta}") });
        }
        sup = sup.max(norm(&vsub(qf, qa)));
    }
    Ok(sup)
}

/// Residual neighborhood scales: `(3/2)a3` and `½√(a1² + a2² + a3²)`.
pub fn residual_scales<T: Real>(amplitudes: &Vec3<T>) -> (T, T) {
    (T::lit(1.5) * amplitudes[2], T::half() * norm(amplitudes))
}

/// Sup averaging error at one base frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaError {
    pub omega3: f64,
    pub sup_error: f64,
}

/// Summary of the theoretical checks for one scenario.
///
/// Fields that need a Lyapunov certificate are `None` when `A − BK` is not Hurwitz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub hurwitz: bool,
    pub max_real_eigenvalue: f64,
    pub lyapunov_residual: Option<f64>,
    pub alpha: f64,
    pub alpha_min: Option<f64>,
    pub alpha_ok: Option<bool>,
    pub alpha_sufficient: Option<f64>,
    pub tau_star: f64,
    pub min_inter_event: Option<f64>,
    pub decay_rate: Option<f64>,
    pub trigger_floor: f64,
    pub envelope_violations: Option<usize>,
    pub derivative_violations: Option<usize>,
    /// `(3/2)a3`.
    pub residual_scale_heading: f64,
    /// `½‖(a1, a2, a3)‖`, a uniform bound on `‖S(t)‖`.
    pub residual_scale_norm: f64,
    pub averaging_sup_error: Vec<OmegaError>,
}
