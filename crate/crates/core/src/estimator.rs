//! Demodulation-based gradient estimate `Ĝ(t) = M(t)·Q(t)`.
//!
//! The raw measurement is demodulated directly, with no washout filter, so the
//! DC part of the signal shows up as a zero-mean ripple on `Ĝ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, vscale, Vec3};
use crate::real::Real;
use crate::vehicle::DitherParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GradientEstimate<T>(pub Vec3<T>);

impl<T: Real> GradientEstimate<T> {
    pub fn zero() -> Self {
        GradientEstimate([T::zero(); 3])
    }

    pub fn as_array(&self) -> &Vec3<T> {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.0)
    }
}

/// `M(t) = [−(4/a1) sin ω1t, (4/a2) cos ω2t, −(4/a3) sin ω3t]`.
pub fn demodulation_vector<T: Real>(d: &DitherParams<T>, t: T) -> Result<Vec3<T>> {
    for (i, a) in d.amplitudes().iter().enumerate() {
        if *a == T::zero() {
            return Err(Error::ZeroAmplitude { index: i + 1 });
        }
    }
    let four = T::lit(4.0);
    Ok([
        -four / d.a1 * (d.omega1 * t).sin(),
        four / d.a2 * (d.omega2 * t).cos(),
        -four / d.a3 * (d.omega3 * t).sin(),
    ])
}

pub fn gradient_estimate<T: Real>(m: &Vec3<T>, measured: T) -> GradientEstimate<T> {
    GradientEstimate(vscale(measured, m))
}
