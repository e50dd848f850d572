//! Unicycle kinematics under the dithered velocity tuning laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vadd, vsub, Vec3};
use crate::real::Real;

/// Planar pose of the robot center. Heading is unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> VehicleState<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self { x, y, theta }
    }

    pub fn to_array(self) -> Vec3<T> {
        [self.x, self.y, self.theta]
    }

    pub fn from_array(a: Vec3<T>) -> Self {
        Self { x: a[0], y: a[1], theta: a[2] }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Probing amplitudes and frequencies of the three dither channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitherParams<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub omega1: T,
    pub omega2: T,
    pub omega3: T,
}

impl<T: Real> DitherParams<T> {
    /// Amplitude `a` on every channel, `ω1 = ω2 = 2ω3`.
    pub fn uniform(a: T, omega3: T) -> Self {
        Self { a1: a, a2: a, a3: a, omega1: T::two() * omega3, omega2: T::two() * omega3, omega3 }
    }

    pub fn amplitudes(&self) -> Vec3<T> {
        [self.a1, self.a2, self.a3]
    }

    /// `ω1 = ω2 = 2ω3`, checked to a relative tolerance of 1e-12.
    pub fn satisfies_frequency_ratio(&self) -> bool {
        let target = T::two() * self.omega3;
        let tol = T::lit(1e-12) * target.abs().max(T::one());
        (self.omega1 - target).abs() <= tol && (self.omega2 - target).abs() <= tol
    }

    /// Positive finite amplitudes, positive base frequency and, unless
    /// `frequency_override` is set, `ω1 = ω2 = 2ω3`.
    pub fn validate(&self, frequency_override: bool) -> Result<()> {
        for (i, a) in self.amplitudes().iter().enumerate() {
            if !(a.is_finite() && *a > T::zero()) {
                return Err(Error::invalid(format!("dithers.a{}", i + 1), "must be finite and > 0"));
            }
        }
        for (name, w) in [("omega1", self.omega1), ("omega2", self.omega2), ("omega3", self.omega3)] {
            if !w.is_finite() {
                return Err(Error::invalid(format!("dithers.{name}"), "must be finite"));
            }
        }
        if self.omega3 <= T::zero() {
            return Err(Error::invalid("dithers.omega3", "must be > 0"));
        }
        if !frequency_override && !self.satisfies_frequency_ratio() {
            return Err(Error::invalid(
                "dithers.omega1/omega2",
                "must equal 2*omega3 unless frequency_override is set",
            ));
        }
        Ok(())
    }

    /// Fundamental dither period `2π/ω3`.
    pub fn period(&self) -> T {
        T::two() * T::PI() / self.omega3
    }

    /// Dither displacement `S(t) = [(a1/2)sin ω1t, −(a2/2)cos ω2t, (a3/2)sin ω3t]`.
    pub fn dither_vector(&self, t: T) -> Vec3<T> {
        [
            T::half() * self.a1 * (self.omega1 * t).sin(),
            -T::half() * self.a2 * (self.omega2 * t).cos(),
            T::half() * self.a3 * (self.omega3 * t).sin(),
        ]
    }
}

/// Linear and angular speed commanded by the tuning laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocities<T> {
    pub v: T,
    pub omega: T,
}

/// `v = cos θ [a1ω1 cos ω1t + u1] + sin θ [a2ω2 sin ω2t + u1]`,
/// `ω = (a3ω3/2) cos ω3t + u2`.
pub fn dither_velocities<T: Real>(d: &DitherParams<T>, t: T, theta: T, u: [T; 2]) -> Velocities<T> {
    let (s, c) = theta.sin_cos();
    let v = c * (d.a1 * d.omega1 * (d.omega1 * t).cos() + u[0])
        + s * (d.a2 * d.omega2 * (d.omega2 * t).sin() + u[0]);
    let omega = T::half() * d.a3 * d.omega3 * (d.omega3 * t).cos() + u[1];
    Velocities { v, omega }
}

/// Unicycle kinematics `(v cos θ, v sin θ, ω)`.
pub fn state_derivative<T: Real>(s: &VehicleState<T>, vel: Velocities<T>) -> VehicleState<T> {
    let (sn, cs) = s.theta.sin_cos();
    VehicleState::new(vel.v * cs, vel.v * sn, vel.omega)
}

/// Estimator pose `q̂ = q − S(t)`.
pub fn estimator_pose<T: Real>(s: &VehicleState<T>, d: &DitherParams<T>, t: T) -> Vec3<T> {
    vsub(&s.to_array(), &d.dither_vector(t))
}

/// Inverse of [`estimator_pose`]: `q = q̂ + S(t)`.
pub fn pose_from_estimate<T: Real>(q_hat: &Vec3<T>, d: &DitherParams<T>, t: T) -> VehicleState<T> {
    VehicleState::from_array(vadd(q_hat, &d.dither_vector(t)))
}
