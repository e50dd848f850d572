//! Quadratic signal field sensed by the vehicle.

use serde::{Deserialize, Serialize};

use crate::linalg::Vec3;
use crate::real::Real;
use crate::vehicle::VehicleState;

/// `Q(x, y, θ) = Q* − ½(x−x*)² − ½(y−y*)² − ½(θ−θ*)²`, maximal at the source pose.
///
/// The controller never reads these parameters; it only sees [`evaluate`](Self::evaluate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticField<T> {
    pub x_star: T,
    pub y_star: T,
    pub theta_star: T,
    pub q_star: T,
}

impl<T: Real> QuadraticField<T> {
    pub fn new(x_star: T, y_star: T, theta_star: T, q_star: T) -> Self {
        Self { x_star, y_star, theta_star, q_star }
    }

    /// Source pose `(x*, y*, θ*)`.
    pub fn maximizer(&self) -> VehicleState<T> {
        VehicleState::new(self.x_star, self.y_star, self.theta_star)
    }

    /// Offset of `pose` from the maximizer.
    pub fn offset(&self, pose: &VehicleState<T>) -> Vec3<T> {
        [pose.x - self.x_star, pose.y - self.y_star, pose.theta - self.theta_star]
    }

    pub fn evaluate(&self, pose: &VehicleState<T>) -> T {
        let d = self.offset(pose);
        self.q_star - T::half() * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    }

    /// Analytic gradient of [`evaluate`](Self::evaluate).
    ///
    /// Test oracle only. Control paths must work from measurements alone.
    pub fn gradient(&self, pose: &VehicleState<T>) -> Vec3<T> {
        let d = self.offset(pose);
        [-d[0], -d[1], -d[2]]
    }
}
