//! Event-triggered extremum-seeking source seeking for a unicycle robot.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the scenario loader,
//! simulator and exporters use.

pub mod analysis;
pub mod average;
pub mod bessel;
pub mod error;
pub mod estimator;
pub mod field;
pub mod integrate;
pub mod linalg;
pub mod real;
pub mod scenario;
pub mod sim;
pub mod trace_io;
pub mod trigger;
pub mod vehicle;
pub mod verify;

pub use error::{ConfigError, Error, Result};
pub use real::Real;
pub use scenario::{load_scenario, Mode, Scenario};
pub use sim::{check_trigger_soundness, compare, run_simulation, RunMetrics, SimulationTrace, TraceRow};
pub use trace_io::{export_metrics, export_trace, read_trace};
pub use verify::theory_report;

pub type QuadraticField = field::QuadraticField<f64>;
pub type VehicleState = vehicle::VehicleState<f64>;
pub type DitherParams = vehicle::DitherParams<f64>;
pub type GradientEstimate = estimator::GradientEstimate<f64>;
pub type GainMatrix = trigger::GainMatrix<f64>;
pub type TriggerConstants = trigger::TriggerConstants<f64>;
pub type AverageModel = average::AverageModel<f64>;
pub type LyapunovCertificate = analysis::LyapunovCertificate<f64>;
