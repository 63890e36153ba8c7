//! Fixed-step time-domain simulation of the actuator: discrete force
//! control at 1 kHz over an RK4 plant at 10 kHz, chirp identification,
//! joint position steps and hammer impacts.

mod control;
mod identify;
mod impact;
mod plant;
mod position;
mod reference;
mod trace;
mod tracking;

pub use control::{DelayLine, DiscreteFilter, ForceController};
pub use identify::{empirical_frequency_response, empirical_frequency_response_at, EXCITATION_THRESHOLD};
pub use impact::{run_impact, Grounding, ImpactConfig};
pub use plant::{step_plant, step_plant_with, PlantState, MAX_PLANT_STEP};
pub use position::{
    position_state_matrix, run_joint_position_control, JointElement, PositionGains, PositionRig,
};
pub use reference::{ChirpSpec, ForceReference};
pub use trace::{step_metrics, SimTrace, StepMetrics, SIM_TRACE_CSV_HEADER};
pub use tracking::{run_current_chirp, run_force_tracking, TrackingConfig};

use crate::vlca::VlcaError;
use thiserror::Error;

/// Controller period, s.
pub const CONTROL_DT: f64 = 1e-3;
/// Plant integration substeps per control period.
pub const PLANT_SUBSTEPS: usize = 10;
/// Motor current clip, A.
pub const CURRENT_LIMIT_A: f64 = 31.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation state became non-finite")]
    NonFiniteState,
    #[error("invalid simulation setup: {0}")]
    InvalidConfig(String),
    #[error("insufficient excitation at {freq_hz:.3} Hz (coherence proxy {proxy:.3})")]
    InsufficientExcitation { freq_hz: f64, proxy: f64 },
    #[error(transparent)]
    Vlca(#[from] VlcaError),
}

/// Non-fatal events recorded on a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimWarning {
    /// The current command exceeded the clip; `count` periods were clipped.
    Saturation { first_t_s: f64, count: usize, peak_abs_a: f64 },
}
