//! Planar two-joint leg (ankle, knee) with a hip payload, the linkage between
//! each actuator and its joint, and operational-space control of the hip.

mod dynamics;
mod linkage;
mod osc;
mod simulate;
mod trajectory;

pub use dynamics::{dynamics_terms, hip_jacobian, hip_position, inverse_kinematics, DynamicsTerms, HipJacobian, TwoDofParams};
pub use linkage::{linkage_map, LinkageMap, LinkageProfile};
pub use osc::{osc_torque, OscCommand, TaskGains, SINGULAR_DET_FRACTION};
pub use simulate::{simulate_osc, ActuationMode, OscConfig, OscRun};
pub use trajectory::{HipTarget, Trajectory};

use crate::simkit::SimError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestbedError {
    #[error("trajectory leaves the reachable workspace at t = {t:.3} s (hip distance {reach:.4} m)")]
    WorkspaceViolation { t: f64, reach: f64 },
    #[error("joint angle {q:.4} rad outside linkage range [{min:.4}, {max:.4}]")]
    OutOfRange { q: f64, min: f64, max: f64 },
    #[error("invalid testbed setup: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}
