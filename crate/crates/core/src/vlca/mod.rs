//! The actuator plant and its force-feedback loops as transfer functions,
//! plus the phase-margin comparison between them.

mod loops;
mod margins;
mod params;

pub use loops::{
    closed_loop_bandwidth, closed_loop_tf, derivative_filter, dob_filter, force_plant,
    open_loop_tf, plant_px, Bandwidth, ClosedLoop, ControllerKind,
};
pub use margins::{
    calibrate_margins, margin_table, write_margin_csv, CalibrationGrid, CalibrationPoint,
    LoopLabel, MarginCalibration, MarginRow, MARGIN_CSV_HEADER,
};
pub use params::{ActuatorParams, ControllerGains};

use crate::lintf::LintfError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VlcaError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("controller needs `{0}` to be set")]
    MissingFilterCutoff(&'static str),
    #[error(transparent)]
    Lintf(#[from] LintfError),
}
