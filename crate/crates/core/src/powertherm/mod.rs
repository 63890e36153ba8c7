//! Two-node thermal model of the liquid-cooled motor and the
//! electrical-to-joint power flow of a lift.

mod power;
mod thermal;

pub use power::{power_flow, write_efficiency_csv, PowerFlow, PowerSample, EFFICIENCY_CSV_HEADER, MIN_MOTOR_POWER_W};
pub use thermal::{
    attach_winding_temperature, calibrate_thermal, continuous_force_limit, simulate_thermal,
    step_thermal, write_thermal_csv, Calibration, ContinuousLimit, Cooling, ThermalParams,
    ThermalSample, ThermalState, ThermalTargets, THERMAL_CSV_HEADER,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerthermError {
    #[error("thermal calibration infeasible: residuals {residuals:?}")]
    CalibrationInfeasible { residuals: [f64; 3] },
    #[error("no interval with positive mechanical power")]
    NoPositivePowerInterval,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
