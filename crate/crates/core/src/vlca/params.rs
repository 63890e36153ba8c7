use super::VlcaError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical constants of the actuator drivetrain and elastic element.
///
/// Linear quantities are expressed at the ball screw; `n_m` converts screw
/// travel to motor angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorParams {
    /// Ball-screw efficiency, 0–1.
    pub eta: f64,
    /// Motor torque constant, N·m/A.
    pub k_tau: f64,
    /// Motor-to-screw speed reduction, rad/m.
    pub n_m: f64,
    /// Rotor inertia, kg·m².
    pub j_m: f64,
    /// Motor viscous friction, N·m·s.
    pub b_m: f64,
    /// Moving mass on the elastic element, kg.
    pub m_r: f64,
    /// Elastic element damping, N·s/m.
    pub b_r: f64,
    /// Elastic element stiffness, N/m.
    pub k_r: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self::identified()
    }
}

impl ActuatorParams {
    /// Identified parameters of the polyurethane-elastomer actuator.
    pub fn identified() -> Self {
        Self {
            eta: 0.9,
            k_tau: 0.0448,
            n_m: 3316.0,
            j_m: 3.8e-5,
            b_m: 2.0e-4,
            m_r: 1.3,
            b_r: 2.0e4,
            k_r: 5.5e6,
        }
    }

    /// Speed reduction from pulley ratio and screw lead: `2π·ratio/lead`.
    pub fn reduction_from_drivetrain(pulley_ratio: f64, lead_m: f64) -> f64 {
        2.0 * PI * pulley_ratio / lead_m
    }

    pub fn validate(&self) -> Result<(), VlcaError> {
        let fields = [
            ("eta", self.eta),
            ("k_tau", self.k_tau),
            ("n_m", self.n_m),
            ("j_m", self.j_m),
            ("b_m", self.b_m),
            ("m_r", self.m_r),
            ("b_r", self.b_r),
            ("k_r", self.k_r),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(VlcaError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eta > 1.0 {
            return Err(VlcaError::InvalidParams(format!(
                "eta must not exceed 1, got {}",
                self.eta
            )));
        }
        Ok(())
    }

    /// Current-to-force gain `N = η·k_τ·N_m`, N/A.
    pub fn force_per_amp(&self) -> f64 {
        self.eta * self.k_tau * self.n_m
    }

    /// `J_m·N_m² + m_r`, kg.
    pub fn effective_mass(&self) -> f64 {
        self.j_m * self.n_m * self.n_m + self.m_r
    }

    /// Motor friction reflected to the screw, `b_m·N_m²`, N·s/m.
    pub fn reflected_motor_damping(&self) -> f64 {
        self.b_m * self.n_m * self.n_m
    }

    /// `b_m·N_m² + b_r`, N·s/m.
    pub fn effective_damping(&self) -> f64 {
        self.reflected_motor_damping() + self.b_r
    }

    /// Fixed-output natural frequency, rad/s.
    pub fn natural_frequency(&self) -> f64 {
        (self.k_r / self.effective_mass()).sqrt()
    }

    pub fn damping_ratio(&self) -> f64 {
        self.effective_damping() / (2.0 * (self.k_r * self.effective_mass()).sqrt())
    }

    /// Static deflection per ampere, m/A.
    pub fn dc_compliance(&self) -> f64 {
        self.force_per_amp() / self.k_r
    }
}

/// Force-loop gains, filter cutoffs and loop delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub k_p: f64,
    /// Motor-velocity derivative gain.
    pub k_dm: f64,
    /// Deflection-derivative gain; `None` uses `k_dm·N_m/k_r`.
    pub k_df: Option<f64>,
    /// Integral gain, 1/s.
    pub k_i: f64,
    /// Derivative low-pass cutoff, rad/s.
    pub q_d_cutoff: Option<f64>,
    /// Disturbance-observer low-pass cutoff, rad/s.
    pub q_taud_cutoff: Option<f64>,
    pub q_taud_zeta: f64,
    /// Loop delay, s.
    pub delay_t: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            k_p: 4.0,
            k_dm: 15.0,
            k_df: None,
            k_i: 300.0,
            q_d_cutoff: Some(2.0 * PI * 50.0),
            q_taud_cutoff: Some(2.0 * PI * 15.0),
            q_taud_zeta: 0.707,
            delay_t: 1e-3,
        }
    }
}

impl ControllerGains {
    /// Defaults with the disturbance-observer cutoff used for torque
    /// tracking experiments (60 Hz).
    pub fn tracking() -> Self {
        Self {
            q_taud_cutoff: Some(2.0 * PI * 60.0),
            ..Self::default()
        }
    }

    pub fn k_df_for(&self, params: &ActuatorParams) -> f64 {
        self.k_df.unwrap_or(self.k_dm * params.n_m / params.k_r)
    }

    pub fn validate(&self) -> Result<(), VlcaError> {
        for (name, v) in [("k_p", self.k_p), ("k_dm", self.k_dm), ("k_i", self.k_i)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(VlcaError::InvalidParams(format!("{name} must be non-negative, got {v}")));
            }
        }
        if let Some(k) = self.k_df {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(VlcaError::InvalidParams(format!("k_df must be non-negative, got {k}")));
            }
        }
        for (name, v) in [("q_d_cutoff", self.q_d_cutoff), ("q_taud_cutoff", self.q_taud_cutoff)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(VlcaError::InvalidParams(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if !(self.q_taud_zeta > 0.0) {
            return Err(VlcaError::InvalidParams(format!(
                "q_taud_zeta must be positive, got {}",
                self.q_taud_zeta
            )));
        }
        if !(self.delay_t >= 0.0) || !self.delay_t.is_finite() {
            return Err(VlcaError::InvalidParams(format!(
                "delay_t must be non-negative, got {}",
                self.delay_t
            )));
        }
        Ok(())
    }
}
