use super::{step_plant_with, PlantState, SimError, SimTrace};
use crate::vlca::ActuatorParams;
use std::f64::consts::PI;

/// Where the actuator is fixed during the hammer test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grounding {
    /// Ball screw fixed; the elastomer is bypassed.
    Rigid,
    /// Actuator fixed at its base; the elastomer carries the reaction.
    Viscoelastic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactConfig {
    pub grounding: Grounding,
    /// Hammer impulse, N·s.
    pub impulse_ns: f64,
    /// Half-sine pulse width, s.
    pub pulse_width_s: f64,
    /// Load-cell sensor mass, kg.
    pub sensor_mass_kg: f64,
    pub duration_s: f64,
    pub record_dt: f64,
    pub params: ActuatorParams,
}

impl ImpactConfig {
    pub fn new(grounding: Grounding) -> Self {
        Self {
            grounding,
            impulse_ns: 20.0,
            pulse_width_s: 2e-3,
            sensor_mass_kg: 0.2,
            duration_s: 0.1,
            record_dt: 1e-4,
            params: ActuatorParams::identified(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        if !(self.impulse_ns >= 0.0) || !self.impulse_ns.is_finite() {
            return Err(SimError::InvalidConfig(format!("impulse must be non-negative, got {}", self.impulse_ns)));
        }
        if !(0.5e-3..=5e-3).contains(&self.pulse_width_s) {
            return Err(SimError::InvalidConfig(format!(
                "pulse width must lie in [0.5, 5] ms, got {} s",
                self.pulse_width_s
            )));
        }
        if !(self.sensor_mass_kg >= 0.0) || !(self.duration_s > 0.0) || !(self.record_dt > 0.0) {
            return Err(SimError::InvalidConfig("sensor mass, duration and record step must be valid".into()));
        }
        Ok(())
    }

    /// Hammer force at time `t`, N.
    pub fn hammer_force(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.pulse_width_s {
            return 0.0;
        }
        let peak = self.impulse_ns * PI / (2.0 * self.pulse_width_s);
        peak * (PI * t / self.pulse_width_s).sin()
    }
}

/// Hammer strike on the load cell with the controller idle. Records
/// load-cell force and elastomer deflection.
pub fn run_impact(cfg: &ImpactConfig) -> Result<SimTrace, SimError> {
    cfg.validate()?;
    let n = (cfg.duration_s / cfg.record_dt).round() as usize;
    let mut tr = SimTrace::new(cfg.record_dt, n);
    let mut f_lc = vec![0.0; n];
    let mut x_r = vec![0.0; n];
    let mut f_meas = vec![0.0; n];
    // sensor mass rides on the screw
    let moving = ActuatorParams { m_r: cfg.params.m_r + cfg.sensor_mass_kg, ..cfg.params };
    let mut s = PlantState::default();
    for k in 0..n {
        let t = tr.t[k];
        let fh = cfg.hammer_force(t);
        match cfg.grounding {
            Grounding::Rigid => {
                f_lc[k] = fh;
            }
            Grounding::Viscoelastic => {
                let acc = s.acceleration(&moving, 0.0, fh);
                f_lc[k] = fh - cfg.sensor_mass_kg * acc;
                x_r[k] = s.x_r;
                f_meas[k] = s.spring_force(&cfg.params);
                s = step_plant_with(&moving, s, cfg.record_dt, |tau| (0.0, cfg.hammer_force(t + tau)))?;
            }
        }
    }
    tr.f_loadcell = Some(f_lc);
    tr.x_r = Some(x_r);
    tr.f_meas = Some(f_meas);
    tr.f_cmd = Some(vec![0.0; n]);
    tr.i_m = Some(vec![0.0; n]);
    Ok(tr)
}
