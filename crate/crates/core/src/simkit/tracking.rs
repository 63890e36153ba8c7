use super::{
    step_plant, step_plant_with, ChirpSpec, ForceController, ForceReference, PlantState, SimError,
    SimTrace, SimWarning, CONTROL_DT, CURRENT_LIMIT_A, PLANT_SUBSTEPS,
};
use crate::vlca::{ActuatorParams, ControllerGains, ControllerKind};

/// Timing and limits of a force-tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingConfig {
    pub control_dt: f64,
    pub substeps: usize,
    pub current_limit_a: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self { control_dt: CONTROL_DT, substeps: PLANT_SUBSTEPS, current_limit_a: CURRENT_LIMIT_A }
    }
}

/// Closed-loop force tracking with the output fixed, at the default rates.
pub fn run_force_tracking(
    kind: ControllerKind,
    gains: &ControllerGains,
    params: &ActuatorParams,
    reference: &ForceReference,
    duration_s: f64,
) -> Result<SimTrace, SimError> {
    run_force_tracking_with(kind, gains, params, reference, duration_s, &TrackingConfig::default())
}

pub fn run_force_tracking_with(
    kind: ControllerKind,
    gains: &ControllerGains,
    params: &ActuatorParams,
    reference: &ForceReference,
    duration_s: f64,
    cfg: &TrackingConfig,
) -> Result<SimTrace, SimError> {
    if cfg.substeps < 10 {
        return Err(SimError::InvalidConfig(format!(
            "need at least 10 plant substeps per control period, got {}",
            cfg.substeps
        )));
    }
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(SimError::InvalidConfig(format!("duration must be positive, got {duration_s}")));
    }
    let mut ctrl = ForceController::new(kind, params, gains, cfg.control_dt)?;
    let n = (duration_s / cfg.control_dt).round() as usize;
    let h = cfg.control_dt / cfg.substeps as f64;

    let mut tr = SimTrace::new(cfg.control_dt, n);
    let (mut f_cmd, mut f_meas, mut f_damp, mut i_m, mut x_r) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut sat = Saturation::default();
    let mut s = PlantState::default();
    for k in 0..n {
        let t = tr.t[k];
        let fd = reference.value(t);
        let fk = s.spring_force(params);
        let raw = ctrl.update(fd, fk, s.v_r);
        let i = sat.clip(raw, cfg.current_limit_a, t);
        if !ctrl.states_finite() || !raw.is_finite() {
            return Err(SimError::NonFiniteState);
        }
        f_cmd[k] = fd;
        f_meas[k] = fk;
        f_damp[k] = s.damping_force(params);
        i_m[k] = i;
        x_r[k] = s.x_r;
        for _ in 0..cfg.substeps {
            s = step_plant(params, s, i, 0.0, h)?;
        }
    }
    tr.f_cmd = Some(f_cmd);
    tr.f_meas = Some(f_meas);
    tr.f_damping = Some(f_damp);
    tr.i_m = Some(i_m);
    tr.x_r = Some(x_r);
    tr.chirp = reference.chirp();
    tr.warnings.extend(sat.warning());
    Ok(tr)
}

/// Open-loop current chirp into the fixed-output actuator. The current is
/// evaluated continuously inside the integrator; samples are recorded every
/// `record_dt`, with `f_cmd = N·i` and `f_meas = k_r·x_r`.
pub fn run_current_chirp(
    params: &ActuatorParams,
    chirp: &ChirpSpec,
    record_dt: f64,
    substeps: usize,
) -> Result<SimTrace, SimError> {
    params.validate()?;
    if !chirp.is_valid() || !(record_dt > 0.0) || substeps == 0 {
        return Err(SimError::InvalidConfig("invalid chirp run setup".into()));
    }
    let n = (chirp.duration_s / record_dt).round() as usize;
    let h = record_dt / substeps as f64;
    let mut tr = SimTrace::new(record_dt, n);
    let (mut f_cmd, mut f_meas, mut f_damp, mut i_m, mut x_r) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut s = PlantState::default();
    let kn = params.force_per_amp();
    for k in 0..n {
        let t = tr.t[k];
        let i = chirp.value(t);
        f_cmd[k] = kn * i;
        f_meas[k] = s.spring_force(params);
        f_damp[k] = s.damping_force(params);
        i_m[k] = i;
        x_r[k] = s.x_r;
        for j in 0..substeps {
            let t0 = t + j as f64 * h;
            s = step_plant_with(params, s, h, |tau| (chirp.value(t0 + tau), 0.0))?;
        }
    }
    tr.f_cmd = Some(f_cmd);
    tr.f_meas = Some(f_meas);
    tr.f_damping = Some(f_damp);
    tr.i_m = Some(i_m);
    tr.x_r = Some(x_r);
    tr.chirp = Some(*chirp);
    Ok(tr)
}

#[derive(Debug, Default)]
pub(crate) struct Saturation {
    first: Option<f64>,
    count: usize,
    peak: f64,
}

impl Saturation {
    pub(crate) fn clip(&mut self, i: f64, limit: f64, t: f64) -> f64 {
        if i.abs() > limit {
            self.first.get_or_insert(t);
            self.count += 1;
            self.peak = self.peak.max(i.abs());
            limit * i.signum()
        } else {
            i
        }
    }

    pub(crate) fn warning(&self) -> Option<SimWarning> {
        self.first.map(|first_t_s| SimWarning::Saturation {
            first_t_s,
            count: self.count,
            peak_abs_a: self.peak,
        })
    }
}
