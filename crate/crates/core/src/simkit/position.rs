use super::{
    step_metrics, tracking::Saturation, DelayLine, SimError, SimTrace, CONTROL_DT, CURRENT_LIMIT_A,
    PLANT_SUBSTEPS,
};
use crate::integrate::rk4_step;
use crate::vlca::ActuatorParams;
use nalgebra::Matrix4;

/// Elastic element between ball screw and joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointElement {
    Elastomer,
    /// Steel spring at 11 % of the elastomer stiffness, damped only by drivetrain friction.
    SteelSpring,
}

/// Two-mass rig: reflected drive mass, elastic element, reflected joint load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionRig {
    pub params: ActuatorParams,
    pub element: JointElement,
    /// Joint load reflected to the screw axis, kg.
    pub load_mass: f64,
    /// Moment arm converting screw displacement to joint angle, m.
    pub moment_arm: f64,
}

impl PositionRig {
    pub fn new(element: JointElement) -> Self {
        Self { params: ActuatorParams::identified(), element, load_mass: 2000.0, moment_arm: 0.0458 }
    }

    /// Element stiffness and damping, N/m and N·s/m.
    pub fn element_kb(&self) -> (f64, f64) {
        match self.element {
            JointElement::Elastomer => (self.params.k_r, self.params.b_r),
            JointElement::SteelSpring => (0.11 * self.params.k_r, 8.0e3),
        }
    }

    fn drive_mass(&self) -> f64 {
        self.params.effective_mass()
    }
}

/// PD position loop on the joint encoder with motor-velocity damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGains {
    /// N/m of output displacement.
    pub k_p: f64,
    /// Output-velocity damping, N·s/m.
    pub k_dj: f64,
    /// Drive-velocity damping, N·s/m.
    pub k_dm: f64,
    /// Output step, m at the screw axis.
    pub step_m: f64,
    pub duration_s: f64,
}

impl Default for PositionGains {
    fn default() -> Self {
        Self { k_p: 1.0e6, k_dj: 0.0, k_dm: 6.8e4, step_m: 1e-3, duration_s: 0.5 }
    }
}

/// Continuous-time state matrix of the loop for state `[p, ṗ, y, ẏ]`,
/// ignoring sampling and delay.
pub fn position_state_matrix(rig: &PositionRig, g: &PositionGains) -> Matrix4<f64> {
    let (k, b) = rig.element_kb();
    let md = rig.drive_mass();
    let ml = rig.load_mass;
    let bm = rig.params.reflected_motor_damping();
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -k / md, -(bm + b + g.k_dm) / md, (k - g.k_p) / md, (b - g.k_dj) / md,
        0.0, 0.0, 0.0, 1.0,
        k / ml, b / ml, -k / ml, -b / ml,
    )
}

/// Step response of the joint position loop. `q_out` is the joint angle,
/// `x_r` the element deflection, `f_meas` the element spring force.
pub fn run_joint_position_control(rig: &PositionRig, g: &PositionGains) -> Result<SimTrace, SimError> {
    rig.params.validate()?;
    if !(rig.load_mass > 0.0 && rig.moment_arm > 0.0 && g.duration_s > 0.0) {
        return Err(SimError::InvalidConfig("load mass, moment arm and duration must be positive".into()));
    }
    let (k, b) = rig.element_kb();
    let md = rig.drive_mass();
    let ml = rig.load_mass;
    let bm = rig.params.reflected_motor_damping();
    let kn = rig.params.force_per_amp();
    let n = (g.duration_s / CONTROL_DT).round() as usize;
    let h = CONTROL_DT / PLANT_SUBSTEPS as f64;

    let mut tr = SimTrace::new(CONTROL_DT, n);
    let (mut f_cmd, mut f_meas, mut i_m, mut x_r, mut q) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut delay = DelayLine::new(1);
    let mut sat = Saturation::default();
    let mut y = [0.0f64; 4];
    for j in 0..n {
        let t = tr.t[j];
        let target = g.step_m;
        let force = g.k_p * (target - y[2]) - g.k_dj * y[3] - g.k_dm * y[1];
        let i = sat.clip(delay.push(force / kn), CURRENT_LIMIT_A, t);
        f_cmd[j] = g.k_p * target;
        f_meas[j] = k * (y[0] - y[2]);
        i_m[j] = i;
        x_r[j] = y[0] - y[2];
        q[j] = y[2] / rig.moment_arm;
        let fm = kn * i;
        for _ in 0..PLANT_SUBSTEPS {
            y = rk4_step(&y, 0.0, h, |_, s| {
                let fe = k * (s[0] - s[2]) + b * (s[1] - s[3]);
                [s[1], (fm - bm * s[1] - fe) / md, s[3], fe / ml]
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState);
        }
    }
    let target_q = g.step_m / rig.moment_arm;
    tr.step = Some(step_metrics(&tr.t, &q, target_q, 0.0));
    tr.f_cmd = Some(f_cmd);
    tr.f_meas = Some(f_meas);
    tr.i_m = Some(i_m);
    tr.x_r = Some(x_r);
    tr.q_out = Some(q);
    tr.warnings.extend(sat.warning());
    Ok(tr)
}
