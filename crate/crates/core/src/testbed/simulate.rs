use super::{
    dynamics_terms, hip_jacobian, hip_position, inverse_kinematics, osc_torque, LinkageProfile,
    TaskGains, TestbedError, Trajectory, TwoDofParams,
};
use crate::integrate::rk4_step;
use crate::powertherm::PowerSample;
use crate::simkit::{DelayLine, ForceController, SimError, SimTrace, SimWarning, CONTROL_DT, CURRENT_LIMIT_A, PLANT_SUBSTEPS};
use crate::vlca::{ActuatorParams, ControllerGains, ControllerKind};
use nalgebra::Vector2;

/// How joint torque commands reach the joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActuationMode {
    /// Commanded torque applied directly, one control period late.
    IdealTorque,
    /// Each torque passes through the linkage and a series-elastic actuator
    /// under a force loop.
    CascadedVlca,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscConfig {
    pub params: TwoDofParams,
    pub trajectory: Trajectory,
    pub mode: ActuationMode,
    pub duration_s: f64,
    pub gains: TaskGains,
    pub linkage: [LinkageProfile; 2],
    pub actuator: ActuatorParams,
    pub force_kind: ControllerKind,
    pub force_gains: ControllerGains,
    /// Constant external force on the hip, N.
    pub hip_force: [f64; 2],
    /// Sign of the knee angle for the initial posture.
    pub knee_sign: f64,
}

impl OscConfig {
    pub fn new(trajectory: Trajectory, mode: ActuationMode, duration_s: f64) -> Self {
        Self {
            params: TwoDofParams::default(),
            trajectory,
            mode,
            duration_s,
            gains: TaskGains::critical(20.0),
            linkage: [LinkageProfile::default(), LinkageProfile::default()],
            actuator: ActuatorParams::identified(),
            force_kind: ControllerKind::PDmDOB,
            force_gains: ControllerGains::tracking(),
            hip_force: [0.0; 2],
            knee_sign: -1.0,
        }
    }
}

/// Per-sample record of an OSC run at the control rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OscRun {
    /// `q_out` is hip height; the force columns describe the knee actuator.
    pub trace: SimTrace,
    pub hip: Vec<[f64; 2]>,
    pub hip_desired: Vec<[f64; 2]>,
    pub q: Vec<[f64; 2]>,
    pub qd: Vec<[f64; 2]>,
    pub tau_command: Vec<[f64; 2]>,
    /// Torque delivered to the joints.
    pub tau_joint: Vec<[f64; 2]>,
    /// Motor currents (zero in ideal mode), A.
    pub current: Vec<[f64; 2]>,
    /// Drive (ball-screw nut) speeds, m/s.
    pub screw_speed: Vec<[f64; 2]>,
    pub max_hip_error: f64,
    pub singularity_damped_steps: usize,
}

impl OscRun {
    /// Electrical, motor and joint power summed over both joints.
    pub fn power_samples(&self, actuator: &ActuatorParams, winding_resistance: f64) -> Vec<PowerSample> {
        (0..self.trace.len())
            .map(|k| {
                let (mut input, mut motor, mut joint) = (0.0, 0.0, 0.0);
                for j in 0..2 {
                    let i = self.current[k][j];
                    let pm = actuator.k_tau * i * actuator.n_m * self.screw_speed[k][j];
                    motor += pm;
                    input += pm + i * i * winding_resistance;
                    joint += self.tau_joint[k][j] * self.qd[k][j];
                }
                PowerSample { t: self.trace.t[k], input_power: input, motor_power: motor, joint_power: joint }
            })
            .collect()
    }
}

fn check_workspace(cfg: &OscConfig) -> Result<(), TestbedError> {
    let p = &cfg.params;
    let (lo, hi) = ((p.length[0] - p.length[1]).abs() + 0.02, p.reach() - 0.02);
    let n = (cfg.duration_s / CONTROL_DT).round() as usize;
    for k in 0..=n {
        let t = k as f64 * CONTROL_DT;
        let reach = cfg.trajectory.at(t).x.norm();
        if !(reach >= lo && reach <= hi) {
            return Err(TestbedError::WorkspaceViolation { t, reach });
        }
    }
    Ok(())
}

/// Operational-space control of the hip: OSC at 1 kHz, rigid-body dynamics
/// integrated with RK4 at 10 kHz.
pub fn simulate_osc(cfg: &OscConfig) -> Result<OscRun, TestbedError> {
    cfg.params.validate()?;
    cfg.trajectory.validate()?;
    if !cfg.gains.is_valid() || !(cfg.duration_s > 0.0) {
        return Err(TestbedError::InvalidConfig("task gains must be non-negative, duration positive".into()));
    }
    check_workspace(cfg)?;
    let p = &cfg.params;
    let a = &cfg.actuator;
    let start = cfg.trajectory.at(0.0);
    let mut q = inverse_kinematics(&start.x, p, cfg.knee_sign)
        .ok_or(TestbedError::WorkspaceViolation { t: 0.0, reach: start.x.norm() })?;
    let jac0 = hip_jacobian(&q, &Vector2::zeros(), p).j;
    let mut qd = jac0.try_inverse().map(|ji| ji * start.xd).unwrap_or_else(Vector2::zeros);
    let f_ext = Vector2::from(cfg.hip_force);

    let n = (cfg.duration_s / CONTROL_DT).round() as usize;
    let h = CONTROL_DT / PLANT_SUBSTEPS as f64;
    let mut run = OscRun { trace: SimTrace::new(CONTROL_DT, n), ..Default::default() };
    let (mut f_cmd, mut f_meas, mut i_m, mut x_r, mut q_out) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    // drive positions p_j and speeds; deflection x_j = p_j − L_j(q_j)
    let mut drive = [[0.0f64; 2]; 2];
    let mut controllers = Vec::new();
    let mut torque_delay = [DelayLine::new(1), DelayLine::new(1)];
    let mut saturated = 0usize;
    let mut first_sat = None;
    let mut peak_i = 0.0f64;
    let tau0 = osc_torque(&q, &qd, &start, &cfg.gains, p).tau;
    for j in 0..2 {
        torque_delay[j].push(tau0[j]);
    }
    if cfg.mode == ActuationMode::CascadedVlca {
        for j in 0..2 {
            let r = cfg.linkage[j].moment_arm(q[j])?;
            let l = cfg.linkage[j].screw_position(q[j])?;
            drive[j] = [l + tau0[j] / r / a.k_r, r * qd[j]];
            let mut c = ForceController::new(cfg.force_kind, a, &cfg.force_gains, CONTROL_DT)?;
            c.preload(tau0[j] / r);
            controllers.push(c);
        }
    }

    for k in 0..n {
        let t = run.trace.t[k];
        let target = cfg.trajectory.at(t);
        let cmd = osc_torque(&q, &qd, &target, &cfg.gains, p);
        if cmd.singularity_damped {
            run.singularity_damped_steps += 1;
        }
        let hip = hip_position(&q, p);
        let err = (target.x - hip).norm();
        run.max_hip_error = run.max_hip_error.max(err);

        let mut arms = [0.0; 2];
        let mut offsets = [0.0; 2];
        for j in 0..2 {
            arms[j] = cfg.linkage[j].moment_arm(q[j])?;
            offsets[j] = cfg.linkage[j].screw_position(q[j])? - arms[j] * q[j];
        }
        let mut currents = [0.0; 2];
        let mut tau_joint = [0.0; 2];
        match cfg.mode {
            ActuationMode::IdealTorque => {
                let applied = [torque_delay[0].push(cmd.tau[0]), torque_delay[1].push(cmd.tau[1])];
                tau_joint = applied;
                let tau = Vector2::from(applied);
                for _ in 0..PLANT_SUBSTEPS {
                    let y = rk4_step(&[q[0], q[1], qd[0], qd[1]], 0.0, h, |_, s| {
                        let (qs, qds) = (Vector2::new(s[0], s[1]), Vector2::new(s[2], s[3]));
                        let qdd = joint_accel(&qs, &qds, &tau, &f_ext, p);
                        [s[2], s[3], qdd[0], qdd[1]]
                    });
                    q = Vector2::new(y[0], y[1]);
                    qd = Vector2::new(y[2], y[3]);
                }
                f_cmd[k] = cmd.tau[1] / arms[1];
            }
            ActuationMode::CascadedVlca => {
                for j in 0..2 {
                    let defl = drive[j][0] - cfg.linkage[j].screw_position(q[j])?;
                    let rate = drive[j][1] - arms[j] * qd[j];
                    let f_des = cmd.tau[j] / arms[j];
                    let raw = controllers[j].update(f_des, a.k_r * defl, rate);
                    if !raw.is_finite() {
                        return Err(SimError::NonFiniteState.into());
                    }
                    if raw.abs() > CURRENT_LIMIT_A {
                        saturated += 1;
                        first_sat.get_or_insert(t);
                        peak_i = peak_i.max(raw.abs());
                    }
                    currents[j] = raw.clamp(-CURRENT_LIMIT_A, CURRENT_LIMIT_A);
                    tau_joint[j] = arms[j] * (a.k_r * defl + a.b_r * rate);
                    if j == 1 {
                        f_cmd[k] = f_des;
                        f_meas[k] = a.k_r * defl;
                        x_r[k] = defl;
                    }
                }
                // the arm is frozen over one control period; screw travel uses
                // its local linearisation
                let kn = a.force_per_amp();
                let (m, bm) = (a.effective_mass(), a.reflected_motor_damping());
                let y0 = [q[0], q[1], qd[0], qd[1], drive[0][0], drive[1][0], drive[0][1], drive[1][1]];
                let mut y = y0;
                for _ in 0..PLANT_SUBSTEPS {
                    y = rk4_step(&y, 0.0, h, |_, s| {
                        let mut tau = Vector2::zeros();
                        let mut acc_p = [0.0; 2];
                        for j in 0..2 {
                            let defl = s[4 + j] - (offsets[j] + arms[j] * s[j]);
                            let f = a.k_r * defl + a.b_r * (s[6 + j] - arms[j] * s[2 + j]);
                            tau[j] = arms[j] * f;
                            acc_p[j] = (kn * currents[j] - bm * s[6 + j] - f) / m;
                        }
                        let qdd = joint_accel(&Vector2::new(s[0], s[1]), &Vector2::new(s[2], s[3]), &tau, &f_ext, p);
                        [s[2], s[3], qdd[0], qdd[1], s[6], s[7], acc_p[0], acc_p[1]]
                    });
                }
                q = Vector2::new(y[0], y[1]);
                qd = Vector2::new(y[2], y[3]);
                drive = [[y[4], y[6]], [y[5], y[7]]];
            }
        }
        if !(q.iter().chain(qd.iter()).all(|v| v.is_finite())) {
            return Err(SimError::NonFiniteState.into());
        }
        run.hip.push([hip[0], hip[1]]);
        run.hip_desired.push([target.x[0], target.x[1]]);
        run.tau_command.push([cmd.tau[0], cmd.tau[1]]);
        run.tau_joint.push(tau_joint);
        run.current.push(currents);
        i_m[k] = currents[1];
        q_out[k] = hip[1];
        run.screw_speed.push([drive[0][1], drive[1][1]]);
        run.q.push([q[0], q[1]]);
        run.qd.push([qd[0], qd[1]]);
    }
    run.trace.f_cmd = Some(f_cmd);
    run.trace.i_m = Some(i_m);
    run.trace.q_out = Some(q_out);
    if cfg.mode == ActuationMode::CascadedVlca {
        run.trace.f_meas = Some(f_meas);
        run.trace.x_r = Some(x_r);
    }
    if let Some(first_t_s) = first_sat {
        run.trace.warnings.push(SimWarning::Saturation { first_t_s, count: saturated, peak_abs_a: peak_i });
    }
    Ok(run)
}

fn joint_accel(
    q: &Vector2<f64>,
    qd: &Vector2<f64>,
    tau: &Vector2<f64>,
    f_ext: &Vector2<f64>,
    p: &TwoDofParams,
) -> Vector2<f64> {
    let d = dynamics_terms(q, qd, p);
    let jt = hip_jacobian(q, qd, p).j.transpose();
    d.a.try_inverse().expect("inertia matrix is positive definite") * (tau + jt * f_ext - d.b - d.g)
}
