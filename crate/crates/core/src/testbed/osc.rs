use super::{dynamics_terms, hip_jacobian, hip_position, HipTarget, TwoDofParams};
use nalgebra::{Matrix2, Vector2};

/// Damping engages when `|det J|` falls below this fraction of `L²`.
pub const SINGULAR_DET_FRACTION: f64 = 1e-3;

/// Task-space stiffness (1/s²) and damping (1/s) per Cartesian axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskGains {
    pub kp: [f64; 2],
    pub kd: [f64; 2],
}

impl TaskGains {
    /// Critically damped on both axes at natural frequency `wn`, rad/s.
    pub fn critical(wn: f64) -> Self {
        Self { kp: [wn * wn; 2], kd: [2.0 * wn; 2] }
    }

    pub fn is_valid(&self) -> bool {
        self.kp.iter().chain(&self.kd).all(|v| *v >= 0.0 && v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscCommand {
    pub tau: Vector2<f64>,
    /// Hip position error `x_des − x(q)`.
    pub error: Vector2<f64>,
    /// The damped pseudo-inverse was used.
    pub singularity_damped: bool,
}

/// `τ = A·J⁻¹(ẍ_des + K_p·e + K_d·ė − J̇·q̇) + b + g`.
pub fn osc_torque(
    q: &Vector2<f64>,
    qd: &Vector2<f64>,
    target: &HipTarget,
    gains: &TaskGains,
    params: &TwoDofParams,
) -> OscCommand {
    let dyn_ = dynamics_terms(q, qd, params);
    let jac = hip_jacobian(q, qd, params);
    let e = target.x - hip_position(q, params);
    let ed = target.xd - jac.j * qd;
    let acc = target.xdd
        + Vector2::new(gains.kp[0] * e[0], gains.kp[1] * e[1])
        + Vector2::new(gains.kd[0] * ed[0], gains.kd[1] * ed[1])
        - jac.jdot * qd;
    let threshold = SINGULAR_DET_FRACTION * params.reach().powi(2);
    let det = jac.det();
    let (j_inv, damped) = if det.abs() < threshold {
        let sigma_max = jac.j.singular_values().max();
        let lambda = 0.01 * sigma_max * (1.0 - det.abs() / threshold);
        let jjt = jac.j * jac.j.transpose() + Matrix2::identity() * lambda * lambda;
        let inv = jjt.try_inverse().unwrap_or_else(Matrix2::zeros);
        (jac.j.transpose() * inv, true)
    } else {
        (jac.j.try_inverse().expect("determinant above threshold"), false)
    };
    OscCommand { tau: dyn_.a * (j_inv * acc) + dyn_.b + dyn_.g, error: e, singularity_damped: damped }
}
