use super::TestbedError;
use nalgebra::{Matrix2, Vector2};

/// Link and payload parameters. Index 0 is the shank (ankle to knee),
/// index 1 the thigh (knee to hip).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDofParams {
    pub length: [f64; 2],
    pub mass: [f64; 2],
    /// Centre of mass distance from the proximal joint.
    pub com: [f64; 2],
    /// Rotational inertia about the centre of mass, kg·m².
    pub inertia: [f64; 2],
    /// Point mass at the hip, kg.
    pub payload: f64,
    pub gravity: f64,
}

impl Default for TwoDofParams {
    /// 0.4 m, 2 kg slender links with the centre of mass at midpoint.
    fn default() -> Self {
        let (l, m) = (0.4, 2.0);
        Self {
            length: [l, l],
            mass: [m, m],
            com: [l / 2.0, l / 2.0],
            inertia: [m * l * l / 12.0; 2],
            payload: 10.0,
            gravity: 9.81,
        }
    }
}

impl TwoDofParams {
    pub fn with_payload(payload: f64) -> Self {
        Self { payload, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TestbedError> {
        let ok = self.length.iter().chain(&self.mass).all(|v| *v > 0.0 && v.is_finite())
            && self.inertia.iter().all(|v| *v >= 0.0)
            && self.payload >= 0.0
            && self.gravity.is_finite();
        if ok {
            Ok(())
        } else {
            Err(TestbedError::InvalidConfig("link lengths and masses must be positive".into()))
        }
    }

    pub fn reach(&self) -> f64 {
        self.length[0] + self.length[1]
    }

    /// `(h1, J1, M1)`: thigh-plus-payload first moment, inertia about the
    /// knee, and mass.
    fn distal(&self) -> (f64, f64, f64) {
        let (m1, lc1, l1) = (self.mass[1], self.com[1], self.length[1]);
        let h1 = m1 * lc1 + self.payload * l1;
        let j1 = m1 * lc1 * lc1 + self.inertia[1] + self.payload * l1 * l1;
        (h1, j1, m1 + self.payload)
    }
}

/// `A(q)·q̈ + b(q, q̇) + g(q) = τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsTerms {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub g: Vector2<f64>,
}

pub fn dynamics_terms(q: &Vector2<f64>, qd: &Vector2<f64>, p: &TwoDofParams) -> DynamicsTerms {
    let (h1, j1, big_m1) = p.distal();
    let l0 = p.length[0];
    let (s1, c1) = q[1].sin_cos();
    let a11 = p.mass[0] * p.com[0].powi(2) + p.inertia[0] + big_m1 * l0 * l0 + j1 + 2.0 * l0 * h1 * c1;
    let a12 = j1 + l0 * h1 * c1;
    let a = Matrix2::new(a11, a12, a12, j1);
    let b = Vector2::new(
        -l0 * h1 * s1 * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]),
        l0 * h1 * s1 * qd[0] * qd[0],
    );
    let c0 = q[0].cos();
    let c01 = (q[0] + q[1]).cos();
    let g = Vector2::new(
        p.gravity * ((p.mass[0] * p.com[0] + big_m1 * l0) * c0 + h1 * c01),
        p.gravity * h1 * c01,
    );
    DynamicsTerms { a, b, g }
}

pub fn hip_position(q: &Vector2<f64>, p: &TwoDofParams) -> Vector2<f64> {
    let (l0, l1) = (p.length[0], p.length[1]);
    Vector2::new(
        l0 * q[0].cos() + l1 * (q[0] + q[1]).cos(),
        l0 * q[0].sin() + l1 * (q[0] + q[1]).sin(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HipJacobian {
    pub j: Matrix2<f64>,
    pub jdot: Matrix2<f64>,
}

impl HipJacobian {
    pub fn det(&self) -> f64 {
        self.j.determinant()
    }
}

pub fn hip_jacobian(q: &Vector2<f64>, qd: &Vector2<f64>, p: &TwoDofParams) -> HipJacobian {
    let (l0, l1) = (p.length[0], p.length[1]);
    let (s0, c0) = q[0].sin_cos();
    let (s01, c01) = (q[0] + q[1]).sin_cos();
    let w01 = qd[0] + qd[1];
    let j = Matrix2::new(-l0 * s0 - l1 * s01, -l1 * s01, l0 * c0 + l1 * c01, l1 * c01);
    let jdot = Matrix2::new(
        -l0 * c0 * qd[0] - l1 * c01 * w01,
        -l1 * c01 * w01,
        -l0 * s0 * qd[0] - l1 * s01 * w01,
        -l1 * s01 * w01,
    );
    HipJacobian { j, jdot }
}

/// Joint angles placing the hip at `x`, with the knee bent to the side given
/// by the sign of `knee_sign`.
pub fn inverse_kinematics(x: &Vector2<f64>, p: &TwoDofParams, knee_sign: f64) -> Option<Vector2<f64>> {
    let (l0, l1) = (p.length[0], p.length[1]);
    let c = (x.norm_squared() - l0 * l0 - l1 * l1) / (2.0 * l0 * l1);
    if !(-1.0..=1.0).contains(&c) {
        return None;
    }
    let q1 = knee_sign.signum() * c.acos();
    let q0 = x[1].atan2(x[0]) - (l1 * q1.sin()).atan2(l0 + l1 * q1.cos());
    Some(Vector2::new(q0, q1))
}
