use super::TestbedError;
use std::f64::consts::PI;

/// Tabulated moment arm `r(q)`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageProfile {
    angles: Vec<f64>,
    arms: Vec<f64>,
}

impl LinkageProfile {
    pub fn tabulated(angles: Vec<f64>, arms: Vec<f64>) -> Result<Self, TestbedError> {
        if angles.len() < 2 || angles.len() != arms.len() {
            return Err(TestbedError::InvalidConfig("linkage table needs ≥ 2 matching entries".into()));
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(TestbedError::InvalidConfig("linkage angles must increase".into()));
        }
        if arms.iter().any(|r| !(*r > 0.0)) {
            return Err(TestbedError::InvalidConfig("moment arms must be positive".into()));
        }
        if arms.windows(2).any(|w| (w[1] / w[0] - 1.0).abs() >= 0.2) {
            return Err(TestbedError::InvalidConfig("adjacent moment arms differ by 20 % or more".into()));
        }
        Ok(Self { angles, arms })
    }

    pub fn constant(r: f64) -> Self {
        Self { angles: vec![-PI, PI], arms: vec![r, r] }
    }

    /// Knee profile with a longer arm as the knee flexes (negative angles).
    pub fn crouch_biased_knee() -> Self {
        let angles: Vec<f64> = (0..8).map(|k| -2.8 + 0.4 * k as f64).collect();
        let arms = angles.iter().map(|q| 0.0458 - 0.006 * (q + 1.2)).collect();
        Self::tabulated(angles, arms).expect("static table is valid")
    }

    pub fn range(&self) -> (f64, f64) {
        (self.angles[0], *self.angles.last().unwrap())
    }

    fn segment(&self, q: f64) -> Result<usize, TestbedError> {
        let (min, max) = self.range();
        if !(q >= min && q <= max) {
            return Err(TestbedError::OutOfRange { q, min, max });
        }
        Ok(self.angles.partition_point(|a| *a <= q).clamp(1, self.angles.len() - 1) - 1)
    }

    pub fn moment_arm(&self, q: f64) -> Result<f64, TestbedError> {
        let i = self.segment(q)?;
        let u = (q - self.angles[i]) / (self.angles[i + 1] - self.angles[i]);
        Ok(self.arms[i] + u * (self.arms[i + 1] - self.arms[i]))
    }

    /// Screw travel `∫ r dq` from the start of the table, m.
    pub fn screw_position(&self, q: f64) -> Result<f64, TestbedError> {
        let i = self.segment(q)?;
        let mut s = 0.0;
        for k in 0..i {
            s += 0.5 * (self.arms[k] + self.arms[k + 1]) * (self.angles[k + 1] - self.angles[k]);
        }
        let r = self.moment_arm(q)?;
        Ok(s + 0.5 * (self.arms[i] + r) * (q - self.angles[i]))
    }
}

impl Default for LinkageProfile {
    fn default() -> Self {
        Self::constant(0.0458)
    }
}

/// Force/torque and speed conversion at one posture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkageMap {
    pub moment_arm: f64,
}

impl LinkageMap {
    pub fn force_to_torque(&self, force: f64) -> f64 {
        self.moment_arm * force
    }

    pub fn torque_to_force(&self, torque: f64) -> f64 {
        torque / self.moment_arm
    }

    pub fn joint_to_screw_speed(&self, qd: f64) -> f64 {
        self.moment_arm * qd
    }
}

pub fn linkage_map(q: f64, profile: &LinkageProfile) -> Result<LinkageMap, TestbedError> {
    Ok(LinkageMap { moment_arm: profile.moment_arm(q)? })
}
