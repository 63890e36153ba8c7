use super::SimError;
use crate::vlca::{ActuatorParams, ControllerGains, ControllerKind, VlcaError};
use std::collections::VecDeque;

/// Fixed-length sample delay. A value pushed now comes back out `len` pushes later.
#[derive(Debug, Clone)]
pub struct DelayLine {
    buf: VecDeque<f64>,
}

impl DelayLine {
    pub fn new(len: usize) -> Self {
        let len = len.max(1);
        Self { buf: std::iter::repeat_n(0.0, len).collect() }
    }

    /// Line length for a delay of `delay_s` at sample period `dt` (at least one sample).
    pub fn for_delay(delay_s: f64, dt: f64) -> Self {
        Self::new((delay_s / dt).round() as usize)
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn push(&mut self, x: f64) -> f64 {
        self.buf.push_back(x);
        self.buf.pop_front().unwrap()
    }
}

/// Bilinear (Tustin) discretisation of a proper continuous transfer function
/// of order ≤ 2, in transposed direct form II.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilter {
    b: [f64; 3],
    a: [f64; 3],
    s1: f64,
    s2: f64,
}

impl DiscreteFilter {
    /// `num`, `den` are ascending coefficients in `s` (length ≤ 3).
    pub fn tustin(num: &[f64], den: &[f64], dt: f64) -> Self {
        let c = 2.0 / dt;
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let map = |v: &[f64]| {
            let (p0, p1, p2) = (get(v, 0), get(v, 1), get(v, 2));
            [
                p0 + p1 * c + p2 * c * c,
                2.0 * p0 - 2.0 * p2 * c * c,
                p0 - p1 * c + p2 * c * c,
            ]
        };
        let (b, a) = (map(num), map(den));
        let a0 = a[0];
        Self {
            b: [b[0] / a0, b[1] / a0, b[2] / a0],
            a: [1.0, a[1] / a0, a[2] / a0],
            s1: 0.0,
            s2: 0.0,
        }
    }

    /// Direct feedthrough coefficient.
    pub fn feedthrough(&self) -> f64 {
        self.b[0]
    }

    /// Output the filter would produce for input `x`, without advancing.
    pub fn peek(&self, x: f64) -> f64 {
        self.b[0] * x + self.s1
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.peek(x);
        self.s1 = self.b[1] * x - self.a[1] * y + self.s2;
        self.s2 = self.b[2] * x - self.a[2] * y;
        y
    }

    pub fn is_finite(&self) -> bool {
        self.s1.is_finite() && self.s2.is_finite()
    }

    /// DC gain.
    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Sets the state to steady state under constant input `x`.
    pub fn settle(&mut self, x: f64) {
        let y = self.dc_gain() * x;
        self.s2 = self.b[2] * x - self.a[2] * y;
        self.s1 = y - self.b[0] * x;
    }
}

/// Discrete force controller running at a fixed period, with its output
/// delayed by `round(T/dt)` periods.
#[derive(Debug, Clone)]
pub struct ForceController {
    kind: ControllerKind,
    params: ActuatorParams,
    gains: ControllerGains,
    dt: f64,
    command_delay: DelayLine,
    derivative: Option<DiscreteFilter>,
    integral: f64,
    prev_error: f64,
    dob_q: Option<DiscreteFilter>,
    dob_inverse: Option<DiscreteFilter>,
    /// Last measured force fed to the controller, N.
    pub last_measured_force: f64,
    /// Most recent DOB disturbance estimate, N.
    pub disturbance_estimate: f64,
}

impl ForceController {
    pub fn new(
        kind: ControllerKind,
        params: &ActuatorParams,
        gains: &ControllerGains,
        dt: f64,
    ) -> Result<Self, SimError> {
        params.validate()?;
        gains.validate()?;
        if !(dt > 0.0) {
            return Err(SimError::InvalidConfig(format!("control period must be positive, got {dt}")));
        }
        let derivative = match kind {
            ControllerKind::PDf => {
                let wc = gains.q_d_cutoff.ok_or(VlcaError::MissingFilterCutoff("q_d_cutoff"))?;
                Some(DiscreteFilter::tustin(&[0.0, wc], &[wc, 1.0], dt))
            }
            _ => None,
        };
        let (dob_q, dob_inverse) = match kind {
            ControllerKind::PDmDOB => {
                let wc = gains
                    .q_taud_cutoff
                    .ok_or(VlcaError::MissingFilterCutoff("q_taud_cutoff"))?;
                let z = gains.q_taud_zeta;
                let dq = [wc * wc, 2.0 * z * wc, 1.0];
                // Q·P_c⁻¹ with P_c = (K_p+1)k_r / (M s² + (B + K_dm N_m) s + (K_p+1) k_r)
                let kc = (gains.k_p + 1.0) * params.k_r;
                let w2 = wc * wc / kc;
                let inv_num = [
                    w2 * kc,
                    w2 * (params.effective_damping() + gains.k_dm * params.n_m),
                    w2 * params.effective_mass(),
                ];
                (
                    Some(DiscreteFilter::tustin(&[wc * wc], &dq, dt)),
                    Some(DiscreteFilter::tustin(&inv_num, &dq, dt)),
                )
            }
            _ => (None, None),
        };
        Ok(Self {
            kind,
            params: *params,
            gains: *gains,
            dt,
            command_delay: DelayLine::for_delay(gains.delay_t, dt),
            derivative,
            integral: 0.0,
            prev_error: 0.0,
            dob_q,
            dob_inverse,
            last_measured_force: 0.0,
            disturbance_estimate: 0.0,
        })
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn delay_samples(&self) -> usize {
        self.command_delay.len()
    }

    /// Runs one control period and returns the motor current command that
    /// reaches the amplifier this period.
    ///
    /// `measured_force` is the deflection-based force `k_r·x_r`;
    /// `deflection_rate` is motor velocity expressed as screw-side
    /// deflection rate, m/s.
    pub fn update(&mut self, desired_force: f64, measured_force: f64, deflection_rate: f64) -> f64 {
        let g = &self.gains;
        let p = &self.params;
        self.last_measured_force = measured_force;

        let reference = match (&mut self.dob_q, &mut self.dob_inverse) {
            (Some(q), Some(inv)) => {
                // F_r = F_d − [Q·P_c⁻¹·F_k − Q·F_r], solved for the feedthrough of Q
                let a = inv.step(measured_force);
                let f_r = (desired_force - a + q.peek(0.0)) / (1.0 - q.feedthrough());
                q.step(f_r);
                self.disturbance_estimate = desired_force - f_r;
                f_r
            }
            _ => desired_force,
        };

        let error = reference - measured_force;
        let mut force = reference + g.k_p * error;
        match self.kind {
            ControllerKind::PDf => {
                let d = self.derivative.as_mut().unwrap().step(measured_force);
                force -= g.k_df_for(p) * d;
            }
            ControllerKind::PDm | ControllerKind::PDmDOB => {
                force -= g.k_dm * p.n_m * deflection_rate;
            }
            ControllerKind::PIDm => {
                self.integral += 0.5 * self.dt * (error + self.prev_error);
                force += g.k_i * self.integral - g.k_dm * p.n_m * deflection_rate;
            }
        }
        self.prev_error = error;
        self.command_delay.push(force / p.force_per_amp())
    }

    /// Puts the controller in static equilibrium holding `force` with zero
    /// deflection rate, as if it had been running for a long time.
    pub fn preload(&mut self, force: f64) {
        for f in [&mut self.derivative, &mut self.dob_q, &mut self.dob_inverse].into_iter().flatten() {
            f.settle(force);
        }
        self.integral = 0.0;
        self.prev_error = 0.0;
        self.last_measured_force = force;
        self.disturbance_estimate = 0.0;
        let i = force / self.params.force_per_amp();
        for _ in 0..self.command_delay.len() {
            self.command_delay.push(i);
        }
    }

    pub fn states_finite(&self) -> bool {
        self.integral.is_finite()
            && self.derivative.as_ref().is_none_or(|f| f.is_finite())
            && self.dob_q.as_ref().is_none_or(|f| f.is_finite())
            && self.dob_inverse.as_ref().is_none_or(|f| f.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_line_shifts_impulse_by_length() {
        for n in 1..6 {
            let mut d = DelayLine::new(n);
            let out: Vec<f64> = (0..10).map(|k| d.push(if k == 0 { 1.0 } else { 0.0 })).collect();
            let pos = out.iter().position(|v| *v == 1.0).unwrap();
            assert_eq!(pos, n);
            assert_eq!(out.iter().sum::<f64>(), 1.0);
        }
        assert_eq!(DelayLine::new(0).len(), 1);
        assert_eq!(DelayLine::for_delay(1e-3, 1e-3).len(), 1);
        assert_eq!(DelayLine::for_delay(2.4e-3, 1e-3).len(), 2);
    }

    #[test]
    fn tustin_low_pass_dc_and_nyquist() {
        let wc = 2.0 * std::f64::consts::PI * 60.0;
        let mut f = DiscreteFilter::tustin(&[wc * wc], &[wc * wc, 1.414 * wc, 1.0], 1e-3);
        let mut y = 0.0;
        for _ in 0..2000 {
            y = f.step(1.0);
        }
        assert!((y - 1.0).abs() < 1e-12);
        // bilinear maps s = ∞ to z = −1: alternating input is fully rejected
        let mut f = DiscreteFilter::tustin(&[wc * wc], &[wc * wc, 1.414 * wc, 1.0], 1e-3);
        let mut last = 0.0;
        for k in 0..4000 {
            last = f.step(if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert!(last.abs() < 1e-9);
    }

    #[test]
    fn tustin_integrator_matches_trapezoid() {
        let mut f = DiscreteFilter::tustin(&[1.0], &[0.0, 1.0], 0.1);
        let ys: Vec<f64> = (0..4).map(|_| f.step(1.0)).collect();
        assert!((ys[0] - 0.05).abs() < 1e-15);
        assert!((ys[3] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn controller_holds_static_balance() {
        // with F_k = F_d and zero rate the PD_m output is exactly F_d/N
        let p = ActuatorParams::identified();
        let g = ControllerGains::default();
        let mut c = ForceController::new(ControllerKind::PDm, &p, &g, 1e-3).unwrap();
        let mut i = 0.0;
        for _ in 0..5 {
            i = c.update(100.0, 100.0, 0.0);
        }
        assert!((i - 100.0 / p.force_per_amp()).abs() < 1e-12);
    }

    #[test]
    fn preloaded_controller_stays_put() {
        let p = ActuatorParams::identified();
        for kind in [ControllerKind::PDf, ControllerKind::PDm, ControllerKind::PIDm, ControllerKind::PDmDOB] {
            let g = ControllerGains { k_df: Some(1.0), ..ControllerGains::tracking() };
            let mut c = ForceController::new(kind, &p, &g, 1e-3).unwrap();
            c.preload(800.0);
            for _ in 0..20 {
                let i = c.update(800.0, 800.0, 0.0);
                assert!((i - 800.0 / p.force_per_amp()).abs() < 1e-9, "{kind:?}: {i}");
            }
        }
    }

    #[test]
    fn missing_cutoff_is_an_error() {
        let p = ActuatorParams::identified();
        let g = ControllerGains { q_taud_cutoff: None, ..Default::default() };
        assert!(ForceController::new(ControllerKind::PDmDOB, &p, &g, 1e-3).is_err());
    }
}
