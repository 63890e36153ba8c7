use super::PowerthermError;
use std::io::{self, Write};

/// Motor power below this is treated as idle, W.
pub const MIN_MOTOR_POWER_W: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub t: f64,
    /// Electrical input `V·I`, W.
    pub input_power: f64,
    /// Motor shaft power `k_τ·i·ω_m`, W.
    pub motor_power: f64,
    /// Joint power `τ·q̇`, W.
    pub joint_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlow {
    pub samples: Vec<PowerSample>,
    /// Time average of joint/motor power over positive-power intervals.
    pub drivetrain_efficiency_avg: f64,
    /// Time average of motor/input power over the same intervals.
    pub electrical_efficiency_avg: f64,
    /// Duration of the averaged intervals, s.
    pub active_duration_s: f64,
}

/// Averages efficiencies over the intervals where the motor delivers more
/// than [`MIN_MOTOR_POWER_W`] and the joints absorb positive power.
pub fn power_flow(samples: Vec<PowerSample>) -> Result<PowerFlow, PowerthermError> {
    if samples.len() < 2 {
        return Err(PowerthermError::InvalidInput("need at least two samples".into()));
    }
    if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(PowerthermError::InvalidInput("sample times must increase strictly".into()));
    }
    if samples
        .iter()
        .any(|s| !(s.input_power.is_finite() && s.motor_power.is_finite() && s.joint_power.is_finite()))
    {
        return Err(PowerthermError::InvalidInput("non-finite power sample".into()));
    }
    let (mut span, mut drive, mut elec) = (0.0, 0.0, 0.0);
    for w in samples.windows(2) {
        let s = &w[0];
        if s.motor_power > MIN_MOTOR_POWER_W && s.joint_power > 0.0 {
            let dt = w[1].t - s.t;
            span += dt;
            drive += dt * s.joint_power / s.motor_power;
            if s.input_power > 0.0 {
                elec += dt * s.motor_power / s.input_power;
            }
        }
    }
    if span == 0.0 {
        return Err(PowerthermError::NoPositivePowerInterval);
    }
    Ok(PowerFlow {
        samples,
        drivetrain_efficiency_avg: drive / span,
        electrical_efficiency_avg: elec / span,
        active_duration_s: span,
    })
}

pub const EFFICIENCY_CSV_HEADER: &str =
    "t_s,input_power_W,motor_power_W,joint_power_W,drivetrain_efficiency,electrical_efficiency";

/// Per-sample power and instantaneous efficiencies; efficiencies are left
/// empty outside the averaged intervals.
pub fn write_efficiency_csv<W: Write>(mut w: W, flow: &PowerFlow) -> io::Result<()> {
    writeln!(w, "{EFFICIENCY_CSV_HEADER}")?;
    for s in &flow.samples {
        let active = s.motor_power > MIN_MOTOR_POWER_W && s.joint_power > 0.0;
        let (d, e) = if active {
            (
                format!("{:.6}", s.joint_power / s.motor_power),
                if s.input_power > 0.0 { format!("{:.6}", s.motor_power / s.input_power) } else { String::new() },
            )
        } else {
            (String::new(), String::new())
        };
        writeln!(w, "{:.4},{:.6},{:.6},{:.6},{d},{e}", s.t, s.input_power, s.motor_power, s.joint_power)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> (f64, f64)) -> Vec<PowerSample> {
        (0..100)
            .map(|k| {
                let t = k as f64 * 0.01;
                let (m, j) = f(t);
                PowerSample { t, input_power: m / 0.8, motor_power: m, joint_power: j }
            })
            .collect()
    }

    #[test]
    fn constant_ratio_average() {
        let flow = power_flow(series(|t| {
            let m = 100.0 + 50.0 * (3.0 * t).sin();
            (m, 0.89 * m)
        }))
        .unwrap();
        assert!((flow.drivetrain_efficiency_avg - 0.89).abs() < 1e-12);
        assert!((flow.electrical_efficiency_avg - 0.8).abs() < 1e-12);
    }

    #[test]
    fn negative_joint_power_everywhere() {
        let e = power_flow(series(|_| (100.0, -10.0)));
        assert_eq!(e, Err(PowerthermError::NoPositivePowerInterval));
    }

    #[test]
    fn regenerative_intervals_are_skipped() {
        let flow = power_flow(series(|t| if t < 0.5 { (100.0, 90.0) } else { (-50.0, -60.0) })).unwrap();
        assert!((flow.drivetrain_efficiency_avg - 0.9).abs() < 1e-12);
        assert!((flow.active_duration_s - 0.5).abs() < 1e-9);
    }
}
