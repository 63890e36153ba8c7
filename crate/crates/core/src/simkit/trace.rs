use super::{ChirpSpec, SimError, SimWarning};
use std::io::{self, Write};

pub const SIM_TRACE_CSV_HEADER: &str = "t_s,f_cmd_N,f_meas_N,f_loadcell_N,i_m_A,x_r_m,q_out,temp_C";

/// Uniformly sampled simulation record. Columns a scenario does not produce
/// are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub dt: f64,
    pub t: Vec<f64>,
    /// Commanded force, N.
    pub f_cmd: Option<Vec<f64>>,
    /// Deflection-based measured force `k_r·x_r`, N.
    pub f_meas: Option<Vec<f64>>,
    /// Damping contribution `b_r·ẋ_r`, N, kept apart from `f_meas`.
    pub f_damping: Option<Vec<f64>>,
    pub f_loadcell: Option<Vec<f64>>,
    /// Applied motor current, A.
    pub i_m: Option<Vec<f64>>,
    /// Elastic element deflection, m.
    pub x_r: Option<Vec<f64>>,
    /// Output (joint) position.
    pub q_out: Option<Vec<f64>>,
    /// Winding temperature, °C.
    pub temp_c: Option<Vec<f64>>,
    /// Excitation, when the run was a chirp.
    pub chirp: Option<ChirpSpec>,
    pub warnings: Vec<SimWarning>,
    pub step: Option<StepMetrics>,
}

impl SimTrace {
    pub fn new(dt: f64, n: usize) -> Self {
        Self { dt, t: (0..n).map(|k| k as f64 * dt).collect(), ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn columns(&self) -> [Option<&Vec<f64>>; 7] {
        [
            self.f_cmd.as_ref(),
            self.f_meas.as_ref(),
            self.f_loadcell.as_ref(),
            self.i_m.as_ref(),
            self.x_r.as_ref(),
            self.q_out.as_ref(),
            self.temp_c.as_ref(),
        ]
    }

    /// Checks equal column lengths and uniform sampling.
    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.len();
        let extra = self.f_damping.as_ref().map(|c| c.len());
        if self.columns().iter().flatten().any(|c| c.len() != n) || extra.is_some_and(|m| m != n) {
            return Err(SimError::InvalidConfig("trace columns differ in length".into()));
        }
        let tol = 1e-9 * self.dt.max(1e-12) * n.max(1) as f64;
        if self.t.iter().enumerate().any(|(k, t)| (t - k as f64 * self.dt).abs() > tol) {
            return Err(SimError::InvalidConfig("trace is not uniformly sampled".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SIM_TRACE_CSV_HEADER}")?;
        let cols = self.columns();
        for (k, t) in self.t.iter().enumerate() {
            write!(w, "{t:.6}")?;
            for c in &cols {
                match c {
                    Some(v) => write!(w, ",{:.9e}", v[k])?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn saturated(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, SimWarning::Saturation { .. }))
    }
}

/// Step-response summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub target: f64,
    pub peak: f64,
    /// `(peak − target)/|target|`, floored at 0.
    pub overshoot: f64,
    /// Time after the step at which the response last enters the ±2 % band;
    /// `None` if it is outside the band at the end of the record.
    pub settling_time_s: Option<f64>,
}

/// Metrics of `y` for a step to `target` applied at `t0`.
pub fn step_metrics(t: &[f64], y: &[f64], target: f64, t0: f64) -> StepMetrics {
    let band = 0.02 * target.abs();
    let sign = target.signum();
    let after = || t.iter().zip(y).filter(|(ti, _)| **ti >= t0);
    let peak = after().map(|(_, v)| v * sign).fold(f64::NEG_INFINITY, f64::max) * sign;
    let overshoot = if target == 0.0 { 0.0 } else { ((peak - target) * sign / target.abs()).max(0.0) };
    let last_out = after().filter(|(_, v)| (**v - target).abs() > band).map(|(ti, _)| *ti).next_back();
    let settling_time_s = match last_out {
        None => Some(0.0),
        Some(tl) => {
            let next = t.iter().find(|ti| **ti > tl).copied();
            next.map(|tn| tn - t0)
        }
    };
    StepMetrics { target, peak, overshoot, settling_time_s }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_leaves_absent_columns_empty() {
        let mut tr = SimTrace::new(1e-3, 2);
        tr.f_cmd = Some(vec![1.0, 2.0]);
        tr.x_r = Some(vec![0.0, 1e-5]);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], SIM_TRACE_CSV_HEADER);
        let fields: Vec<_> = lines[2].split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[2], "");
        assert!(!fields[5].is_empty());
        assert_eq!(fields[7], "");
    }

    #[test]
    fn validate_catches_ragged_columns() {
        let mut tr = SimTrace::new(1e-3, 3);
        tr.i_m = Some(vec![0.0; 2]);
        assert!(tr.validate().is_err());
        tr.i_m = Some(vec![0.0; 3]);
        tr.validate().unwrap();
    }

    #[test]
    fn step_metrics_of_damped_response() {
        // y = 1 − e^{−t}(cos 5t + 0.2 sin 5t), ζ ≈ 0.196
        let t: Vec<f64> = (0..20_000).map(|k| k as f64 * 1e-3).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.0 - (-t).exp() * ((5.0 * t).cos() + 0.2 * (5.0 * t).sin())).collect();
        let m = step_metrics(&t, &y, 1.0, 0.0);
        let zeta = 1.0 / 26f64.sqrt();
        let expected = (-PI_ * zeta / (1.0 - zeta * zeta).sqrt()).exp();
        assert!((m.overshoot - expected).abs() < 1e-4, "{} vs {expected}", m.overshoot);
        let ts = m.settling_time_s.unwrap();
        assert!(ts > 3.0 && ts < 4.2, "{ts}");
    }

    const PI_: f64 = std::f64::consts::PI;
}
