use super::{DelayedTransferFunction, LintfError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Anything that can be evaluated along the imaginary axis.
pub trait FrequencyResponse {
    fn response(&self, omega: f64) -> Result<Complex64, LintfError>;

    /// Phase asymptote in degrees as `ω → 0⁺`, used to pick the branch of
    /// the first unwrapped sample.
    fn low_frequency_phase_deg(&self) -> f64;
}

impl FrequencyResponse for DelayedTransferFunction {
    fn response(&self, omega: f64) -> Result<Complex64, LintfError> {
        self.eval(omega)
    }

    fn low_frequency_phase_deg(&self) -> f64 {
        DelayedTransferFunction::low_frequency_phase_deg(self)
    }
}

impl<T: FrequencyResponse + ?Sized> FrequencyResponse for &T {
    fn response(&self, omega: f64) -> Result<Complex64, LintfError> {
        (**self).response(omega)
    }

    fn low_frequency_phase_deg(&self) -> f64 {
        (**self).low_frequency_phase_deg()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponsePoint {
    pub omega: f64,
    pub magnitude: f64,
    pub phase_deg: f64,
}

impl FrequencyResponsePoint {
    pub fn complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase_deg.to_radians())
    }

    pub fn hz(&self) -> f64 {
        self.omega / (2.0 * std::f64::consts::PI)
    }

    pub fn magnitude_db(&self) -> f64 {
        20.0 * self.magnitude.log10()
    }
}

/// Wraps a degree value into `(-180, 180]`.
pub fn wrap_deg(mut d: f64) -> f64 {
    d %= 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

/// Shifts `principal` by whole turns so it lands closest to `reference`.
pub fn nearest_branch(principal: f64, reference: f64) -> f64 {
    principal + 360.0 * ((reference - principal) / 360.0).round()
}

/// Log-spaced grid from `omega_min` to `omega_max` inclusive.
pub fn log_grid(omega_min: f64, omega_max: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (omega_max / omega_min).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1);
    (0..=n)
        .map(|i| omega_min * 10f64.powf(decades * i as f64 / n as f64))
        .collect()
}

/// Evaluates `sys` on `omegas` (increasing) and unwraps the phase, starting
/// from the branch nearest the low-frequency asymptote.
pub fn response_at(
    sys: &impl FrequencyResponse,
    omegas: &[f64],
) -> Result<Vec<FrequencyResponsePoint>, LintfError> {
    let mut out: Vec<FrequencyResponsePoint> = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let v = sys.response(w)?;
        let principal = v.arg().to_degrees();
        let phase = match out.last() {
            None => nearest_branch(principal, sys.low_frequency_phase_deg()),
            Some(prev) => prev.phase_deg + wrap_deg(principal - prev.phase_deg),
        };
        out.push(FrequencyResponsePoint {
            omega: w,
            magnitude: v.norm(),
            phase_deg: phase,
        });
    }
    Ok(out)
}

pub fn bode_sweep(
    sys: &impl FrequencyResponse,
    omega_min: f64,
    omega_max: f64,
    points_per_decade: usize,
) -> Result<Vec<FrequencyResponsePoint>, LintfError> {
    if !(omega_min > 0.0 && omega_min < omega_max) {
        return Err(LintfError::InvalidArgument(format!(
            "need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if points_per_decade < 8 {
        return Err(LintfError::InvalidArgument(format!(
            "points_per_decade must be at least 8, got {points_per_decade}"
        )));
    }
    response_at(sys, &log_grid(omega_min, omega_max, points_per_decade))
}

pub const BODE_CSV_HEADER: &str = "omega_rad_s,magnitude,phase_deg";

pub fn write_bode_csv<W: Write>(mut w: W, points: &[FrequencyResponsePoint]) -> io::Result<()> {
    writeln!(w, "{BODE_CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{:.9e},{:.9e},{:.9}", p.omega, p.magnitude, p.phase_deg)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gain_sweep() {
        let g = DelayedTransferFunction::gain(2.0);
        let pts = bode_sweep(&g, 0.1, 100.0, 10).unwrap();
        assert_eq!(pts.len(), 31);
        for p in &pts {
            assert!((p.magnitude - 2.0).abs() < 1e-15);
            assert_eq!(p.phase_deg, 0.0);
        }
        assert!(pts.windows(2).all(|w| w[1].omega > w[0].omega));
    }

    #[test]
    fn critically_damped_at_natural_frequency() {
        let g = DelayedTransferFunction::rational(&[1.0], &[1.0, 2.0, 1.0]).unwrap();
        let pts = response_at(&g, &[0.01, 0.1, 1.0]).unwrap();
        assert!((pts[2].magnitude - 0.5).abs() < 1e-15);
        assert!((pts[2].phase_deg + 90.0).abs() < 1e-12);
    }

    #[test]
    fn phase_unwraps_through_delay() {
        // 20 ms delay: phase −ω·T reaches several full turns by 1e3 rad/s
        let g = DelayedTransferFunction::gain(1.0).with_delay(0.02).unwrap();
        let pts = bode_sweep(&g, 0.1, 1000.0, 24).unwrap();
        for p in &pts {
            assert!((p.phase_deg + (0.02 * p.omega).to_degrees()).abs() < 1e-9);
        }
    }

    #[test]
    fn triple_integrator_starts_on_asymptote() {
        let g = DelayedTransferFunction::rational(&[1.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let pts = bode_sweep(&g, 0.1, 10.0, 8).unwrap();
        assert!((pts[0].phase_deg + 270.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_sweep_arguments() {
        let g = DelayedTransferFunction::gain(1.0);
        assert!(bode_sweep(&g, 1.0, 0.5, 10).is_err());
        assert!(bode_sweep(&g, 0.0, 1.0, 10).is_err());
        assert!(bode_sweep(&g, 0.1, 1.0, 7).is_err());
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        let pts = [FrequencyResponsePoint { omega: 1.0, magnitude: 2.0, phase_deg: -3.0 }];
        write_bode_csv(&mut buf, &pts).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("omega_rad_s,magnitude,phase_deg\n"));
        assert_eq!(s.lines().count(), 2);
    }
}
