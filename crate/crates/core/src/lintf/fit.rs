use super::frequency::{nearest_branch, FrequencyResponsePoint};
use super::LintfError;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Parameters of `k·ω_n² / (s² + 2ζω_n·s + ω_n²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderFit {
    pub gain: f64,
    pub omega_n: f64,
    pub zeta: f64,
    /// Final sum of squared residuals.
    pub residual: f64,
}

impl SecondOrderFit {
    pub fn eval(&self, omega: f64) -> Complex64 {
        second_order(self.gain, self.omega_n, self.zeta, omega)
    }
}

pub fn second_order(k: f64, wn: f64, zeta: f64, omega: f64) -> Complex64 {
    k * wn * wn / Complex64::new(wn * wn - omega * omega, 2.0 * zeta * wn * omega)
}

/// Relative weight of phase error (radians) against log-magnitude error.
pub const PHASE_WEIGHT: f64 = 1.0;
const STALL_LIMIT: usize = 50;
const MAX_ITERATIONS: usize = 2000;

struct Problem {
    omega: Vec<f64>,
    log_mag: Vec<f64>,
    phase: Vec<f64>,
}

impl Problem {
    /// Residual vector and its Jacobian with respect to (ln k, ln ω_n, ln ζ).
    fn residuals(&self, theta: &Vector3<f64>, with_jac: bool) -> (Vec<f64>, Vec<[f64; 3]>) {
        let (k, wn, z) = (theta[0].exp(), theta[1].exp(), theta[2].exp());
        let n = self.omega.len();
        let mut r = Vec::with_capacity(2 * n);
        let mut jac = Vec::with_capacity(if with_jac { 2 * n } else { 0 });
        for i in 0..n {
            let w = self.omega[i];
            let d = Complex64::new(wn * wn - w * w, 2.0 * z * wn * w);
            let log_h = k.ln() + 2.0 * wn.ln() - d.ln();
            // second-order phase is continuous in (−π, 0)
            let phase = -(2.0 * z * wn * w).atan2(wn * wn - w * w);
            r.push(log_h.re - self.log_mag[i]);
            r.push(PHASE_WEIGHT * (phase - self.phase[i]));
            if with_jac {
                let d_wn = Complex64::new(2.0, 0.0)
                    - Complex64::new(2.0 * wn * wn, 2.0 * z * wn * w) / d;
                let d_z = -Complex64::new(0.0, 2.0 * z * wn * w) / d;
                jac.push([1.0, d_wn.re, d_z.re]);
                jac.push([0.0, PHASE_WEIGHT * d_wn.im, PHASE_WEIGHT * d_z.im]);
            }
        }
        (r, jac)
    }

    fn cost(&self, theta: &Vector3<f64>) -> f64 {
        self.residuals(theta, false).0.iter().map(|x| x * x).sum()
    }
}

/// Least-squares fit of a second-order low-pass to measured response points.
///
/// Minimises squared log-magnitude error plus weighted squared phase error
/// with Levenberg–Marquardt in log-parameters, so `ω_n` and `ζ` stay positive.
pub fn fit_second_order(points: &[FrequencyResponsePoint]) -> Result<SecondOrderFit, LintfError> {
    if points.len() < 10 {
        return Err(LintfError::InvalidArgument(format!(
            "need at least 10 points, got {}",
            points.len()
        )));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let (w_lo, w_hi) = (pts[0].omega, pts[pts.len() - 1].omega);
    if w_hi / w_lo < 10.0 {
        return Err(LintfError::InvalidArgument(
            "points must span at least one decade".into(),
        ));
    }
    if pts.iter().any(|p| !(p.magnitude > 0.0) || !p.phase_deg.is_finite()) {
        return Err(LintfError::InvalidArgument(
            "magnitudes must be positive and phases finite".into(),
        ));
    }

    // bring the phase onto the branch that starts near 0°
    let shift = nearest_branch(pts[0].phase_deg, 0.0) - pts[0].phase_deg;
    let problem = Problem {
        omega: pts.iter().map(|p| p.omega).collect(),
        log_mag: pts.iter().map(|p| p.magnitude.ln()).collect(),
        phase: pts.iter().map(|p| (p.phase_deg + shift).to_radians()).collect(),
    };

    let theta0 = initial_guess(&pts, shift);
    let mut theta = theta0;
    let mut cost = problem.cost(&theta);
    let mut lambda = 1e-3;
    let mut stalled = 0;

    for _ in 0..MAX_ITERATIONS {
        let (r, jac) = problem.residuals(&theta, true);
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (ri, row) in r.iter().zip(&jac) {
            let j = Vector3::new(row[0], row[1], row[2]);
            jtj += j * j.transpose();
            jtr += j * *ri;
        }
        if jtr.norm() < 1e-14 * (1.0 + cost) {
            break;
        }
        let mut damped = jtj;
        for d in 0..3 {
            damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Err(LintfError::FitDiverged { iterations: stalled });
            }
            continue;
        };
        let candidate = theta + step;
        let new_cost = problem.cost(&candidate);
        if new_cost.is_finite() && new_cost < cost {
            let converged = cost - new_cost <= 1e-15 * cost.max(1e-300) || step.norm() < 1e-13;
            theta = candidate;
            cost = new_cost;
            lambda = (lambda * 0.3).max(1e-12);
            stalled = 0;
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            stalled += 1;
            if stalled >= STALL_LIMIT {
                // a stall at a perfect fit is convergence, not divergence
                if cost < 1e-20 * problem.omega.len() as f64 {
                    break;
                }
                return Err(LintfError::FitDiverged { iterations: stalled });
            }
        }
    }

    Ok(SecondOrderFit {
        gain: theta[0].exp(),
        omega_n: theta[1].exp(),
        zeta: theta[2].exp(),
        residual: cost,
    })
}

fn initial_guess(pts: &[FrequencyResponsePoint], shift: f64) -> Vector3<f64> {
    let k0 = pts[0].magnitude;
    // ω_n where the phase passes −90°, else the magnitude peak
    let crossing = pts.windows(2).find_map(|w| {
        let (a, b) = (w[0].phase_deg + shift + 90.0, w[1].phase_deg + shift + 90.0);
        (a >= 0.0 && b < 0.0).then(|| {
            let t = a / (a - b);
            (w[0].omega.ln() + t * (w[1].omega / w[0].omega).ln()).exp()
        })
    });
    let wn0 = crossing.unwrap_or_else(|| {
        pts.iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
            .map(|p| p.omega)
            .unwrap()
    });
    // |H(ω_n)| = k / (2ζ)
    let mag_at_wn = pts
        .iter()
        .min_by(|a, b| (a.omega / wn0).ln().abs().total_cmp(&(b.omega / wn0).ln().abs()))
        .map(|p| p.magnitude)
        .unwrap();
    let z0 = (k0 / (2.0 * mag_at_wn)).clamp(0.01, 10.0);
    Vector3::new(k0.ln(), wn0.ln(), z0.ln())
}
