use super::TestbedError;
use nalgebra::Vector2;
use std::f64::consts::PI;

/// Desired hip position, velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HipTarget {
    pub x: Vector2<f64>,
    pub xd: Vector2<f64>,
    pub xdd: Vector2<f64>,
}

/// Hip trajectory in the sagittal plane, metres from the ankle.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// `center + amplitude·sin(2πf·t)·direction`; `amplitude` is half the travel.
    Sine { center: [f64; 2], direction: [f64; 2], amplitude: f64, freq_hz: f64 },
    /// Clamped uniform quadratic B-spline through the control points,
    /// traversed once over `duration_s` and held at the end.
    BSpline { points: Vec<[f64; 2]>, duration_s: f64 },
}

impl Trajectory {
    pub fn vertical_sine(center: [f64; 2], travel: f64, freq_hz: f64) -> Self {
        Self::Sine { center, direction: [0.0, 1.0], amplitude: 0.5 * travel, freq_hz }
    }

    pub fn validate(&self) -> Result<(), TestbedError> {
        match self {
            Self::Sine { direction, freq_hz, amplitude, .. } => {
                let n = (direction[0].powi(2) + direction[1].powi(2)).sqrt();
                if !(n > 0.0) || !(*freq_hz >= 0.0) || !amplitude.is_finite() {
                    return Err(TestbedError::InvalidConfig("sine needs a direction and frequency ≥ 0".into()));
                }
            }
            Self::BSpline { points, duration_s } => {
                if points.len() < 3 || !(*duration_s > 0.0) {
                    return Err(TestbedError::InvalidConfig("B-spline needs ≥ 3 points and a positive duration".into()));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> HipTarget {
        match self {
            Self::Sine { center, direction, amplitude, freq_hz } => {
                let amplitude = *amplitude;
                let d = Vector2::from(*direction).normalize();
                let w = 2.0 * PI * freq_hz;
                let (s, c) = (w * t).sin_cos();
                HipTarget {
                    x: Vector2::from(*center) + d * amplitude * s,
                    xd: d * amplitude * w * c,
                    xdd: -d * amplitude * w * w * s,
                }
            }
            Self::BSpline { points, duration_s } => bspline(points, *duration_s, t),
        }
    }
}

fn bspline(points: &[[f64; 2]], duration: f64, t: f64) -> HipTarget {
    let n = points.len();
    let spans = n - 2;
    let u = (t / duration).clamp(0.0, 1.0) * spans as f64;
    let i = (u.floor() as usize).min(spans - 1);
    let s = u - i as f64;
    let p = |k: usize| Vector2::from(points[k]);
    let knot = |k: isize| (k.clamp(0, spans as isize)) as f64;
    // degree-2 de Boor on knots clamped to [0, spans]
    let a1 = |j: isize| {
        let (lo, hi) = (knot(j), knot(j + 2));
        if hi > lo { (u - lo) / (hi - lo) } else { 0.0 }
    };
    let (j0, j1) = (i as isize - 1, i as isize);
    let d0 = p(i) * (1.0 - a1(j0)) + p(i + 1) * a1(j0);
    let d_1 = p(i + 1) * (1.0 - a1(j1)) + p(i + 2) * a1(j1);
    let x = d0 * (1.0 - s) + d_1 * s;
    // derivative control points of the clamped spline
    let q = |j: usize| {
        let h = knot(j as isize + 1) - knot(j as isize - 1);
        (p(j + 1) - p(j)) * (2.0 / h)
    };
    let dxdu = q(i) * (1.0 - s) + q(i + 1) * s;
    let d2xdu2 = q(i + 1) - q(i);
    let (xd, xdd) = if t < 0.0 || t > duration {
        (Vector2::zeros(), Vector2::zeros())
    } else {
        let k = spans as f64 / duration;
        (dxdu * k, d2xdu2 * k * k)
    };
    HipTarget { x, xd, xdd }
}
