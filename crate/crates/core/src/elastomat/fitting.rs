use super::ElastomatError;
use crate::lintf::{fit_second_order, FrequencyResponsePoint};
use std::io::Read;

/// Drivetrain damping of the material testbed, N·s/m.
pub const TESTBED_DAMPING: f64 = 8000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    /// N/m.
    pub stiffness: f64,
    pub intercept: f64,
    pub r_square: f64,
}

/// Least-squares line through `(displacement m, force N)` samples.
pub fn fit_linear_stiffness(samples: &[(f64, f64)]) -> Result<LinearFit, ElastomatError> {
    if samples.len() < 5 {
        return Err(ElastomatError::InvalidInput(format!("need at least 5 samples, got {}", samples.len())));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let syy: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(ElastomatError::DegenerateData("displacement has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = samples.iter().map(|s| (s.1 - intercept - slope * s.0).powi(2)).sum();
    let r_square = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(LinearFit { stiffness: slope, intercept, r_square })
}

/// Single-exponential relaxation `F(t) = F0·(1 − c·(1 − e^{−t/τ}))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationFit {
    pub f0: f64,
    pub creep_pct: f64,
    pub tau: f64,
}

impl RelaxationFit {
    pub fn force(&self, t: f64) -> f64 {
        self.f0 * (1.0 - self.creep_pct / 100.0 * (1.0 - (-t / self.tau).exp()))
    }
}

/// Linear least squares of `F = a + b·e^{−t/τ}` at fixed τ; returns (a, b, sse).
fn project(samples: &[(f64, f64)], tau: f64) -> (f64, f64, f64) {
    let (mut s1, mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, y) in samples {
        let e = (-t / tau).exp();
        s1 += 1.0;
        se += e;
        see += e * e;
        sy += y;
        sey += e * y;
    }
    let det = s1 * see - se * se;
    let (a, b) = if det.abs() > 1e-12 * s1 * see {
        ((see * sy - se * sey) / det, (s1 * sey - se * sy) / det)
    } else {
        (sy / s1, 0.0)
    };
    let sse = samples.iter().map(|&(t, y)| (y - a - b * (-t / tau).exp()).powi(2)).sum();
    (a, b, sse)
}

/// Fits a relaxation record `(t s, force N)` by separating the linear
/// amplitudes from the time constant, which is found by golden-section
/// search on `ln τ`.
pub fn fit_stress_relaxation(samples: &[(f64, f64)]) -> Result<RelaxationFit, ElastomatError> {
    if samples.len() < 5 {
        return Err(ElastomatError::InvalidInput("need at least 5 samples".into()));
    }
    let t0 = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t1 = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if t1 - t0 < 100.0 || t0.abs() > 1.0 {
        return Err(ElastomatError::InvalidInput("record must start near t = 0 and cover 100 s".into()));
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) {
        return Err(ElastomatError::InvalidInput("non-finite sample".into()));
    }
    let span = t1 - t0;
    let sse = |lt: f64| project(samples, lt.exp()).2;
    let (lo, hi) = ((span * 1e-3).ln(), (span * 10.0).ln());
    let grid = 200;
    let best = (0..=grid)
        .map(|i| lo + (hi - lo) * i as f64 / grid as f64)
        .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
        .unwrap();
    let step = (hi - lo) / grid as f64;
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (sse(c), sse(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sse(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sse(d);
        }
    }
    let tau = (0.5 * (a + b)).exp();
    let (amp_inf, amp_tr, _) = project(samples, tau);
    let f0 = amp_inf + amp_tr;
    if !f0.is_finite() || !tau.is_finite() || f0 == 0.0 {
        return Err(ElastomatError::FitDiverged);
    }
    let c = amp_tr / f0;
    if c <= 0.0 {
        // force did not decay: constant model
        let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
        return Ok(RelaxationFit { f0: mean, creep_pct: 0.0, tau });
    }
    Ok(RelaxationFit { f0, creep_pct: 100.0 * c, tau })
}

/// Material damping from a current-to-force chirp response of the testbed:
/// total damping `2ζω_n·m` of a second-order fit, minus the testbed's own
/// damping, floored at zero.
pub fn estimate_damping_from_chirp(
    points: &[FrequencyResponsePoint],
    moving_mass: f64,
    testbed_damping: f64,
) -> Result<f64, ElastomatError> {
    if !(moving_mass > 0.0) || !(testbed_damping >= 0.0) {
        return Err(ElastomatError::InvalidInput("mass must be positive, damping non-negative".into()));
    }
    let fit = fit_second_order(points)?;
    let total = 2.0 * fit.zeta * fit.omega_n * moving_mass;
    Ok((total - testbed_damping).max(0.0))
}

/// Reads a two-column numeric CSV; a non-numeric first row is taken as a header.
pub fn read_xy_csv<R: Read>(r: R) -> Result<Vec<(f64, f64)>, ElastomatError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        if row.len() < 2 {
            return Err(ElastomatError::InvalidInput(format!("row {} has fewer than two columns", i + 1)));
        }
        match (row[0].parse::<f64>(), row[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => out.push((x, y)),
            _ if i == 0 => continue,
            _ => return Err(ElastomatError::InvalidInput(format!("row {} is not numeric", i + 1))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lintf::{log_grid, second_order};

    #[test]
    fn exact_line() {
        let s: Vec<_> = (0..20).map(|i| {
            let x = i as f64 * 1e-4;
            (x, 8.109e6 * x)
        }).collect();
        let f = fit_linear_stiffness(&s).unwrap();
        assert!((f.stiffness - 8.109e6).abs() < 1e-3);
        assert!((f.r_square - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hysteresis_loop_keeps_centerline_slope() {
        // loading branch 2.5 % above, unloading 2.5 % below the centreline
        let k = 8.109e6;
        let mut s = Vec::new();
        for i in 0..=50 {
            let x = i as f64 * 2e-5;
            let w = 0.025 * k * 1e-3 * (std::f64::consts::PI * x / 1e-3).sin();
            s.push((x, k * x + w));
            s.push((x, k * x - w));
        }
        let f = fit_linear_stiffness(&s).unwrap();
        assert!(f.r_square < 1.0);
        assert!((f.stiffness / k - 1.0).abs() < 0.02);
    }

    #[test]
    fn degenerate_displacement() {
        let s = vec![(1e-3, 1.0), (1e-3, 2.0), (1e-3, 3.0), (1e-3, 4.0), (1e-3, 5.0)];
        assert!(matches!(fit_linear_stiffness(&s), Err(ElastomatError::DegenerateData(_))));
    }

    fn relax(f0: f64, c: f64, tau: f64) -> Vec<(f64, f64)> {
        (0..=300).map(|i| {
            let t = i as f64;
            (t, f0 * (1.0 - c * (1.0 - (-t / tau).exp())))
        }).collect()
    }

    #[test]
    fn relaxation_round_trip() {
        let f = fit_stress_relaxation(&relax(1000.0, 0.153, 30.0)).unwrap();
        assert!((f.creep_pct - 15.3).abs() < 1e-6, "{f:?}");
        assert!((f.tau / 30.0 - 1.0).abs() < 1e-6);
        assert!((f.f0 / 1000.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_force_has_no_creep() {
        let f = fit_stress_relaxation(&relax(500.0, 0.0, 30.0)).unwrap();
        assert!(f.creep_pct.abs() < 1e-9);
        assert!(f.tau > 0.0);
    }

    fn plant_points(m: f64, k: f64, b: f64) -> Vec<FrequencyResponsePoint> {
        let wn = (k / m).sqrt();
        let z = b / (2.0 * (k * m).sqrt());
        log_grid(wn / 30.0, wn * 30.0, 20)
            .into_iter()
            .map(|w| {
                let h = second_order(1.0, wn, z, w);
                FrequencyResponsePoint { omega: w, magnitude: h.norm(), phase_deg: h.arg().to_degrees() }
            })
            .collect()
    }

    #[test]
    fn damping_subtracts_testbed() {
        let (m, k) = (420.0, 8.109e6);
        let d = |b| estimate_damping_from_chirp(&plant_points(m, k, b), m, TESTBED_DAMPING).unwrap();
        assert!((d(24000.0) - 16000.0).abs() < 1e-3);
        assert!(d(8000.0).abs() < 1e-3);
        let (m, k) = (420.0, 5.757e7);
        assert!((d_for(m, k, 250000.0) - 242000.0).abs() < 1e-2);
    }

    fn d_for(m: f64, k: f64, b: f64) -> f64 {
        estimate_damping_from_chirp(&plant_points(m, k, b), m, TESTBED_DAMPING).unwrap()
    }

    #[test]
    fn xy_csv_with_header() {
        let text = "t_s,force_N\n0,10\n1, 9.5\n";
        assert_eq!(read_xy_csv(text.as_bytes()).unwrap(), vec![(0.0, 10.0), (1.0, 9.5)]);
        assert!(read_xy_csv("0,1\nx,2\n".as_bytes()).is_err());
    }
}
