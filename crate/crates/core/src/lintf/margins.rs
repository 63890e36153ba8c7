use super::frequency::{log_grid, nearest_branch, response_at, FrequencyResponse};
use super::LintfError;
use serde::{Deserialize, Serialize};

/// Frequency band scanned for crossovers, rad/s.
pub const MARGIN_BAND: (f64, f64) = (1e-2, 1e5);
/// Pre-scan density before bisection refinement.
pub const MARGIN_SCAN_POINTS_PER_DECADE: usize = 200;
const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Minimum over all unity-gain crossings of `180° + phase`.
    pub phase_margin_deg: f64,
    pub gain_crossover_rad_s: f64,
    /// `+∞` when the phase never reaches −180° in the band.
    pub gain_margin_db: f64,
    pub phase_crossover_rad_s: Option<f64>,
    pub crossover_count: usize,
}

impl StabilityReport {
    pub fn gain_crossover_hz(&self) -> f64 {
        self.gain_crossover_rad_s / (2.0 * std::f64::consts::PI)
    }
}

/// Bisection on `log ω` for a sign change of `f`, to relative tolerance `REL_TOL`.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    f: &mut impl FnMut(f64) -> Result<f64, LintfError>,
) -> Result<f64, LintfError> {
    let mut f_lo = f(lo)?;
    while (hi - lo) > REL_TOL * lo {
        let mid = (lo * hi).sqrt();
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Gain and phase margins of an open-loop response.
pub fn stability_margins(open_loop: &impl FrequencyResponse) -> Result<StabilityReport, LintfError> {
    let grid = log_grid(MARGIN_BAND.0, MARGIN_BAND.1, MARGIN_SCAN_POINTS_PER_DECADE);
    let pts = response_at(open_loop, &grid)?;

    // unwrapped phase near ω, anchored on the bracketing scan samples
    let phase_near = |w: f64, i: usize| -> Result<f64, LintfError> {
        let a = &pts[i];
        let b = &pts[i + 1];
        let t = (w / a.omega).ln() / (b.omega / a.omega).ln();
        let reference = a.phase_deg + t * (b.phase_deg - a.phase_deg);
        let principal = open_loop.response(w)?.arg().to_degrees();
        Ok(nearest_branch(principal, reference))
    };

    let mut best: Option<(f64, f64)> = None;
    let mut count = 0;
    for i in 0..pts.len() - 1 {
        let (a, b) = (pts[i].magnitude.ln(), pts[i + 1].magnitude.ln());
        if a == 0.0 || (a > 0.0) != (b > 0.0) && b != 0.0 {
            let wc = if a == 0.0 {
                pts[i].omega
            } else {
                bisect(pts[i].omega, pts[i + 1].omega, &mut |w| {
                    Ok(open_loop.response(w)?.norm().ln())
                })?
            };
            count += 1;
            let pm = 180.0 + phase_near(wc, i)?;
            if best.is_none_or(|(p, _)| pm < p) {
                best = Some((pm, wc));
            }
        }
    }
    let (phase_margin_deg, gain_crossover_rad_s) = best.ok_or(LintfError::NoCrossover)?;

    // phase crossings of −180° − 360°·k
    let mut gm: Option<(f64, f64)> = None;
    for i in 0..pts.len() - 1 {
        let (pa, pb) = (pts[i].phase_deg, pts[i + 1].phase_deg);
        let turns_a = ((pa + 180.0) / 360.0).floor();
        let turns_b = ((pb + 180.0) / 360.0).floor();
        if turns_a == turns_b {
            continue;
        }
        let level = 360.0 * turns_a.max(turns_b) - 180.0;
        if level > -180.0 {
            continue;
        }
        let wp = bisect(pts[i].omega, pts[i + 1].omega, &mut |w| {
            Ok(phase_near(w, i)? - level)
        })?;
        let margin = -20.0 * open_loop.response(wp)?.norm().log10();
        if gm.is_none_or(|(g, _)| margin < g) {
            gm = Some((margin, wp));
        }
    }

    Ok(StabilityReport {
        phase_margin_deg,
        gain_crossover_rad_s,
        gain_margin_db: gm.map_or(f64::INFINITY, |g| g.0),
        phase_crossover_rad_s: gm.map(|g| g.1),
        crossover_count: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lintf::DelayedTransferFunction;

    #[test]
    fn first_order_closed_form() {
        // |10/(jω+1)| = 1 at ω = √99
        let g = DelayedTransferFunction::rational(&[10.0], &[1.0, 1.0]).unwrap();
        let r = stability_margins(&g).unwrap();
        let expected = 180.0 - 99f64.sqrt().atan().to_degrees();
        assert!((r.phase_margin_deg - expected).abs() < 1e-6, "{r:?}");
        assert!((r.gain_crossover_rad_s - 99f64.sqrt()).abs() < 1e-7);
        assert_eq!(r.gain_margin_db, f64::INFINITY);
        assert_eq!(r.phase_crossover_rad_s, None);
        assert_eq!(r.crossover_count, 1);
    }

    #[test]
    fn integrator_has_ninety_degrees() {
        let r = stability_margins(&DelayedTransferFunction::integrator()).unwrap();
        assert!((r.phase_margin_deg - 90.0).abs() < 1e-9);
        assert!((r.gain_crossover_rad_s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn delayed_integrator_gain_margin() {
        // 1/s · e^{-sT}: phase −180° where ωT = π/2, |G| = 1/ω there
        let t = 0.1;
        let g = DelayedTransferFunction::integrator().with_delay(t).unwrap();
        let r = stability_margins(&g).unwrap();
        assert!((r.phase_margin_deg - (90.0 - t.to_degrees())).abs() < 1e-6);
        let wp = std::f64::consts::FRAC_PI_2 / t;
        assert!((r.phase_crossover_rad_s.unwrap() - wp).abs() < 1e-6 * wp);
        assert!((r.gain_margin_db - 20.0 * wp.log10()).abs() < 1e-6);
    }

    #[test]
    fn no_crossover_below_unity() {
        let g = DelayedTransferFunction::rational(&[0.5], &[1.0, 1.0]).unwrap();
        assert!(matches!(stability_margins(&g), Err(LintfError::NoCrossover)));
    }

    #[test]
    fn multiple_crossings_report_minimum() {
        // Lightly damped resonance poking above unity on top of a sub-unity floor:
        // 0.5·ω_n²/(s² + 2ζω_n s + ω_n²) with ζ = 0.05 peaks at ≈ 5.
        let wn: f64 = 10.0;
        let g = DelayedTransferFunction::rational(&[0.5 * wn * wn], &[wn * wn, 2.0 * 0.05 * wn, 1.0])
            .unwrap();
        let r = stability_margins(&g).unwrap();
        assert_eq!(r.crossover_count, 2);
        // the upper crossing sits further down the phase curve
        assert!(r.gain_crossover_rad_s > wn);
    }
}
