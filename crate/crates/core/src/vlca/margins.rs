use super::{force_plant, open_loop_tf, ActuatorParams, ControllerGains, ControllerKind, VlcaError};
use crate::lintf::{stability_margins, LintfError, StabilityReport};
use std::f64::consts::PI;
use std::io::{self, Write};

/// Which loop a margin row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopLabel {
    /// Force plant alone, with the loop delay.
    OpenLoopPlant,
    Controller(ControllerKind),
}

impl LoopLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::OpenLoopPlant => "open_loop",
            Self::Controller(k) => k.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRow {
    pub label: LoopLabel,
    pub report: Result<StabilityReport, LintfError>,
}

/// Stability margins of the plant and of each controller, in the order
/// plant, PDf, PDm, PIDm, PDmDOB. A failing entry does not abort the table.
pub fn margin_table(
    params: &ActuatorParams,
    gains: &ControllerGains,
) -> Result<Vec<MarginRow>, VlcaError> {
    params.validate()?;
    gains.validate()?;
    let plant = force_plant(params)?.with_delay(gains.delay_t)?;
    let mut rows = vec![MarginRow {
        label: LoopLabel::OpenLoopPlant,
        report: stability_margins(&plant),
    }];
    for kind in ControllerKind::ALL {
        let report = match open_loop_tf(kind, params, gains) {
            Ok(tf) => stability_margins(&tf),
            Err(VlcaError::Lintf(e)) => Err(e),
            Err(e) => return Err(e),
        };
        rows.push(MarginRow { label: LoopLabel::Controller(kind), report });
    }
    Ok(rows)
}

pub const MARGIN_CSV_HEADER: &str = "controller,phase_margin_deg,gain_crossover_hz,gain_margin_db";

/// Writes the table; rows whose analysis failed keep their label with empty fields.
pub fn write_margin_csv<W: Write>(mut w: W, rows: &[MarginRow]) -> io::Result<()> {
    writeln!(w, "{MARGIN_CSV_HEADER}")?;
    for row in rows {
        match &row.report {
            Ok(r) => writeln!(
                w,
                "{},{:.6},{:.6},{}",
                row.label.as_str(),
                r.phase_margin_deg,
                r.gain_crossover_hz(),
                if r.gain_margin_db.is_finite() {
                    format!("{:.6}", r.gain_margin_db)
                } else {
                    "inf".to_string()
                }
            )?,
            Err(_) => writeln!(w, "{},,,", row.label.as_str())?,
        }
    }
    Ok(())
}

/// Phase margins of all four loops at one (delay, derivative cutoff) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub delay_t: f64,
    pub q_d_cutoff_hz: f64,
    pub pm_pdf: f64,
    pub pm_pdm: f64,
    pub pm_pidm: f64,
    pub pm_dob: f64,
}

impl CalibrationPoint {
    /// Largest absolute deviation from the two reference margins.
    pub fn deviation(&self, target_pdf: f64, target_pdm: f64) -> f64 {
        (self.pm_pdf - target_pdf).abs().max((self.pm_pdm - target_pdm).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginCalibration {
    pub target_pdf: f64,
    pub target_pdm: f64,
    pub tolerance: f64,
    /// Point with the smallest deviation over the grid.
    pub best: CalibrationPoint,
    /// Points within tolerance on both targets where the DOB loop also
    /// out-margins the integral loop.
    pub feasible: Vec<CalibrationPoint>,
    pub evaluated: usize,
}

/// Grid over loop delay and derivative-filter cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationGrid {
    pub delays_s: Vec<f64>,
    pub q_d_cutoffs_hz: Vec<f64>,
}

impl Default for CalibrationGrid {
    /// 0.25–2.5 ms in 0.05 ms steps, 20–200 Hz in 5 Hz steps.
    fn default() -> Self {
        Self {
            delays_s: (0..=45).map(|i| 0.25e-3 + 0.05e-3 * i as f64).collect(),
            q_d_cutoffs_hz: (0..=36).map(|i| 20.0 + 5.0 * i as f64).collect(),
        }
    }
}

/// Searches for a (delay, derivative cutoff) pair that reproduces reference
/// PD_f and PD_m phase margins.
pub fn calibrate_margins(
    params: &ActuatorParams,
    gains: &ControllerGains,
    grid: &CalibrationGrid,
    target_pdf: f64,
    target_pdm: f64,
    tolerance: f64,
) -> Result<MarginCalibration, VlcaError> {
    let pm = |kind, g: &ControllerGains| -> Result<f64, VlcaError> {
        let tf = open_loop_tf(kind, params, g)?;
        Ok(stability_margins(&tf)?.phase_margin_deg)
    };
    let mut best: Option<CalibrationPoint> = None;
    let mut feasible = Vec::new();
    let mut evaluated = 0;
    for &t in &grid.delays_s {
        let g_t = ControllerGains { delay_t: t, ..*gains };
        // only PD_f depends on the derivative cutoff
        let pm_pdm = pm(ControllerKind::PDm, &g_t)?;
        let pm_pidm = pm(ControllerKind::PIDm, &g_t)?;
        let pm_dob = pm(ControllerKind::PDmDOB, &g_t)?;
        for &fd in &grid.q_d_cutoffs_hz {
            let g = ControllerGains { q_d_cutoff: Some(2.0 * PI * fd), ..g_t };
            let point = CalibrationPoint {
                delay_t: t,
                q_d_cutoff_hz: fd,
                pm_pdf: pm(ControllerKind::PDf, &g)?,
                pm_pdm,
                pm_pidm,
                pm_dob,
            };
            evaluated += 1;
            let dev = point.deviation(target_pdf, target_pdm);
            if best.is_none_or(|b| dev < b.deviation(target_pdf, target_pdm)) {
                best = Some(point);
            }
            if dev <= tolerance && point.pm_dob > point.pm_pidm {
                feasible.push(point);
            }
        }
    }
    let best = best.ok_or_else(|| VlcaError::InvalidParams("empty calibration grid".into()))?;
    Ok(MarginCalibration { target_pdf, target_pdm, tolerance, best, feasible, evaluated })
}
