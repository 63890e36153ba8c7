use super::{ActuatorParams, ControllerGains, VlcaError};
use crate::lintf::{
    compose, Composition, DelayedTransferFunction, FrequencyResponse, LintfError, Polynomial,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerKind {
    /// P + derivative of low-pass filtered elastomer deflection.
    PDf,
    /// P + motor-velocity damping.
    PDm,
    /// PD_m with integral action.
    PIDm,
    /// PD_m wrapped in a disturbance observer.
    PDmDOB,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [Self::PDf, Self::PDm, Self::PIDm, Self::PDmDOB];

    pub fn label(&self) -> &'static str {
        match self {
            Self::PDf => "PDf",
            Self::PDm => "PDm",
            Self::PIDm => "PIDm",
            Self::PDmDOB => "PDmDOB",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ControllerKind {
    type Err = VlcaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| VlcaError::InvalidParams(format!("unknown controller kind `{s}`")))
    }
}

/// Drivetrain denominator `M·s² + B·s + k_r`.
fn plant_denominator(p: &ActuatorParams) -> Polynomial {
    Polynomial::new(vec![p.k_r, p.effective_damping(), p.effective_mass()])
}

/// Motor current to elastomer deflection with the output held fixed, m/A.
pub fn plant_px(params: &ActuatorParams) -> Result<DelayedTransferFunction, VlcaError> {
    params.validate()?;
    Ok(DelayedTransferFunction::new(
        Polynomial::constant(params.force_per_amp()),
        plant_denominator(params),
        0.0,
    )?)
}

/// Measured elastomer force over commanded motor force, `k_r·P_x/N`.
pub fn force_plant(params: &ActuatorParams) -> Result<DelayedTransferFunction, VlcaError> {
    let px = plant_px(params)?;
    Ok(compose(
        Composition::Series,
        &px,
        &DelayedTransferFunction::gain(params.k_r / params.force_per_amp()),
    )?)
}

/// First-order filtered differentiator `s·ω_c/(s + ω_c)`.
pub fn derivative_filter(cutoff: f64) -> DelayedTransferFunction {
    DelayedTransferFunction::rational(&[0.0, cutoff], &[cutoff, 1.0])
        .expect("positive cutoff gives a valid filter")
}

/// Second-order low-pass `ω_c²/(s² + 2ζω_c·s + ω_c²)`.
pub fn dob_filter(cutoff: f64, zeta: f64) -> DelayedTransferFunction {
    DelayedTransferFunction::rational(&[cutoff * cutoff], &[cutoff * cutoff, 2.0 * zeta * cutoff, 1.0])
        .expect("positive cutoff gives a valid filter")
}

fn require_cutoff(v: Option<f64>, name: &'static str) -> Result<f64, VlcaError> {
    v.ok_or(VlcaError::MissingFilterCutoff(name))
}

/// PD_m loop gain without delay, `P_x·(k_r·K_p + K_dm·N_m·s)/N`.
fn pdm_loop(p: &ActuatorParams, g: &ControllerGains) -> Result<DelayedTransferFunction, VlcaError> {
    Ok(DelayedTransferFunction::new(
        Polynomial::new(vec![p.k_r * g.k_p, g.k_dm * p.n_m]),
        plant_denominator(p),
        0.0,
    )?)
}

fn delay_free_open_loop(
    kind: ControllerKind,
    p: &ActuatorParams,
    g: &ControllerGains,
) -> Result<DelayedTransferFunction, VlcaError> {
    p.validate()?;
    g.validate()?;
    let den = plant_denominator(p);
    let tf = match kind {
        ControllerKind::PDf => {
            let wc = require_cutoff(g.q_d_cutoff, "q_d_cutoff")?;
            let pd = compose(
                Composition::Parallel,
                &DelayedTransferFunction::gain(g.k_p),
                &derivative_filter(wc).scaled(g.k_df_for(p)),
            )?;
            let plant = DelayedTransferFunction::new(Polynomial::constant(p.k_r), den, 0.0)?;
            compose(Composition::Series, &plant, &pd)?
        }
        ControllerKind::PDm => pdm_loop(p, g)?,
        ControllerKind::PIDm => {
            // (K_dm·N_m·s² + k_r·K_p·s + k_r·K_i) / (s·(M·s² + B·s + k_r))
            let num = Polynomial::new(vec![p.k_r * g.k_i, p.k_r * g.k_p, g.k_dm * p.n_m]);
            DelayedTransferFunction::new(num, &den * &Polynomial::s(), 0.0)?
        }
        ControllerKind::PDmDOB => {
            let wc = require_cutoff(g.q_taud_cutoff, "q_taud_cutoff")?;
            let z = g.q_taud_zeta;
            // (N·Q + P_x(k_r K_p + K_dm N_m s)) / (N(1 − Q)) with Q = ω²/D_q:
            //   (ω²·D_p + D_q·N_pd) / ((s² + 2ζω s)·D_p)
            let dq = Polynomial::new(vec![wc * wc, 2.0 * z * wc, 1.0]);
            let one_minus_q = Polynomial::new(vec![0.0, 2.0 * z * wc, 1.0]);
            let n_pd = Polynomial::new(vec![p.k_r * g.k_p, g.k_dm * p.n_m]);
            let num = &den.scale(wc * wc) + &(&dq * &n_pd);
            DelayedTransferFunction::new(num, &one_minus_q * &den, 0.0)?
        }
    };
    Ok(tf)
}

/// Loop gain whose unity crossing sets closed-loop stability; the loop delay
/// `T` is attached.
pub fn open_loop_tf(
    kind: ControllerKind,
    params: &ActuatorParams,
    gains: &ControllerGains,
) -> Result<DelayedTransferFunction, VlcaError> {
    Ok(delay_free_open_loop(kind, params, gains)?.with_delay(gains.delay_t)?)
}

/// Closed-loop measured force over reference, `F/(1 + L·e^{−sT})`.
///
/// The delay sits inside the denominator, so this is an evaluator rather
/// than a rational transfer function.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    pub kind: ControllerKind,
    /// Reference-to-force path including the `+1` feedforward of the reference.
    pub forward: DelayedTransferFunction,
    /// Delayed loop gain.
    pub loop_gain: DelayedTransferFunction,
}

impl ClosedLoop {
    pub fn eval(&self, omega: f64) -> Result<Complex64, LintfError> {
        let f = self.forward.eval(omega)?;
        let l = self.loop_gain.eval(omega)?;
        Ok(f / (1.0 + l))
    }
}

impl FrequencyResponse for ClosedLoop {
    fn response(&self, omega: f64) -> Result<Complex64, LintfError> {
        self.eval(omega)
    }

    fn low_frequency_phase_deg(&self) -> f64 {
        0.0
    }
}

pub fn closed_loop_tf(
    kind: ControllerKind,
    params: &ActuatorParams,
    gains: &ControllerGains,
) -> Result<ClosedLoop, VlcaError> {
    let loop_gain = open_loop_tf(kind, params, gains)?;
    let den = plant_denominator(params);
    let kr = params.k_r;
    let forward = match kind {
        ControllerKind::PDf | ControllerKind::PDm => DelayedTransferFunction::new(
            Polynomial::constant(kr * (gains.k_p + 1.0)),
            den,
            0.0,
        )?,
        ControllerKind::PIDm => DelayedTransferFunction::new(
            Polynomial::new(vec![kr * gains.k_i, kr * (gains.k_p + 1.0)]),
            &den * &Polynomial::s(),
            0.0,
        )?,
        ControllerKind::PDmDOB => {
            let wc = require_cutoff(gains.q_taud_cutoff, "q_taud_cutoff")?;
            let z = gains.q_taud_zeta;
            let dq = Polynomial::new(vec![wc * wc, 2.0 * z * wc, 1.0]);
            let one_minus_q = Polynomial::new(vec![0.0, 2.0 * z * wc, 1.0]);
            DelayedTransferFunction::new(dq.scale(kr * (gains.k_p + 1.0)), &one_minus_q * &den, 0.0)?
        }
    };
    Ok(ClosedLoop { kind, forward, loop_gain })
}

/// Closed-loop bandwidth under the two usual definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    /// First frequency where the magnitude drops 3 dB below its DC value.
    pub minus_3db_hz: Option<f64>,
    /// First frequency where the phase reaches −90°.
    pub minus_90deg_hz: Option<f64>,
}

pub fn closed_loop_bandwidth(loop_: &ClosedLoop) -> Result<Bandwidth, VlcaError> {
    let pts = crate::lintf::bode_sweep(loop_, 2.0 * std::f64::consts::PI * 0.1, 2.0 * std::f64::consts::PI * 500.0, 400)?;
    let dc = pts[0].magnitude;
    let first = |pred: &dyn Fn(&crate::lintf::FrequencyResponsePoint) -> bool| {
        pts.iter().find(|p| pred(p)).map(|p| p.hz())
    };
    Ok(Bandwidth {
        minus_3db_hz: first(&|p| p.magnitude < dc * 10f64.powf(-3.0 / 20.0)),
        minus_90deg_hz: first(&|p| p.phase_deg <= -90.0),
    })
}
