use super::{SimError, SimTrace};
use crate::lintf::{FrequencyResponsePoint, nearest_branch};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Minimum coherence proxy accepted at a bin.
pub const EXCITATION_THRESHOLD: f64 = 0.9;
/// Analysis window length in cycles of the bin frequency.
const WINDOW_CYCLES: f64 = 10.0;
const BINS_PER_DECADE: f64 = 10.0;

/// Output/input response of a chirp trace (`f_meas` over `f_cmd`) at
/// log-spaced bins covering the part of the sweep where a full window fits.
pub fn empirical_frequency_response(trace: &SimTrace) -> Result<Vec<FrequencyResponsePoint>, SimError> {
    let chirp = trace
        .chirp
        .ok_or_else(|| SimError::InvalidConfig("trace has no chirp excitation".into()))?;
    let t_end = trace.t.last().copied().unwrap_or(0.0);
    let fits = |f: f64| {
        let tc = chirp.time_at(f);
        tc - 0.5 * WINDOW_CYCLES / f >= 0.0 && tc + 0.5 * WINDOW_CYCLES / f <= t_end
    };
    let n = (chirp.decades() * BINS_PER_DECADE).floor() as usize;
    let freqs: Vec<f64> = (0..=n)
        .map(|k| chirp.f0_hz * 10f64.powf(k as f64 / BINS_PER_DECADE))
        .filter(|f| fits(*f) && *f < 0.5 / trace.dt / 2.0)
        .collect();
    empirical_frequency_response_at(trace, &freqs)
}

/// As [`empirical_frequency_response`] at caller-chosen frequencies, Hz.
///
/// Each bin demodulates input and output with the known chirp phase over a
/// Hann window of ten cycles centred where the sweep passes the bin.
pub fn empirical_frequency_response_at(
    trace: &SimTrace,
    freqs_hz: &[f64],
) -> Result<Vec<FrequencyResponsePoint>, SimError> {
    trace.validate()?;
    let chirp = trace
        .chirp
        .ok_or_else(|| SimError::InvalidConfig("trace has no chirp excitation".into()))?;
    if chirp.decades() < 2.0 || chirp.cycles() < 40.0 {
        return Err(SimError::InvalidConfig(format!(
            "chirp must span 2 decades and 40 cycles, got {:.2} decades, {:.1} cycles",
            chirp.decades(),
            chirp.cycles()
        )));
    }
    let (x, y) = match (&trace.f_cmd, &trace.f_meas) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(SimError::InvalidConfig("chirp trace needs f_cmd and f_meas".into())),
    };
    let mut out = Vec::with_capacity(freqs_hz.len());
    let mut prev_phase = 0.0;
    for &f in freqs_hz {
        let tc = chirp.time_at(f);
        let half = 0.5 * WINDOW_CYCLES / f;
        let k0 = ((tc - half) / trace.dt).ceil().max(0.0) as usize;
        let k1 = (((tc + half) / trace.dt).floor() as usize).min(trace.len().saturating_sub(1));
        if k1 <= k0 + 4 || tc - half < -trace.dt || tc + half > trace.t[trace.len() - 1] + trace.dt {
            return Err(SimError::InvalidConfig(format!("bin {f} Hz lies outside the record")));
        }
        let (mut xs, mut ys) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let (mut sw, mut swx2, mut swy2) = (0.0, 0.0, 0.0);
        let (mut mx, mut my) = (0.0, 0.0);
        for k in k0..=k1 {
            mx += x[k];
            my += y[k];
        }
        let cnt = (k1 - k0 + 1) as f64;
        mx /= cnt;
        my /= cnt;
        for k in k0..=k1 {
            let t = trace.t[k];
            let w = 0.5 * (1.0 + (2.0 * PI * (t - tc) / (2.0 * half)).cos());
            let e = Complex64::from_polar(1.0, -chirp.phase(t));
            let (xv, yv) = (x[k] - mx, y[k] - my);
            xs += w * xv * e;
            ys += w * yv * e;
            sw += w;
            swx2 += w * xv * xv;
            swy2 += w * yv * yv;
        }
        let proxy = |z: Complex64, s2: f64| if s2 > 0.0 { z.norm_sqr() / (sw * s2 / 2.0) } else { 0.0 };
        let px = proxy(xs, swx2);
        let py = proxy(ys, swy2);
        let p = px.min(py);
        if !(p >= EXCITATION_THRESHOLD) {
            return Err(SimError::InsufficientExcitation { freq_hz: f, proxy: p });
        }
        let h = ys / xs;
        let phase = nearest_branch(h.arg().to_degrees(), prev_phase);
        prev_phase = phase;
        out.push(FrequencyResponsePoint { omega: 2.0 * PI * f, magnitude: h.norm(), phase_deg: phase });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::ChirpSpec;

    fn chirp() -> ChirpSpec {
        ChirpSpec { f0_hz: 0.5, f1_hz: 200.0, duration_s: 40.0, amplitude: 1.0, offset: 0.0 }
    }

    fn trace_from(c: ChirpSpec, dt: f64, delay_samples: usize) -> SimTrace {
        let n = (c.duration_s / dt).round() as usize;
        let mut tr = SimTrace::new(dt, n);
        let x: Vec<f64> = tr.t.iter().map(|t| c.value(*t)).collect();
        let y: Vec<f64> = (0..n).map(|k| if k >= delay_samples { x[k - delay_samples] } else { 0.0 }).collect();
        tr.f_cmd = Some(x);
        tr.f_meas = Some(y);
        tr.chirp = Some(c);
        tr
    }

    #[test]
    fn identity_gives_unit_response() {
        let pts = empirical_frequency_response(&trace_from(chirp(), 1e-3, 0)).unwrap();
        assert!(pts.len() > 15);
        for p in &pts {
            assert!((p.magnitude - 1.0).abs() < 1e-9, "{} Hz: {}", p.hz(), p.magnitude);
            assert!(p.phase_deg.abs() < 1e-7);
        }
    }

    #[test]
    fn pure_delay_phase_law() {
        let tr = trace_from(chirp(), 1e-3, 1);
        let p = &empirical_frequency_response_at(&tr, &[50.0]).unwrap()[0];
        let expected = -360.0 * 50.0 * 1e-3;
        assert!((p.phase_deg - expected).abs() < 1.0, "{}", p.phase_deg);
    }

    #[test]
    fn flat_output_is_insufficient() {
        let mut tr = trace_from(chirp(), 1e-3, 0);
        tr.f_meas = Some(vec![0.0; tr.len()]);
        let e = empirical_frequency_response_at(&tr, &[5.0]);
        assert!(matches!(e, Err(SimError::InsufficientExcitation { .. })));
    }

    #[test]
    fn short_sweep_rejected() {
        let c = ChirpSpec { f0_hz: 1.0, f1_hz: 50.0, ..chirp() };
        let tr = trace_from(c, 1e-3, 0);
        assert!(matches!(empirical_frequency_response(&tr), Err(SimError::InvalidConfig(_))));
    }
}
