use std::f64::consts::PI;

/// Exponential chirp `A·sin φ(t) + offset` sweeping `f0 → f1` over `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpSpec {
    pub f0_hz: f64,
    pub f1_hz: f64,
    pub duration_s: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl ChirpSpec {
    fn rate(&self) -> f64 {
        (self.f1_hz / self.f0_hz).ln() / self.duration_s
    }

    /// Instantaneous phase, rad.
    pub fn phase(&self, t: f64) -> f64 {
        let r = self.rate();
        2.0 * PI * self.f0_hz * ((r * t).exp() - 1.0) / r
    }

    pub fn frequency_at(&self, t: f64) -> f64 {
        self.f0_hz * (self.rate() * t).exp()
    }

    /// Time at which the sweep passes `f_hz`.
    pub fn time_at(&self, f_hz: f64) -> f64 {
        (f_hz / self.f0_hz).ln() / self.rate()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.offset + self.amplitude * self.phase(t).sin()
    }

    /// Total number of cycles in the sweep.
    pub fn cycles(&self) -> f64 {
        self.phase(self.duration_s) / (2.0 * PI)
    }

    pub fn decades(&self) -> f64 {
        (self.f1_hz / self.f0_hz).log10()
    }

    pub fn is_valid(&self) -> bool {
        self.f0_hz > 0.0
            && self.f1_hz > self.f0_hz
            && self.duration_s > 0.0
            && self.amplitude.is_finite()
            && self.offset.is_finite()
    }
}

/// Desired force profile, N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForceReference {
    Step { amplitude: f64, t0: f64 },
    /// Linear from `start` to `end` over `[t0, t0 + rise]`, held after.
    Ramp { start: f64, end: f64, t0: f64, rise: f64 },
    Sine { amplitude: f64, offset: f64, freq_hz: f64 },
    Chirp(ChirpSpec),
}

impl ForceReference {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Step { amplitude, t0 } => {
                if t >= t0 {
                    amplitude
                } else {
                    0.0
                }
            }
            Self::Ramp { start, end, t0, rise } => {
                if t <= t0 {
                    start
                } else if t >= t0 + rise {
                    end
                } else {
                    start + (end - start) * (t - t0) / rise
                }
            }
            Self::Sine { amplitude, offset, freq_hz } => offset + amplitude * (2.0 * PI * freq_hz * t).sin(),
            Self::Chirp(c) => c.value(t),
        }
    }

    pub fn chirp(&self) -> Option<ChirpSpec> {
        match self {
            Self::Chirp(c) => Some(*c),
            _ => None,
        }
    }
}
