use super::{LintfError, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Rational transfer function in `s` with an optional pure transport delay.
///
/// The delay is kept symbolic: it only enters through evaluation at `s = jω`
/// as the factor `exp(-jω·delay)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayedTransferFunction {
    num: Polynomial,
    den: Polynomial,
    delay_s: f64,
}

/// How two transfer functions are combined by [`compose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    Series,
    Parallel,
    /// `a / (1 + a·b)`
    UnityFeedback,
}

impl DelayedTransferFunction {
    pub fn new(num: Polynomial, den: Polynomial, delay_s: f64) -> Result<Self, LintfError> {
        if den.is_zero() {
            return Err(LintfError::ZeroDenominator);
        }
        if !(delay_s >= 0.0) || !delay_s.is_finite() {
            return Err(LintfError::InvalidArgument(format!(
                "delay must be finite and non-negative, got {delay_s}"
            )));
        }
        if num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .any(|c| !c.is_finite())
        {
            return Err(LintfError::InvalidArgument("non-finite coefficient".into()));
        }
        // cancel common factors of s
        let shared = if num.is_zero() { 0 } else { num.origin_multiplicity().min(den.origin_multiplicity()) };
        let (num, den) = if shared > 0 {
            (Polynomial::new(&num.coeffs()[shared..]), Polynomial::new(&den.coeffs()[shared..]))
        } else {
            (num, den)
        };
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
            delay_s,
        })
    }

    /// Delay-free rational function from ascending coefficient slices.
    pub fn rational(num: &[f64], den: &[f64]) -> Result<Self, LintfError> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()), 0.0)
    }

    pub fn gain(k: f64) -> Self {
        Self::rational(&[k], &[1.0]).expect("constant gain is always valid")
    }

    /// Pure integrator `1/s`.
    pub fn integrator() -> Self {
        Self::rational(&[1.0], &[0.0, 1.0]).expect("integrator is valid")
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn delay(&self) -> f64 {
        self.delay_s
    }

    pub fn with_delay(&self, delay_s: f64) -> Result<Self, LintfError> {
        Self::new(self.num.clone(), self.den.clone(), delay_s)
    }

    pub fn without_delay(&self) -> Self {
        Self {
            delay_s: 0.0,
            ..self.clone()
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            ..self.clone()
        }
    }

    /// Complex response at `s = jω`, including the delay factor.
    pub fn eval(&self, omega: f64) -> Result<Complex64, LintfError> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(LintfError::InvalidArgument(format!(
                "frequency must be positive, got {omega}"
            )));
        }
        let s = Complex64::new(0.0, omega);
        let den = self.den.eval(s);
        if den.norm() < 1e-300 {
            return Err(LintfError::PoleOnAxis { omega });
        }
        let rational = self.num.eval(s) / den;
        Ok(rational * Complex64::from_polar(1.0, -omega * self.delay_s))
    }

    /// Value of the rational part at `s = 0`; infinite for a pole at the origin.
    pub fn dc_gain(&self) -> f64 {
        let d = self.den.eval_real(0.0);
        let n = self.num.eval_real(0.0);
        if d == 0.0 {
            if n == 0.0 {
                // shared root at the origin
                let red = reduce(&self.num, &self.den);
                return red.0.eval_real(0.0) / red.1.eval_real(0.0);
            }
            return f64::INFINITY;
        }
        n / d
    }

    /// Phase (degrees) the response approaches as `ω → 0⁺`.
    ///
    /// `num/den ~ (a/b)·(jω)^(m−n)` near the origin, so the asymptote is
    /// `90·(m−n)` plus a half turn (taken as −180°) when `a/b < 0`.
    pub fn low_frequency_phase_deg(&self) -> f64 {
        let m = self.num.origin_multiplicity() as f64;
        let n = self.den.origin_multiplicity() as f64;
        let sign = self.num.lowest_nonzero() / self.den.lowest_nonzero();
        let base = 90.0 * (m - n);
        if sign < 0.0 {
            base - 180.0
        } else {
            base
        }
    }
}

/// Cancels common factors of `s` from numerator and denominator.
fn reduce(num: &Polynomial, den: &Polynomial) -> (Polynomial, Polynomial) {
    if num.is_zero() {
        return (Polynomial::zero(), Polynomial::constant(1.0));
    }
    let k = num.origin_multiplicity().min(den.origin_multiplicity());
    if k == 0 {
        (num.clone(), den.clone())
    } else {
        (num.shift_down(k), den.shift_down(k))
    }
}

/// Combines two transfer functions.
///
/// Delays add under series composition. Parallel and feedback composition
/// need delay-free operands since the result would no longer be rational.
pub fn compose(
    kind: Composition,
    a: &DelayedTransferFunction,
    b: &DelayedTransferFunction,
) -> Result<DelayedTransferFunction, LintfError> {
    let (num, den, delay) = match kind {
        Composition::Series => (&a.num * &b.num, &a.den * &b.den, a.delay_s + b.delay_s),
        Composition::Parallel | Composition::UnityFeedback => {
            if a.delay_s > 0.0 || b.delay_s > 0.0 {
                return Err(LintfError::DelayNotClosed);
            }
            if kind == Composition::Parallel {
                (
                    &(&a.num * &b.den) + &(&b.num * &a.den),
                    &a.den * &b.den,
                    0.0,
                )
            } else {
                // a/(1+ab) = na·db / (da·db + na·nb)
                (
                    &a.num * &b.den,
                    &(&a.den * &b.den) + &(&a.num * &b.num),
                    0.0,
                )
            }
        }
    };
    let (num, den) = reduce(&num, &den);
    DelayedTransferFunction::new(num, den, delay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_evaluates_to_one() {
        let g = DelayedTransferFunction::gain(1.0);
        let v = g.eval(3.7).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn integrator_at_unit_frequency_is_minus_j() {
        let v = DelayedTransferFunction::integrator().eval(1.0).unwrap();
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((v.arg().to_degrees() + 90.0).abs() < 1e-12);
    }

    #[test]
    fn pole_on_axis_is_reported() {
        // 1/(s^2 + 4) has poles at ±2j
        let g = DelayedTransferFunction::rational(&[1.0], &[4.0, 0.0, 1.0]).unwrap();
        assert!(matches!(g.eval(2.0), Err(LintfError::PoleOnAxis { .. })));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            DelayedTransferFunction::rational(&[1.0], &[0.0]),
            Err(LintfError::ZeroDenominator)
        ));
    }

    #[test]
    fn series_cancels_shared_origin_factor() {
        let s_over_1 = DelayedTransferFunction::rational(&[0.0, 1.0], &[1.0]).unwrap();
        let g = compose(Composition::Series, &DelayedTransferFunction::integrator(), &s_over_1)
            .unwrap();
        assert_eq!(g.numerator().coeffs(), &[1.0]);
        assert_eq!(g.denominator().coeffs(), &[1.0]);
    }

    #[test]
    fn unity_feedback_of_gain() {
        let k = 7.0;
        let g = compose(
            Composition::UnityFeedback,
            &DelayedTransferFunction::gain(k),
            &DelayedTransferFunction::gain(1.0),
        )
        .unwrap();
        assert!((g.dc_gain() - k / (1.0 + k)).abs() < 1e-15);
    }

    #[test]
    fn parallel_rejects_delayed_operand() {
        let a = DelayedTransferFunction::gain(1.0).with_delay(1e-3).unwrap();
        let b = DelayedTransferFunction::gain(1.0);
        assert!(matches!(
            compose(Composition::Parallel, &a, &b),
            Err(LintfError::DelayNotClosed)
        ));
        assert!(matches!(
            compose(Composition::UnityFeedback, &b, &a),
            Err(LintfError::DelayNotClosed)
        ));
        assert!(compose(Composition::Series, &a, &a).unwrap().delay() == 2e-3);
    }

    #[test]
    fn parallel_sums_responses() {
        let a = DelayedTransferFunction::rational(&[1.0], &[1.0, 1.0]).unwrap();
        let b = DelayedTransferFunction::rational(&[2.0], &[3.0, 1.0]).unwrap();
        let p = compose(Composition::Parallel, &a, &b).unwrap();
        for w in [0.1, 1.0, 10.0] {
            let lhs = p.eval(w).unwrap();
            let rhs = a.eval(w).unwrap() + b.eval(w).unwrap();
            assert!((lhs - rhs).norm() < 1e-14 * rhs.norm());
        }
    }

    #[test]
    fn delay_only_rotates_phase() {
        let g = DelayedTransferFunction::rational(&[2.0], &[1.0, 0.5]).unwrap();
        let gd = g.with_delay(0.01).unwrap();
        let w = 20.0;
        let (a, b) = (g.eval(w).unwrap(), gd.eval(w).unwrap());
        assert!((a.norm() - b.norm()).abs() < 1e-14);
        let mut dphi = b.arg() - a.arg();
        while dphi > PI {
            dphi -= 2.0 * PI;
        }
        assert!((dphi + w * 0.01).abs() < 1e-12);
    }

    #[test]
    fn low_frequency_asymptotes() {
        assert_eq!(DelayedTransferFunction::integrator().low_frequency_phase_deg(), -90.0);
        let double = DelayedTransferFunction::rational(&[1.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(double.low_frequency_phase_deg(), -180.0);
        assert_eq!(DelayedTransferFunction::gain(-2.0).low_frequency_phase_deg(), -180.0);
        assert_eq!(DelayedTransferFunction::gain(2.0).low_frequency_phase_deg(), 0.0);
    }
}
