use super::SimError;
use crate::integrate::rk4_step;
use crate::vlca::ActuatorParams;

/// Deflection state of the fixed-output actuator, `M·ẍ + B·ẋ + k_r·x = N·i + F_ext`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    /// Elastic element deflection, m.
    pub x_r: f64,
    /// Deflection rate, m/s.
    pub v_r: f64,
}

impl PlantState {
    pub fn new(x_r: f64, v_r: f64) -> Self {
        Self { x_r, v_r }
    }

    /// Kinetic energy of the effective mass plus spring energy, J.
    pub fn mechanical_energy(&self, params: &ActuatorParams) -> f64 {
        0.5 * params.effective_mass() * self.v_r * self.v_r + 0.5 * params.k_r * self.x_r * self.x_r
    }

    /// Acceleration for the given inputs.
    pub fn acceleration(&self, params: &ActuatorParams, motor_current: f64, external_force: f64) -> f64 {
        (params.force_per_amp() * motor_current + external_force
            - params.effective_damping() * self.v_r
            - params.k_r * self.x_r)
            / params.effective_mass()
    }

    /// Force measured from deflection, `k_r·x_r`.
    pub fn spring_force(&self, params: &ActuatorParams) -> f64 {
        params.k_r * self.x_r
    }

    /// Damping contribution `b_r·ẋ_r`.
    pub fn damping_force(&self, params: &ActuatorParams) -> f64 {
        params.b_r * self.v_r
    }
}

/// Largest plant step accepted, s.
pub const MAX_PLANT_STEP: f64 = 1e-3;

/// One RK4 step with inputs held over the step.
pub fn step_plant(
    params: &ActuatorParams,
    state: PlantState,
    motor_current: f64,
    external_force: f64,
    dt: f64,
) -> Result<PlantState, SimError> {
    step_plant_with(params, state, dt, |_| (motor_current, external_force))
}

/// One RK4 step where the inputs may vary inside the step; `inputs(τ)`
/// receives the offset from the start of the step.
pub fn step_plant_with(
    params: &ActuatorParams,
    state: PlantState,
    dt: f64,
    mut inputs: impl FnMut(f64) -> (f64, f64),
) -> Result<PlantState, SimError> {
    if !(dt > 0.0 && dt <= MAX_PLANT_STEP) {
        return Err(SimError::InvalidConfig(format!(
            "plant step must lie in (0, 1 ms], got {dt}"
        )));
    }
    let y = rk4_step(&[state.x_r, state.v_r], 0.0, dt, |tau, y| {
        let (i, f) = inputs(tau);
        let s = PlantState::new(y[0], y[1]);
        [y[1], s.acceleration(params, i, f)]
    });
    if !y[0].is_finite() || !y[1].is_finite() {
        return Err(SimError::NonFiniteState);
    }
    Ok(PlantState::new(y[0], y[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_is_equilibrium() {
        let p = ActuatorParams::identified();
        let mut s = PlantState::default();
        for _ in 0..1000 {
            s = step_plant(&p, s, 0.0, 0.0, 1e-4).unwrap();
        }
        assert_eq!(s, PlantState::default());
    }

    #[test]
    fn constant_current_settles_to_static_deflection() {
        let p = ActuatorParams::identified();
        let mut s = PlantState::default();
        // ζω_n ≈ 26 /s, so 1 s is ~26 time constants
        for _ in 0..10_000 {
            s = step_plant(&p, s, 1.0, 0.0, 1e-4).unwrap();
        }
        let expected = 0.9 * 0.0448 * 3316.0 / 5.5e6;
        assert!((s.x_r - expected).abs() < 1e-12, "{} vs {expected}", s.x_r);
        assert!((s.x_r - 2.431e-5).abs() < 1e-8);
    }

    #[test]
    fn rejects_large_steps() {
        let p = ActuatorParams::identified();
        assert!(step_plant(&p, PlantState::default(), 0.0, 0.0, 2e-3).is_err());
        assert!(step_plant(&p, PlantState::default(), 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn non_finite_input_aborts() {
        let p = ActuatorParams::identified();
        let r = step_plant(&p, PlantState::default(), f64::NAN, 0.0, 1e-4);
        assert!(matches!(r, Err(SimError::NonFiniteState)));
    }
}
