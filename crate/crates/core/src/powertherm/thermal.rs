use super::PowerthermError;
use crate::simkit::SimTrace;
use crate::vlca::ActuatorParams;
use nalgebra::{Matrix2, Vector2};
use std::io::{self, Write};

/// Copper resistance temperature coefficient, 1/°C.
pub const COPPER_ALPHA: f64 = 0.0039;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cooling {
    Off,
    On,
}

impl Cooling {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Off => "off",
            Self::On => "on",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Winding heat capacity, J/°C.
    pub c_winding: f64,
    /// Winding to housing, °C/W.
    pub r_winding_housing: f64,
    /// Housing heat capacity, J/°C.
    pub c_housing: f64,
    /// Housing to ambient without coolant flow, °C/W.
    pub r_ambient_off: f64,
    /// Housing to ambient with coolant flow, °C/W.
    pub r_ambient_on: f64,
    /// Winding resistance at 25 °C, Ω.
    pub r25: f64,
    pub alpha: f64,
    pub ambient_c: f64,
    pub winding_limit_c: f64,
}

impl Default for ThermalParams {
    /// Values returned by [`calibrate_thermal`] for the default targets, rounded.
    fn default() -> Self {
        let on = 2.6;
        let wh = 1.4253;
        Self {
            c_winding: 2.538,
            r_winding_housing: wh,
            c_housing: 250.0,
            r_ambient_off: ambient_off_for_ratio(3.59, wh, on),
            r_ambient_on: on,
            r25: 0.4,
            alpha: COPPER_ALPHA,
            ambient_c: 25.0,
            winding_limit_c: 155.0,
        }
    }
}

/// Ambient-path resistance without cooling that makes the continuous
/// current ratio exactly `ratio`.
fn ambient_off_for_ratio(ratio: f64, r_wh: f64, r_on: f64) -> f64 {
    ratio * ratio * (r_wh + r_on) - r_wh
}

impl ThermalParams {
    pub fn validate(&self) -> Result<(), PowerthermError> {
        let pos = [
            self.c_winding,
            self.r_winding_housing,
            self.c_housing,
            self.r_ambient_off,
            self.r_ambient_on,
            self.r25,
        ];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(PowerthermError::InvalidInput("resistances and capacities must be positive".into()));
        }
        if self.r_ambient_on > self.r_ambient_off * (1.0 + 1e-12) {
            return Err(PowerthermError::InvalidInput("cooling must not raise the ambient-path resistance".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(PowerthermError::InvalidInput("alpha must be non-negative".into()));
        }
        Ok(())
    }

    pub fn r_ambient(&self, cooling: Cooling) -> f64 {
        match cooling {
            Cooling::Off => self.r_ambient_off,
            Cooling::On => self.r_ambient_on,
        }
    }

    /// Winding resistance at `t_c`, Ω.
    pub fn winding_resistance(&self, t_c: f64) -> f64 {
        self.r25 * (1.0 + self.alpha * (t_c - 25.0))
    }

    /// Linear model `ẋ = A·x + b` for constant current; the copper
    /// coefficient enters `A` because `i²·R(T_w)` is affine in `T_w`.
    fn system(&self, current: f64, cooling: Cooling) -> (Matrix2<f64>, Vector2<f64>) {
        let i2r = current * current * self.r25;
        let g_wh = 1.0 / self.r_winding_housing;
        let g_ha = 1.0 / self.r_ambient(cooling);
        let a = Matrix2::new(
            (i2r * self.alpha - g_wh) / self.c_winding,
            g_wh / self.c_winding,
            g_wh / self.c_housing,
            -(g_wh + g_ha) / self.c_housing,
        );
        let b = Vector2::new(
            i2r * (1.0 - 25.0 * self.alpha) / self.c_winding,
            g_ha * self.ambient_c / self.c_housing,
        );
        (a, b)
    }

    /// Steady winding temperature at constant current; `None` past thermal runaway.
    pub fn steady_winding(&self, current: f64, cooling: Cooling) -> Option<f64> {
        let rtot = self.r_winding_housing + self.r_ambient(cooling);
        let i2r = current * current * self.r25;
        let den = 1.0 - i2r * self.alpha * rtot;
        (den > 0.0).then(|| (self.ambient_c + i2r * rtot * (1.0 - 25.0 * self.alpha)) / den)
    }

    /// Largest constant current whose steady winding temperature stays at the limit, A.
    pub fn continuous_current(&self, cooling: Cooling) -> f64 {
        let rise = self.winding_limit_c - self.ambient_c;
        if rise <= 0.0 {
            return 0.0;
        }
        let rtot = self.r_winding_housing + self.r_ambient(cooling);
        (rise / (rtot * self.winding_resistance(self.winding_limit_c))).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub winding_c: f64,
    pub housing_c: f64,
}

impl ThermalState {
    pub fn ambient(p: &ThermalParams) -> Self {
        Self { winding_c: p.ambient_c, housing_c: p.ambient_c }
    }
}

/// Exact update over `dt` with constant current.
pub fn step_thermal(
    params: &ThermalParams,
    state: ThermalState,
    current: f64,
    cooling: Cooling,
    dt: f64,
) -> Result<ThermalState, PowerthermError> {
    if !(dt > 0.0 && dt <= 10e-3) {
        return Err(PowerthermError::InvalidInput(format!("thermal step must lie in (0, 10 ms], got {dt}")));
    }
    Ok(Propagator::new(params, current, cooling, dt).apply(state))
}

/// Cached `e^{A·dt}` and forced response for one (current, cooling, dt).
struct Propagator {
    phi: Matrix2<f64>,
    gamma: Vector2<f64>,
}

impl Propagator {
    fn new(params: &ThermalParams, current: f64, cooling: Cooling, dt: f64) -> Self {
        let (a, b) = params.system(current, cooling);
        // augmented exponential gives ∫e^{Aτ}dτ·b without inverting A
        let mut m = nalgebra::Matrix3::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(a * dt));
        m.fixed_view_mut::<2, 1>(0, 2).copy_from(&(b * dt));
        let e = m.exp();
        Self { phi: e.fixed_view::<2, 2>(0, 0).into(), gamma: e.fixed_view::<2, 1>(0, 2).into() }
    }

    fn apply(&self, s: ThermalState) -> ThermalState {
        let x = self.phi * Vector2::new(s.winding_c, s.housing_c) + self.gamma;
        ThermalState { winding_c: x[0], housing_c: x[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSample {
    pub t: f64,
    pub current: f64,
    pub state: ThermalState,
    pub cooling: Cooling,
}

/// Runs a piecewise-constant current profile sampled every `dt`.
pub fn simulate_thermal(
    params: &ThermalParams,
    initial: ThermalState,
    currents: &[f64],
    cooling: Cooling,
    dt: f64,
) -> Result<Vec<ThermalSample>, PowerthermError> {
    params.validate()?;
    if !(dt > 0.0 && dt <= 10e-3) {
        return Err(PowerthermError::InvalidInput(format!("thermal step must lie in (0, 10 ms], got {dt}")));
    }
    let mut out = Vec::with_capacity(currents.len() + 1);
    let mut s = initial;
    let mut cache: Option<(f64, Propagator)> = None;
    out.push(ThermalSample { t: 0.0, current: currents.first().copied().unwrap_or(0.0), state: s, cooling });
    for (k, &i) in currents.iter().enumerate() {
        if cache.as_ref().is_none_or(|(ci, _)| *ci != i) {
            cache = Some((i, Propagator::new(params, i, cooling, dt)));
        }
        s = cache.as_ref().unwrap().1.apply(s);
        let next = currents.get(k + 1).copied().unwrap_or(i);
        out.push(ThermalSample { t: (k + 1) as f64 * dt, current: next, state: s, cooling });
    }
    Ok(out)
}

/// Fills `trace.temp_c` from its motor-current column.
pub fn attach_winding_temperature(
    trace: &mut SimTrace,
    params: &ThermalParams,
    cooling: Cooling,
) -> Result<(), PowerthermError> {
    let i = trace
        .i_m
        .as_ref()
        .ok_or_else(|| PowerthermError::InvalidInput("trace has no motor current".into()))?;
    let steps = (trace.dt / 10e-3).ceil().max(1.0) as usize;
    let h = trace.dt / steps as f64;
    let mut s = ThermalState::ambient(params);
    let mut temps = Vec::with_capacity(i.len());
    for &ik in i {
        temps.push(s.winding_c);
        let p = Propagator::new(params, ik, cooling, h);
        for _ in 0..steps {
            s = p.apply(s);
        }
    }
    trace.temp_c = Some(temps);
    Ok(())
}

pub const THERMAL_CSV_HEADER: &str = "t_s,i_A,T_winding_C,T_housing_C,cooling";

pub fn write_thermal_csv<W: Write>(mut w: W, samples: &[ThermalSample]) -> io::Result<()> {
    writeln!(w, "{THERMAL_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{:.4},{:.6},{:.6},{:.6},{}",
            s.t,
            s.current,
            s.state.winding_c,
            s.state.housing_c,
            s.cooling.as_str()
        )?;
    }
    Ok(())
}

/// Calibration targets: cooled/uncooled continuous-current ratio, a settling
/// temperature at a continuous current, and the temperature after a short peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalTargets {
    pub current_ratio: f64,
    pub settle_current_a: f64,
    pub settle_temp_c: f64,
    pub peak_current_a: f64,
    pub peak_duration_s: f64,
    pub peak_temp_c: f64,
}

impl ThermalTargets {
    /// 860 N continuous force mapped to current through `N`.
    pub fn with_actuator(params: &ActuatorParams) -> Self {
        Self {
            current_ratio: 3.59,
            settle_current_a: 860.0 / params.force_per_amp(),
            settle_temp_c: 115.0,
            peak_current_a: 31.0,
            peak_duration_s: 0.5,
            peak_temp_c: 107.0,
        }
    }
}

impl Default for ThermalTargets {
    fn default() -> Self {
        Self::with_actuator(&ActuatorParams::identified())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub params: ThermalParams,
    /// Relative errors of (ratio, settle temperature rise, peak temperature rise).
    pub residuals: [f64; 3],
}

/// Winding temperature after a current pulse from ambient, cooling on.
fn peak_temp(p: &ThermalParams, t: &ThermalTargets) -> f64 {
    let dt = 1e-3;
    let n = (t.peak_duration_s / dt).round() as usize;
    let prop = Propagator::new(p, t.peak_current_a, Cooling::On, dt);
    let mut s = ThermalState::ambient(p);
    for _ in 0..n {
        s = prop.apply(s);
    }
    s.winding_c
}

fn residuals(p: &ThermalParams, t: &ThermalTargets) -> [f64; 3] {
    let rise = |v: f64| v - p.ambient_c;
    let ratio = p.continuous_current(Cooling::On) / p.continuous_current(Cooling::Off);
    let settle = p.steady_winding(t.settle_current_a, Cooling::On).unwrap_or(f64::INFINITY);
    [
        ratio / t.current_ratio - 1.0,
        rise(settle) / rise(t.settle_temp_c) - 1.0,
        rise(peak_temp(p, t)) / rise(t.peak_temp_c) - 1.0,
    ]
}

/// Coordinate descent over the logarithms of the winding capacity, the
/// winding-housing resistance and the cooled ambient resistance. The uncooled
/// resistance is set from the ratio target so that the continuous-current
/// ratio holds exactly.
pub fn calibrate_thermal(base: &ThermalParams, targets: &ThermalTargets) -> Result<Calibration, PowerthermError> {
    base.validate()?;
    if !(targets.current_ratio >= 1.0) {
        return Err(PowerthermError::InvalidInput("current ratio must be at least 1".into()));
    }
    let build = |x: &[f64; 3]| {
        let (cw, wh, on) = (x[0].exp(), x[1].exp(), x[2].exp());
        ThermalParams {
            c_winding: cw,
            r_winding_housing: wh,
            r_ambient_on: on,
            r_ambient_off: ambient_off_for_ratio(targets.current_ratio, wh, on),
            ..*base
        }
    };
    let cost = |x: &[f64; 3]| residuals(&build(x), targets).iter().map(|r| r * r).sum::<f64>();
    let mut x = [base.c_winding.ln(), base.r_winding_housing.ln(), base.r_ambient_on.ln()];
    let mut f = cost(&x);
    let mut step = 0.5;
    while step > 1e-10 && f > 1e-20 {
        let mut improved = false;
        for j in 0..3 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[j] += dir * step;
                let fy = cost(&y);
                if fy < f {
                    x = y;
                    f = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let params = build(&x);
    let residuals = residuals(&params, targets);
    if params.validate().is_err() || residuals.iter().any(|r| r.abs() > 0.05) {
        return Err(PowerthermError::CalibrationInfeasible { residuals });
    }
    Ok(Calibration { params, residuals })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousLimit {
    pub current_a: f64,
    pub force_n: f64,
    pub torque_nm: f64,
}

pub fn continuous_force_limit(
    thermal: &ThermalParams,
    actuator: &ActuatorParams,
    moment_arm_m: f64,
    cooling: Cooling,
) -> ContinuousLimit {
    let current_a = thermal.continuous_current(cooling);
    let force_n = current_a * actuator.force_per_amp();
    ContinuousLimit { current_a, force_n, torque_nm: force_n * moment_arm_m }
}
