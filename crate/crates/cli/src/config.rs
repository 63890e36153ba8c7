//! Flat `key = value` scenario configs with dotted keys.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use vlca_core::powertherm::ThermalParams;
use vlca_core::testbed::TwoDofParams;
use vlca_core::vlca::{ActuatorParams, ControllerGains};

pub const SCENARIOS: [&str; 9] =
    ["bode", "margins", "force_tracking", "position_step", "impact", "osc", "thermal", "efficiency", "materials"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl Diagnostic {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self { key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Positive,
    NonNegative,
    Fraction,
    Real,
    Integer,
    Bool,
    Choice(&'static [&'static str]),
    /// `x,y`
    Pair,
    /// `x,y; x,y; ...`
    Points,
    Text,
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
    default: Default_,
}

enum Default_ {
    Fixed(&'static str),
    /// Filled from a core default or chosen per scenario.
    Derived,
    /// Absent unless set.
    Unset,
}

use Default_::*;
use Kind::*;

const CONTROLLERS: &[&str] = &["pdf", "pdm", "pidm", "dob"];

const KEYS: &[KeySpec] = &[
    KeySpec { key: "scenario", kind: Choice(&SCENARIOS), default: Unset },
    KeySpec { key: "output_dir", kind: Text, default: Fixed("out") },
    KeySpec { key: "seed", kind: Integer, default: Fixed("0") },
    KeySpec { key: "actuator.eta", kind: Fraction, default: Derived },
    KeySpec { key: "actuator.k_tau", kind: Positive, default: Derived },
    KeySpec { key: "actuator.n_m", kind: Positive, default: Derived },
    KeySpec { key: "actuator.j_m", kind: Positive, default: Derived },
    KeySpec { key: "actuator.b_m", kind: Positive, default: Derived },
    KeySpec { key: "actuator.m_r", kind: Positive, default: Derived },
    KeySpec { key: "actuator.b_r", kind: Positive, default: Derived },
    KeySpec { key: "actuator.k_r", kind: Positive, default: Derived },
    KeySpec { key: "gains.k_p", kind: NonNegative, default: Derived },
    KeySpec { key: "gains.k_dm", kind: NonNegative, default: Derived },
    KeySpec { key: "gains.k_i", kind: NonNegative, default: Derived },
    KeySpec { key: "gains.k_df", kind: NonNegative, default: Derived },
    KeySpec { key: "gains.q_d_cutoff_hz", kind: Positive, default: Derived },
    KeySpec { key: "gains.q_taud_cutoff_hz", kind: Positive, default: Derived },
    KeySpec { key: "gains.q_taud_zeta", kind: Positive, default: Derived },
    KeySpec { key: "gains.delay_T", kind: NonNegative, default: Derived },
    KeySpec { key: "testbed.shank_length", kind: Positive, default: Derived },
    KeySpec { key: "testbed.thigh_length", kind: Positive, default: Derived },
    KeySpec { key: "testbed.shank_mass", kind: Positive, default: Derived },
    KeySpec { key: "testbed.thigh_mass", kind: Positive, default: Derived },
    KeySpec { key: "testbed.payload", kind: NonNegative, default: Derived },
    KeySpec { key: "testbed.gravity", kind: NonNegative, default: Derived },
    KeySpec { key: "thermal.c_winding", kind: Positive, default: Derived },
    KeySpec { key: "thermal.r_winding_housing", kind: Positive, default: Derived },
    KeySpec { key: "thermal.c_housing", kind: Positive, default: Derived },
    KeySpec { key: "thermal.r_ambient_off", kind: Positive, default: Derived },
    KeySpec { key: "thermal.r_ambient_on", kind: Positive, default: Derived },
    KeySpec { key: "thermal.r25", kind: Positive, default: Derived },
    KeySpec { key: "thermal.alpha", kind: NonNegative, default: Derived },
    KeySpec { key: "thermal.ambient_c", kind: Real, default: Derived },
    KeySpec { key: "thermal.winding_limit_c", kind: Real, default: Derived },
    KeySpec { key: "run.controller", kind: Choice(CONTROLLERS), default: Fixed("dob") },
    KeySpec { key: "run.reference", kind: Choice(&["step", "ramp", "sine", "chirp"]), default: Fixed("ramp") },
    KeySpec { key: "run.amplitude", kind: Real, default: Fixed("545.8515283842795") },
    KeySpec { key: "run.start", kind: Real, default: Fixed("21.83406113537118") },
    KeySpec { key: "run.t0", kind: NonNegative, default: Fixed("0.05") },
    KeySpec { key: "run.rise", kind: Positive, default: Fixed("0.1") },
    KeySpec { key: "run.freq_hz", kind: Positive, default: Fixed("5") },
    KeySpec { key: "run.chirp_f0_hz", kind: Positive, default: Fixed("0.5") },
    KeySpec { key: "run.chirp_f1_hz", kind: Positive, default: Fixed("200") },
    KeySpec { key: "run.duration_s", kind: Positive, default: Derived },
    KeySpec { key: "run.empirical", kind: Bool, default: Fixed("true") },
    KeySpec { key: "run.noise_std", kind: NonNegative, default: Fixed("0") },
    KeySpec { key: "run.element", kind: Choice(&["elastomer", "steel", "both"]), default: Fixed("both") },
    KeySpec { key: "run.step_m", kind: Real, default: Fixed("0.001") },
    KeySpec { key: "run.position_kp", kind: NonNegative, default: Fixed("1000000") },
    KeySpec { key: "run.position_kdm", kind: NonNegative, default: Fixed("68000") },
    KeySpec { key: "run.position_kdj", kind: NonNegative, default: Fixed("0") },
    KeySpec { key: "run.load_mass", kind: Positive, default: Fixed("2000") },
    KeySpec { key: "run.grounding", kind: Choice(&["rigid", "viscoelastic", "both"]), default: Fixed("both") },
    KeySpec { key: "run.impulse_ns", kind: NonNegative, default: Fixed("20") },
    KeySpec { key: "run.pulse_width_ms", kind: Positive, default: Fixed("2") },
    KeySpec { key: "run.mode", kind: Choice(&["ideal", "cascaded", "both"]), default: Derived },
    KeySpec { key: "run.current_a", kind: NonNegative, default: Derived },
    KeySpec { key: "run.cooling", kind: Choice(&["on", "off", "both"]), default: Fixed("both") },
    KeySpec { key: "run.calibrate", kind: Bool, default: Fixed("false") },
    KeySpec { key: "run.moment_arm", kind: Positive, default: Fixed("0.0458") },
    KeySpec { key: "trajectory.kind", kind: Choice(&["sine", "bspline"]), default: Derived },
    KeySpec { key: "trajectory.amplitude", kind: NonNegative, default: Fixed("0.15") },
    KeySpec { key: "trajectory.freq_hz", kind: Positive, default: Fixed("1.7") },
    KeySpec { key: "trajectory.center", kind: Pair, default: Fixed("0.1,0.5") },
    KeySpec { key: "trajectory.direction", kind: Pair, default: Fixed("0,1") },
    KeySpec { key: "trajectory.points", kind: Points, default: Fixed("0.05,0.3; 0.05,0.3; 0.05,0.5; 0.05,0.7; 0.05,0.7") },
    KeySpec { key: "trajectory.duration_s", kind: Positive, default: Fixed("2") },
    KeySpec { key: "osc.kp_x", kind: NonNegative, default: Fixed("400") },
    KeySpec { key: "osc.kp_y", kind: NonNegative, default: Fixed("400") },
    KeySpec { key: "osc.kd_x", kind: NonNegative, default: Fixed("40") },
    KeySpec { key: "osc.kd_y", kind: NonNegative, default: Fixed("40") },
    KeySpec { key: "osc.hip_force", kind: Pair, default: Fixed("0,0") },
    KeySpec { key: "osc.knee_sign", kind: Choice(&["-1", "1"]), default: Fixed("-1") },
    KeySpec { key: "osc.linkage", kind: Choice(&["constant", "crouch"]), default: Fixed("constant") },
    KeySpec { key: "osc.force_controller", kind: Choice(CONTROLLERS), default: Fixed("dob") },
    KeySpec { key: "materials.input", kind: Text, default: Unset },
    KeySpec { key: "materials.w_linearity", kind: NonNegative, default: Fixed("1") },
    KeySpec { key: "materials.w_compression_set", kind: NonNegative, default: Fixed("1") },
    KeySpec { key: "materials.w_creep", kind: NonNegative, default: Fixed("1") },
    KeySpec { key: "materials.w_damping", kind: NonNegative, default: Fixed("1") },
    KeySpec { key: "materials.w_cost", kind: NonNegative, default: Fixed("1") },
    KeySpec { key: "materials.min_damping", kind: NonNegative, default: Unset },
];

fn spec_for(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn check_value(kind: Kind, v: &str) -> Result<(), String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("expected a number, got `{v}`"));
    let finite = |x: f64| if x.is_finite() { Ok(x) } else { Err("must be finite".to_string()) };
    match kind {
        Positive => (finite(num(v)?)? > 0.0).then_some(()).ok_or_else(|| "must be positive".into()),
        NonNegative => (finite(num(v)?)? >= 0.0).then_some(()).ok_or_else(|| "must be non-negative".into()),
        Fraction => {
            let x = finite(num(v)?)?;
            (x > 0.0 && x <= 1.0).then_some(()).ok_or_else(|| "must lie in (0, 1]".into())
        }
        Real => finite(num(v)?).map(|_| ()),
        Integer => v.parse::<u64>().map(|_| ()).map_err(|_| format!("expected a non-negative integer, got `{v}`")),
        Bool => v.parse::<bool>().map(|_| ()).map_err(|_| format!("expected true or false, got `{v}`")),
        Choice(opts) => {
            if opts.contains(&v) {
                Ok(())
            } else {
                Err(format!("expected one of {}, got `{v}`", opts.join("|")))
            }
        }
        Pair => parse_pair(v).map(|_| ()),
        Points => parse_points(v).map(|_| ()),
        Text => {
            if v.is_empty() {
                Err("must not be empty".into())
            } else {
                Ok(())
            }
        }
    }
}

pub fn parse_pair(v: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{v}`"));
    }
    let x = parts[0].parse::<f64>().map_err(|_| format!("bad number `{}`", parts[0]))?;
    let y = parts[1].parse::<f64>().map_err(|_| format!("bad number `{}`", parts[1]))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err("must be finite".into());
    }
    Ok([x, y])
}

pub fn parse_points(v: &str) -> Result<Vec<[f64; 2]>, String> {
    let pts = v.split(';').map(parse_pair).collect::<Result<Vec<_>, _>>()?;
    if pts.len() < 3 {
        return Err("need at least three points".into());
    }
    Ok(pts)
}

/// Parsed config: raw entries in file order, later entries overriding earlier.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    source: String,
    parse_diagnostics: Vec<Diagnostic>,
}

impl Config {
    pub fn parse(text: &str) -> Self {
        let mut cfg = Config { source: text.to_string(), ..Default::default() };
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    if cfg.entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                        cfg.parse_diagnostics.push(Diagnostic::new(k, format!("duplicate key on line {}", n + 1)));
                    }
                }
                None => cfg
                    .parse_diagnostics
                    .push(Diagnostic::new(&format!("line {}", n + 1), "expected `key = value`")),
            }
        }
        cfg
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), Diagnostic> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Diagnostic::new(assignment, "override must look like key=value"))?;
        self.source.push_str(&format!("\n{}={}", k.trim(), v.trim()));
        self.entries.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// SHA-256 of the config text plus overrides.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.source.as_bytes()))
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.parse_diagnostics.clone();
        if !self.entries.contains_key("scenario") {
            out.push(Diagnostic::new("scenario", "missing required key"));
        }
        for (k, v) in &self.entries {
            match spec_for(k) {
                None => out.push(Diagnostic::new(k, "unknown key")),
                Some(s) => {
                    if let Err(m) = check_value(s.kind, v) {
                        out.push(Diagnostic::new(k, m));
                    }
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        // cross-field checks by the owning modules
        let r = Resolved::new(self);
        if let Err(e) = r.actuator().validate() {
            out.push(Diagnostic::new("actuator", e.to_string()));
        }
        if let Err(e) = r.gains().validate() {
            out.push(Diagnostic::new("gains", e.to_string()));
        }
        if let Err(e) = r.testbed().validate() {
            out.push(Diagnostic::new("testbed", e.to_string()));
        }
        if let Err(e) = r.thermal().validate() {
            out.push(Diagnostic::new("thermal", e.to_string()));
        }
        out
    }
}

/// Effective value of every known key for one scenario.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: String,
    values: BTreeMap<String, String>,
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

impl Resolved {
    /// Assumes `cfg.validate()` returned no diagnostics.
    pub fn new(cfg: &Config) -> Self {
        let scenario = cfg.get_raw("scenario").unwrap_or("margins").to_string();
        let a = ActuatorParams::identified();
        let g = ControllerGains::default();
        let tb = TwoDofParams::default();
        let th = ThermalParams::default();
        let hz = |w: Option<f64>| w.map(|w| fmt_f(w / (2.0 * std::f64::consts::PI))).unwrap_or_default();
        let derived = |key: &str| -> String {
            match key {
                "actuator.eta" => fmt_f(a.eta),
                "actuator.k_tau" => fmt_f(a.k_tau),
                "actuator.n_m" => fmt_f(a.n_m),
                "actuator.j_m" => fmt_f(a.j_m),
                "actuator.b_m" => fmt_f(a.b_m),
                "actuator.m_r" => fmt_f(a.m_r),
                "actuator.b_r" => fmt_f(a.b_r),
                "actuator.k_r" => fmt_f(a.k_r),
                "gains.k_p" => fmt_f(g.k_p),
                "gains.k_dm" => fmt_f(g.k_dm),
                "gains.k_i" => fmt_f(g.k_i),
                "gains.k_df" => fmt_f(g.k_df_for(&a)),
                "gains.q_d_cutoff_hz" => hz(g.q_d_cutoff),
                // torque tracking and the OSC cascade use the faster observer
                "gains.q_taud_cutoff_hz" => match scenario.as_str() {
                    "force_tracking" | "osc" | "efficiency" => hz(ControllerGains::tracking().q_taud_cutoff),
                    _ => hz(g.q_taud_cutoff),
                },
                "gains.q_taud_zeta" => fmt_f(g.q_taud_zeta),
                "gains.delay_T" => fmt_f(g.delay_t),
                "testbed.shank_length" => fmt_f(tb.length[0]),
                "testbed.thigh_length" => fmt_f(tb.length[1]),
                "testbed.shank_mass" => fmt_f(tb.mass[0]),
                "testbed.thigh_mass" => fmt_f(tb.mass[1]),
                "testbed.payload" => fmt_f(if scenario == "efficiency" { 23.0 } else { tb.payload }),
                "testbed.gravity" => fmt_f(tb.gravity),
                "thermal.c_winding" => fmt_f(th.c_winding),
                "thermal.r_winding_housing" => fmt_f(th.r_winding_housing),
                "thermal.c_housing" => fmt_f(th.c_housing),
                "thermal.r_ambient_off" => fmt_f(th.r_ambient_off),
                "thermal.r_ambient_on" => fmt_f(th.r_ambient_on),
                "thermal.r25" => fmt_f(th.r25),
                "thermal.alpha" => fmt_f(th.alpha),
                "thermal.ambient_c" => fmt_f(th.ambient_c),
                "thermal.winding_limit_c" => fmt_f(th.winding_limit_c),
                "run.duration_s" => match scenario.as_str() {
                    "force_tracking" => "0.4",
                    "position_step" => "0.5",
                    "impact" => "0.1",
                    "osc" => "3",
                    "efficiency" => "2.2",
                    "thermal" => "10000",
                    _ => "40",
                }
                .to_string(),
                "run.mode" => if scenario == "efficiency" { "cascaded" } else { "both" }.to_string(),
                "run.current_a" => fmt_f(860.0 / a.force_per_amp()),
                "trajectory.kind" => if scenario == "efficiency" { "bspline" } else { "sine" }.to_string(),
                _ => String::new(),
            }
        };
        let mut values = BTreeMap::new();
        for spec in KEYS {
            let v = match cfg.get_raw(spec.key) {
                Some(v) => Some(v.to_string()),
                None => match spec.default {
                    Fixed(d) => Some(d.to_string()),
                    Derived => Some(derived(spec.key)),
                    Unset => None,
                },
            };
            if let Some(v) = v {
                values.insert(spec.key.to_string(), v);
            }
        }
        values.insert("scenario".into(), scenario.clone());
        Self { scenario, values }
    }

    pub fn all(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn opt(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f(&self, key: &str) -> f64 {
        self.str(key).parse().unwrap_or(f64::NAN)
    }

    pub fn b(&self, key: &str) -> bool {
        self.str(key) == "true"
    }

    pub fn pair(&self, key: &str) -> [f64; 2] {
        parse_pair(self.str(key)).unwrap_or([f64::NAN; 2])
    }

    pub fn seed(&self) -> u64 {
        self.str("seed").parse().unwrap_or(0)
    }

    pub fn actuator(&self) -> ActuatorParams {
        ActuatorParams {
            eta: self.f("actuator.eta"),
            k_tau: self.f("actuator.k_tau"),
            n_m: self.f("actuator.n_m"),
            j_m: self.f("actuator.j_m"),
            b_m: self.f("actuator.b_m"),
            m_r: self.f("actuator.m_r"),
            b_r: self.f("actuator.b_r"),
            k_r: self.f("actuator.k_r"),
        }
    }

    pub fn gains(&self) -> ControllerGains {
        let w = |k: &str| Some(2.0 * std::f64::consts::PI * self.f(k));
        ControllerGains {
            k_p: self.f("gains.k_p"),
            k_dm: self.f("gains.k_dm"),
            k_i: self.f("gains.k_i"),
            k_df: Some(self.f("gains.k_df")),
            q_d_cutoff: w("gains.q_d_cutoff_hz"),
            q_taud_cutoff: w("gains.q_taud_cutoff_hz"),
            q_taud_zeta: self.f("gains.q_taud_zeta"),
            delay_t: self.f("gains.delay_T"),
        }
    }

    pub fn testbed(&self) -> TwoDofParams {
        let l = [self.f("testbed.shank_length"), self.f("testbed.thigh_length")];
        let m = [self.f("testbed.shank_mass"), self.f("testbed.thigh_mass")];
        TwoDofParams {
            length: l,
            mass: m,
            com: [0.5 * l[0], 0.5 * l[1]],
            inertia: [m[0] * l[0] * l[0] / 12.0, m[1] * l[1] * l[1] / 12.0],
            payload: self.f("testbed.payload"),
            gravity: self.f("testbed.gravity"),
        }
    }

    pub fn thermal(&self) -> ThermalParams {
        ThermalParams {
            c_winding: self.f("thermal.c_winding"),
            r_winding_housing: self.f("thermal.r_winding_housing"),
            c_housing: self.f("thermal.c_housing"),
            r_ambient_off: self.f("thermal.r_ambient_off"),
            r_ambient_on: self.f("thermal.r_ambient_on"),
            r25: self.f("thermal.r25"),
            alpha: self.f("thermal.alpha"),
            ambient_c: self.f("thermal.ambient_c"),
            winding_limit_c: self.f("thermal.winding_limit_c"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diags(text: &str) -> Vec<Diagnostic> {
        Config::parse(text).validate()
    }

    #[test]
    fn empty_config_names_scenario() {
        assert_eq!(diags(""), vec![Diagnostic::new("scenario", "missing required key")]);
    }

    #[test]
    fn negative_stiffness_is_flagged_at_its_key() {
        let d = diags("scenario = margins\nactuator.k_r = -1\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].key, "actuator.k_r");
        assert_eq!(d[0].message, "must be positive");
    }

    #[test]
    fn delay_override_is_clean() {
        assert!(diags("scenario = margins\ngains.delay_T = 0.001\n").is_empty());
    }

    #[test]
    fn unknown_key_is_flagged() {
        let d = diags("scenario = margins\ngains.kp_typo = 3\n");
        assert_eq!(d, vec![Diagnostic::new("gains.kp_typo", "unknown key")]);
    }

    #[test]
    fn comments_and_overrides() {
        let mut c = Config::parse("# header\nscenario = bode # trailing\n");
        c.set("gains.k_p=6").unwrap();
        assert!(c.validate().is_empty());
        let r = Resolved::new(&c);
        assert_eq!(r.gains().k_p, 6.0);
        assert_eq!(r.scenario, "bode");
    }

    #[test]
    fn defaults_resolve_to_core_defaults() {
        let r = Resolved::new(&Config::parse("scenario = margins"));
        assert_eq!(r.actuator(), ActuatorParams::identified());
        let g = r.gains();
        let d = ControllerGains::default();
        assert!((g.q_taud_cutoff.unwrap() - d.q_taud_cutoff.unwrap()).abs() < 1e-9);
        assert_eq!(r.testbed(), TwoDofParams::default());
        assert_eq!(r.thermal(), ThermalParams::default());
    }

    #[test]
    fn cross_field_checks_reach_modules() {
        let d = diags("scenario = thermal\nthermal.r_ambient_off = 0.5\nthermal.r_ambient_on = 3\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].key, "thermal");
    }
}
