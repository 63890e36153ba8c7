//! One function per scenario kind. Each writes CSVs and SVG charts through
//! the emitter and returns a module error message on failure.

use crate::config::{parse_points, Resolved};
use crate::output::Emitter;
use crate::svg::{Chart, Series};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, Write};
use vlca_core::elastomat::*;
use vlca_core::lintf::{log_grid, response_at, write_bode_csv, FrequencyResponsePoint};
use vlca_core::powertherm::*;
use vlca_core::simkit::*;
use vlca_core::testbed::*;
use vlca_core::vlca::*;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Module(String),
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

fn module<E: Display>(e: E) -> ScenarioError {
    ScenarioError::Module(e.to_string())
}

type Result<T> = std::result::Result<T, ScenarioError>;

pub fn run(r: &Resolved, out: &mut Emitter) -> Result<()> {
    match r.scenario.as_str() {
        "bode" => bode(r, out),
        "margins" => margins(r, out),
        "force_tracking" => force_tracking(r, out),
        "position_step" => position_step(r, out),
        "impact" => impact(r, out),
        "osc" => osc(r, out),
        "thermal" => thermal(r, out),
        "efficiency" => efficiency(r, out),
        "materials" => materials(r, out),
        other => Err(ScenarioError::Module(format!("unknown scenario `{other}`"))),
    }
}

fn controller(name: &str) -> ControllerKind {
    match name {
        "pdf" => ControllerKind::PDf,
        "pdm" => ControllerKind::PDm,
        "pidm" => ControllerKind::PIDm,
        _ => ControllerKind::PDmDOB,
    }
}

fn both_or(choice: &str, all: &[&'static str]) -> Vec<&'static str> {
    if choice == "both" {
        all.to_vec()
    } else {
        all.iter().copied().filter(|c| *c == choice).collect()
    }
}

fn hz_grid() -> Vec<f64> {
    log_grid(2.0 * PI * 0.1, 2.0 * PI * 1000.0, 40)
}

fn db_series(label: &str, pts: &[FrequencyResponsePoint]) -> Series {
    Series {
        label: label.into(),
        points: pts.iter().map(|p| (p.hz(), p.magnitude_db())).collect(),
    }
}

fn phase_series(label: &str, pts: &[FrequencyResponsePoint]) -> Series {
    Series { label: label.into(), points: pts.iter().map(|p| (p.hz(), p.phase_deg)).collect() }
}

fn bode(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let p = r.actuator();
    let g = r.gains();
    let grid = hz_grid();
    let plant = response_at(&force_plant(&p).map_err(module)?, &grid).map_err(module)?;
    out.write_with("bode_force_plant.csv", |w| write_bode_csv(w, &plant))?;
    let mut mag = Chart::new("Force plant and closed loops", "frequency (Hz)", "magnitude (dB)")
        .log_x()
        .with(db_series("plant", &plant));
    let mut phase = Chart::new("Force plant and closed loops", "frequency (Hz)", "phase (deg)")
        .log_x()
        .with(phase_series("plant", &plant));
    let mut bw = String::from("controller,minus_3db_hz,minus_90deg_hz\n");
    for kind in ControllerKind::ALL {
        let cl = closed_loop_tf(kind, &p, &g).map_err(module)?;
        let pts = response_at(&cl, &grid).map_err(module)?;
        out.write_with(&format!("bode_closed_{}.csv", kind.label()), |w| write_bode_csv(w, &pts))?;
        let b = closed_loop_bandwidth(&cl).map_err(module)?;
        let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        bw.push_str(&format!("{},{},{}\n", kind.label(), f(b.minus_3db_hz), f(b.minus_90deg_hz)));
        mag = mag.with(db_series(kind.label(), &pts));
        phase = phase.with(phase_series(kind.label(), &pts));
    }
    out.write("bandwidth.csv", bw.as_bytes())?;

    if r.b("run.empirical") {
        let chirp = ChirpSpec {
            f0_hz: r.f("run.chirp_f0_hz"),
            f1_hz: r.f("run.chirp_f1_hz"),
            duration_s: r.f("run.duration_s"),
            // current amplitude, A
            amplitude: 20.0,
            offset: 0.0,
        };
        let mut trace = run_current_chirp(&p, &chirp, CONTROL_DT, PLANT_SUBSTEPS).map_err(module)?;
        let sigma = r.f("run.noise_std");
        if sigma > 0.0 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(r.seed());
            let noise = Normal::new(0.0, sigma).map_err(module)?;
            if let Some(f) = trace.f_meas.as_mut() {
                for v in f.iter_mut() {
                    *v += noise.sample(&mut rng);
                }
            }
        }
        let pts = empirical_frequency_response(&trace).map_err(module)?;
        out.write_with("bode_empirical.csv", |w| write_bode_csv(w, &pts))?;
        mag = mag.with(db_series("chirp estimate", &pts));
        phase = phase.with(phase_series("chirp estimate", &pts));
    }
    out.write("bode_magnitude.svg", mag.render().as_bytes())?;
    out.write("bode_phase.svg", phase.render().as_bytes())?;
    Ok(())
}

fn margins(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let p = r.actuator();
    let g = r.gains();
    let rows = margin_table(&p, &g).map_err(module)?;
    out.write_with("margins.csv", |w| write_margin_csv(w, &rows))?;
    let grid = hz_grid();
    let mut chart = Chart::new("Open-loop gains", "frequency (Hz)", "magnitude (dB)").log_x();
    let plant = force_plant(&p).map_err(module)?.with_delay(g.delay_t).map_err(module)?;
    chart = chart.with(db_series("plant", &response_at(&plant, &grid).map_err(module)?));
    for kind in ControllerKind::ALL {
        let tf = open_loop_tf(kind, &p, &g).map_err(module)?;
        chart = chart.with(db_series(kind.label(), &response_at(&tf, &grid).map_err(module)?));
    }
    out.write("margins_open_loop.svg", chart.render().as_bytes())?;
    Ok(())
}

fn force_reference(r: &Resolved) -> ForceReference {
    let amp = r.f("run.amplitude");
    match r.str("run.reference") {
        "step" => ForceReference::Step { amplitude: amp, t0: r.f("run.t0") },
        "sine" => ForceReference::Sine { amplitude: amp, offset: 0.0, freq_hz: r.f("run.freq_hz") },
        "chirp" => ForceReference::Chirp(ChirpSpec {
            f0_hz: r.f("run.chirp_f0_hz"),
            f1_hz: r.f("run.chirp_f1_hz"),
            duration_s: r.f("run.duration_s"),
            amplitude: amp,
            offset: 0.0,
        }),
        _ => ForceReference::Ramp { start: r.f("run.start"), end: amp, t0: r.f("run.t0"), rise: r.f("run.rise") },
    }
}

fn force_tracking(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let kind = controller(r.str("run.controller"));
    let reference = force_reference(r);
    let trace = run_force_tracking(kind, &r.gains(), &r.actuator(), &reference, r.f("run.duration_s"))
        .map_err(module)?;
    out.write_with("force_tracking.csv", |w| trace.write_csv(w))?;
    let f = trace.f_meas.as_deref().unwrap_or(&[]);
    let (mut max_err, mut sq) = (0.0f64, 0.0);
    for (t, y) in trace.t.iter().zip(f) {
        let e = y - reference.value(*t);
        max_err = max_err.max(e.abs());
        sq += e * e;
    }
    let rms = (sq / f.len().max(1) as f64).sqrt();
    let mut summary = String::from("controller,max_error_N,rms_error_N,overshoot,saturated\n");
    let step = match reference {
        ForceReference::Step { amplitude, t0 } => Some(step_metrics(&trace.t, f, amplitude, t0)),
        ForceReference::Ramp { end, t0, .. } => Some(step_metrics(&trace.t, f, end, t0)),
        _ => None,
    };
    let overshoot = step.map(|s| format!("{}", s.overshoot)).unwrap_or_default();
    summary.push_str(&format!("{},{max_err},{rms},{overshoot},{}\n", kind.label(), trace.saturated()));
    out.write("force_tracking_summary.csv", summary.as_bytes())?;
    let reference_pts: Vec<f64> = trace.t.iter().map(|t| reference.value(*t)).collect();
    let chart = Chart::new(&format!("Force tracking, {}", kind.label()), "time (s)", "force (N)")
        .with(Series::new("reference", &trace.t, &reference_pts))
        .with(Series::new("measured", &trace.t, f));
    out.write("force_tracking.svg", chart.render().as_bytes())?;
    Ok(())
}

fn position_step(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let gains = PositionGains {
        k_p: r.f("run.position_kp"),
        k_dj: r.f("run.position_kdj"),
        k_dm: r.f("run.position_kdm"),
        step_m: r.f("run.step_m"),
        duration_s: r.f("run.duration_s"),
    };
    let mut chart = Chart::new("Joint position step", "time (s)", "joint angle (rad)");
    let mut summary = String::from("element,overshoot,settling_time_s,peak\n");
    for name in both_or(r.str("run.element"), &["elastomer", "steel"]) {
        let element = if name == "steel" { JointElement::SteelSpring } else { JointElement::Elastomer };
        let rig = PositionRig {
            params: r.actuator(),
            element,
            load_mass: r.f("run.load_mass"),
            moment_arm: r.f("run.moment_arm"),
        };
        let trace = run_joint_position_control(&rig, &gains).map_err(module)?;
        out.write_with(&format!("position_{name}.csv"), |w| trace.write_csv(w))?;
        if let Some(m) = trace.step {
            let settle = m.settling_time_s.map(|s| format!("{s}")).unwrap_or_default();
            summary.push_str(&format!("{name},{},{settle},{}\n", m.overshoot, m.peak));
        }
        chart = chart.with(Series::new(name, &trace.t, trace.q_out.as_deref().unwrap_or(&[])));
    }
    out.write("position_summary.csv", summary.as_bytes())?;
    out.write("position_step.svg", chart.render().as_bytes())?;
    Ok(())
}

fn impact(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let mut chart = Chart::new("Impact load-cell force", "time (s)", "force (N)");
    let mut summary = String::from("grounding,peak_loadcell_N,peak_deflection_m\n");
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for name in both_or(r.str("run.grounding"), &["rigid", "viscoelastic"]) {
        let grounding = if name == "rigid" { Grounding::Rigid } else { Grounding::Viscoelastic };
        let cfg = ImpactConfig {
            impulse_ns: r.f("run.impulse_ns"),
            pulse_width_s: r.f("run.pulse_width_ms") * 1e-3,
            duration_s: r.f("run.duration_s"),
            params: r.actuator(),
            ..ImpactConfig::new(grounding)
        };
        let trace = run_impact(&cfg).map_err(module)?;
        out.write_with(&format!("impact_{name}.csv"), |w| trace.write_csv(w))?;
        let lc = trace.f_loadcell.as_deref().unwrap_or(&[]);
        summary.push_str(&format!("{name},{},{}\n", peak(lc), peak(trace.x_r.as_deref().unwrap_or(&[]))));
        chart = chart.with(Series::new(name, &trace.t, lc));
    }
    out.write("impact_summary.csv", summary.as_bytes())?;
    out.write("impact.svg", chart.render().as_bytes())?;
    Ok(())
}

fn trajectory(r: &Resolved) -> Result<Trajectory> {
    Ok(match r.str("trajectory.kind") {
        "bspline" => Trajectory::BSpline {
            points: parse_points(r.str("trajectory.points")).map_err(ScenarioError::Module)?,
            duration_s: r.f("trajectory.duration_s"),
        },
        _ => Trajectory::Sine {
            center: r.pair("trajectory.center"),
            direction: r.pair("trajectory.direction"),
            amplitude: r.f("trajectory.amplitude"),
            freq_hz: r.f("trajectory.freq_hz"),
        },
    })
}

fn osc_config(r: &Resolved, mode: ActuationMode) -> Result<OscConfig> {
    let knee = if r.str("osc.linkage") == "crouch" {
        LinkageProfile::crouch_biased_knee()
    } else {
        LinkageProfile::default()
    };
    Ok(OscConfig {
        params: r.testbed(),
        gains: TaskGains { kp: [r.f("osc.kp_x"), r.f("osc.kp_y")], kd: [r.f("osc.kd_x"), r.f("osc.kd_y")] },
        linkage: [LinkageProfile::default(), knee],
        actuator: r.actuator(),
        force_kind: controller(r.str("osc.force_controller")),
        force_gains: r.gains(),
        hip_force: r.pair("osc.hip_force"),
        knee_sign: r.f("osc.knee_sign"),
        ..OscConfig::new(trajectory(r)?, mode, r.f("run.duration_s"))
    })
}

const OSC_CSV_HEADER: &str =
    "t_s,hip_x_m,hip_y_m,hip_x_des_m,hip_y_des_m,tau_ankle_Nm,tau_knee_Nm,i_ankle_A,i_knee_A";

fn write_osc_csv<W: Write>(mut w: W, run: &OscRun) -> io::Result<()> {
    writeln!(w, "{OSC_CSV_HEADER}")?;
    for k in 0..run.hip.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            run.trace.t[k],
            run.hip[k][0],
            run.hip[k][1],
            run.hip_desired[k][0],
            run.hip_desired[k][1],
            run.tau_joint[k][0],
            run.tau_joint[k][1],
            run.current[k][0],
            run.current[k][1]
        )?;
    }
    Ok(())
}

fn modes(r: &Resolved) -> Vec<(&'static str, ActuationMode)> {
    both_or(r.str("run.mode"), &["ideal", "cascaded"])
        .into_iter()
        .map(|m| (m, if m == "ideal" { ActuationMode::IdealTorque } else { ActuationMode::CascadedVlca }))
        .collect()
}

fn osc(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let mut chart = Chart::new("Hip height tracking", "time (s)", "hip height (m)");
    let mut summary = String::from("mode,max_hip_error_m,singularity_damped_steps,saturated\n");
    let mut desired_drawn = false;
    for (name, mode) in modes(r) {
        let run = simulate_osc(&osc_config(r, mode)?).map_err(module)?;
        out.write_with(&format!("osc_{name}.csv"), |w| write_osc_csv(w, &run))?;
        summary.push_str(&format!(
            "{name},{},{},{}\n",
            run.max_hip_error,
            run.singularity_damped_steps,
            run.trace.saturated()
        ));
        if !desired_drawn {
            let y: Vec<f64> = run.hip_desired.iter().map(|h| h[1]).collect();
            chart = chart.with(Series::new("desired", &run.trace.t, &y));
            desired_drawn = true;
        }
        let y: Vec<f64> = run.hip.iter().map(|h| h[1]).collect();
        chart = chart.with(Series::new(name, &run.trace.t, &y));
    }
    out.write("osc_summary.csv", summary.as_bytes())?;
    out.write("osc.svg", chart.render().as_bytes())?;
    Ok(())
}

fn coolings(r: &Resolved) -> Vec<Cooling> {
    both_or(r.str("run.cooling"), &["on", "off"])
        .into_iter()
        .map(|c| if c == "on" { Cooling::On } else { Cooling::Off })
        .collect()
}

fn thermal(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let actuator = r.actuator();
    let mut params = r.thermal();
    let mut summary = String::from(
        "cooling,current_A,final_winding_C,steady_winding_C,continuous_current_A,continuous_force_N,continuous_torque_Nm\n",
    );
    if r.b("run.calibrate") {
        let cal = calibrate_thermal(&params, &ThermalTargets::with_actuator(&actuator)).map_err(module)?;
        params = cal.params;
        let mut c = String::from("c_winding,r_winding_housing,r_ambient_on,r_ambient_off,res_ratio,res_settle,res_peak\n");
        c.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            params.c_winding,
            params.r_winding_housing,
            params.r_ambient_on,
            params.r_ambient_off,
            cal.residuals[0],
            cal.residuals[1],
            cal.residuals[2]
        ));
        out.write("thermal_calibration.csv", c.as_bytes())?;
    }
    let dt = 10e-3;
    let current = r.f("run.current_a");
    let n = (r.f("run.duration_s") / dt).round() as usize;
    // one row per second in the CSV
    let stride = (1.0 / dt) as usize;
    let mut chart = Chart::new("Winding temperature", "time (s)", "temperature (°C)");
    for cooling in coolings(r) {
        let samples = simulate_thermal(&params, ThermalState::ambient(&params), &vec![current; n], cooling, dt)
            .map_err(module)?;
        let kept: Vec<ThermalSample> = samples.iter().step_by(stride).copied().collect();
        out.write_with(&format!("thermal_{}.csv", cooling.as_str()), |w| write_thermal_csv(w, &kept))?;
        let t: Vec<f64> = kept.iter().map(|s| s.t).collect();
        let tw: Vec<f64> = kept.iter().map(|s| s.state.winding_c).collect();
        chart = chart.with(Series::new(format!("cooling {}", cooling.as_str()), &t, &tw));
        let lim = continuous_force_limit(&params, &actuator, r.f("run.moment_arm"), cooling);
        let steady = params.steady_winding(current, cooling).map(|v| format!("{v}")).unwrap_or("runaway".into());
        summary.push_str(&format!(
            "{},{current},{},{steady},{},{},{}\n",
            cooling.as_str(),
            samples.last().map(|s| s.state.winding_c).unwrap_or(params.ambient_c),
            lim.current_a,
            lim.force_n,
            lim.torque_nm
        ));
    }
    out.write("thermal_summary.csv", summary.as_bytes())?;
    out.write("thermal.svg", chart.render().as_bytes())?;
    Ok(())
}

fn efficiency(r: &Resolved, out: &mut Emitter) -> Result<()> {
    if r.str("run.mode") != "cascaded" {
        return Err(ScenarioError::Module("efficiency needs run.mode = cascaded".into()));
    }
    let cfg = osc_config(r, ActuationMode::CascadedVlca)?;
    let mut run = simulate_osc(&cfg).map_err(module)?;
    let thermal = r.thermal();
    let flow = power_flow(run.power_samples(&cfg.actuator, thermal.r25)).map_err(module)?;
    out.write_with("efficiency.csv", |w| write_efficiency_csv(w, &flow))?;
    let mut summary = String::from("drivetrain_efficiency_avg,electrical_efficiency_avg,active_duration_s,max_hip_error_m\n");
    summary.push_str(&format!(
        "{},{},{},{}\n",
        flow.drivetrain_efficiency_avg, flow.electrical_efficiency_avg, flow.active_duration_s, run.max_hip_error
    ));
    out.write("efficiency_summary.csv", summary.as_bytes())?;
    // knee winding temperature over the lift
    attach_winding_temperature(&mut run.trace, &thermal, Cooling::On).map_err(module)?;
    out.write_with("efficiency_trace.csv", |w| run.trace.write_csv(w))?;
    let t: Vec<f64> = flow.samples.iter().map(|s| s.t).collect();
    let col = |f: fn(&PowerSample) -> f64| flow.samples.iter().map(f).collect::<Vec<f64>>();
    let chart = Chart::new("Power flow during the lift", "time (s)", "power (W)")
        .with(Series::new("input", &t, &col(|s| s.input_power)))
        .with(Series::new("motor", &t, &col(|s| s.motor_power)))
        .with(Series::new("joints", &t, &col(|s| s.joint_power)));
    out.write("efficiency.svg", chart.render().as_bytes())?;
    Ok(())
}

fn materials(r: &Resolved, out: &mut Emitter) -> Result<()> {
    let records = match r.opt("materials.input") {
        Some(path) => read_materials_csv(File::open(path)?).map_err(module)?,
        None => builtin_materials(),
    };
    let weights = RankWeights {
        linearity: r.f("materials.w_linearity"),
        compression_set: r.f("materials.w_compression_set"),
        creep: r.f("materials.w_creep"),
        damping: r.f("materials.w_damping"),
        cost: r.f("materials.w_cost"),
    };
    let options = RankOptions { min_damping_ns_per_m: r.opt("materials.min_damping").and_then(|v| v.parse().ok()) };
    let ranking = rank_materials(&records, &weights, &options).map_err(module)?;
    out.write_with("materials.csv", |w| write_materials_csv(w, &records).map_err(io::Error::other))?;
    let mut csv = String::from("rank,name,score\n");
    for (i, (name, score)) in ranking.ranked.iter().enumerate() {
        csv.push_str(&format!("{},{name},{score}\n", i + 1));
    }
    for (name, reason) in &ranking.excluded {
        csv.push_str(&format!(",{name},excluded: {reason}\n"));
    }
    out.write("ranking.csv", csv.as_bytes())?;
    let ranks: Vec<f64> = (1..=ranking.ranked.len()).map(|k| k as f64).collect();
    let scores: Vec<f64> = ranking.ranked.iter().map(|(_, s)| *s).collect();
    let chart = Chart::new("Material scores by rank", "rank", "score").with(Series::new("score", &ranks, &scores));
    out.write("ranking.svg", chart.render().as_bytes())?;
    Ok(())
}
