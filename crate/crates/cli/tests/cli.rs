use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vlca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlca"))
        .args(args)
        .current_dir(dir)
        .env_remove("VLCA_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn margins_rows_in_fixed_order() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "m.conf", "scenario = margins\noutput_dir = res\n");
    let o = vlca(tmp.path(), &["run", "m.conf"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("res/margins.csv")).unwrap();
    let labels: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["open_loop", "PDf", "PDm", "PIDm", "PDmDOB"]);
    assert!(csv.starts_with("controller,phase_margin_deg,gain_crossover_hz,gain_margin_db\n"));
    let m = manifest(&tmp.path().join("res"));
    assert_eq!(m["status"], "ok");
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert!(files.contains(&"margins.csv") && files.contains(&"margins_open_loop.svg"));
}

#[test]
fn materials_ranks_builtin_table() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "m.conf", "scenario = materials\noutput_dir = res\n");
    let o = vlca(tmp.path(), &["run", "m.conf"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(tmp.path().join("res/materials.csv")).unwrap();
    assert_eq!(table.lines().count(), 9);
    let ranking = fs::read_to_string(tmp.path().join("res/ranking.csv")).unwrap();
    assert!(ranking.lines().nth(1).unwrap().starts_with("1,Polyurethane 90A,"));
}

#[test]
fn empty_config_is_a_config_error_naming_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "e.conf", "");
    let o = vlca(tmp.path(), &["run", "e.conf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn validate_reports_each_bad_key() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "v.conf", "scenario = margins\nactuator.k_r = -1\ngains.kp = 3\n");
    let o = vlca(tmp.path(), &["validate", "v.conf"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("actuator.k_r: must be positive"), "{err}");
    assert!(err.contains("gains.kp: unknown key"), "{err}");

    let o = vlca(tmp.path(), &["validate", "v.conf", "--set", "actuator.k_r=5e6", "--set", "gains.kp=3"]);
    assert_eq!(o.status.code(), Some(2));
    write_config(tmp.path(), "ok.conf", "scenario = margins\n");
    let o = vlca(tmp.path(), &["validate", "ok.conf", "--set", "gains.delay_T=0.001"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn repeat_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "scenario = bode\nseed = 11\nrun.noise_std = 2\nrun.duration_s = 10\nrun.chirp_f0_hz = 0.5\nrun.chirp_f1_hz = 50\n";
    write_config(tmp.path(), "b.conf", text);
    for out in ["a", "b"] {
        let o = vlca(tmp.path(), &["run", "b.conf", "--set", &format!("output_dir={out}")]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let names: Vec<String> = manifest(&tmp.path().join("a"))["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_string())
        .collect();
    assert!(names.iter().any(|n| n == "bode_empirical.csv"));
    for n in &names {
        assert_eq!(fs::read(tmp.path().join("a").join(n)).unwrap(), fs::read(tmp.path().join("b").join(n)).unwrap(), "{n}");
    }
}

#[test]
fn failed_scenario_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // centre out of reach of the legs
    write_config(tmp.path(), "o.conf", "scenario = osc\noutput_dir = res\ntrajectory.center = 0,0.95\nrun.duration_s = 0.1\n");
    let o = vlca(tmp.path(), &["run", "o.conf"]);
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(&tmp.path().join("res"));
    assert_eq!(m["status"], "failed");
    assert!(!m["error"].as_str().unwrap().is_empty());
}

#[test]
fn efficiency_rejects_ideal_mode() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "e.conf", "scenario = efficiency\noutput_dir = res\nrun.mode = ideal\n");
    let o = vlca(tmp.path(), &["run", "e.conf"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cascaded"));
}

#[test]
fn env_overrides_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "m.conf", "scenario = margins\noutput_dir = ignored\n");
    let o = Command::new(env!("CARGO_BIN_EXE_vlca"))
        .args(["run", "m.conf"])
        .current_dir(tmp.path())
        .env("VLCA_OUT", "chosen")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("chosen/margins.csv").exists());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "s.conf", "scenario = margins\noutput_dir = sweep\n");
    let o = vlca(tmp.path(), &["sweep", "s.conf", "--vary", "gains.k_p=2:4:1", "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let index = fs::read_to_string(tmp.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(index.lines().collect::<Vec<_>>(), ["run,gains.k_p,status", "run_000,2,ok", "run_001,3,ok", "run_002,4,ok"]);
    let pm = |k: usize| {
        let csv = fs::read_to_string(tmp.path().join(format!("sweep/run_{k:03}/margins.csv"))).unwrap();
        let row = csv.lines().find(|l| l.starts_with("PDm,")).unwrap().to_string();
        row.split(',').nth(1).unwrap().parse::<f64>().unwrap()
    };
    assert_ne!(pm(0), pm(2));
    assert_eq!(manifest(&tmp.path().join("sweep/run_001"))["parameters"]["gains.k_p"], "3");
}

#[test]
fn sweep_rejects_invalid_points_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "s.conf", "scenario = margins\noutput_dir = sweep\n");
    let o = vlca(tmp.path(), &["sweep", "s.conf", "--vary", "actuator.k_r=-1:1:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("sweep").exists());
}

#[test]
fn materials_from_csv_with_damping_floor() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "a.conf", "scenario = materials\noutput_dir = a\n");
    assert!(vlca(tmp.path(), &["run", "a.conf"]).status.success());
    let input = tmp.path().join("a/materials.csv");
    let text = format!("scenario = materials\noutput_dir = b\nmaterials.input = {}\nmaterials.min_damping = 15000\n", input.display());
    write_config(tmp.path(), "b.conf", &text);
    let o = vlca(tmp.path(), &["run", "b.conf"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ranking = fs::read_to_string(tmp.path().join("b/ranking.csv")).unwrap();
    assert!(ranking.contains("excluded: damping below 15000"), "{ranking}");
}
