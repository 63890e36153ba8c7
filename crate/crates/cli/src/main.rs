//! `vlca`: runs actuator scenarios from a config file and writes CSV, SVG
//! and a manifest into the output directory.
//!
//! Exit codes: 0 on success, 2 for config errors, 3 when a scenario fails.

mod config;
mod output;
mod scenarios;
mod svg;

use clap::{Parser, Subcommand};
use config::{Config, Diagnostic, Resolved};
use output::Emitter;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_SCENARIO: u8 = 3;

#[derive(Parser)]
#[command(name = "vlca", version, about = "Series-elastic actuator scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        /// Override a key, `key=value`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check a config and print diagnostics.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a scenario over a grid of values, one subdirectory per point.
    Sweep {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Swept key, `key=start:stop:step`. Repeat for a Cartesian grid.
        #[arg(long = "vary", value_name = "KEY=START:STOP:STEP", required = true)]
        vary: Vec<String>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, set } => cmd_run(&config, &set),
        Command::Validate { config, set } => cmd_validate(&config, &set),
        Command::Sweep { config, set, vary, jobs } => cmd_sweep(&config, &set, &vary, jobs),
    };
    ExitCode::from(code)
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("error: {d}");
    }
}

/// Reads, applies overrides and validates.
fn load(path: &Path, set: &[String]) -> Result<Config, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic { key: path.display().to_string(), message: format!("cannot read config: {e}") }]
    })?;
    let mut cfg = Config::parse(&text);
    for s in set {
        cfg.set(s).map_err(|d| vec![d])?;
    }
    let diags = cfg.validate();
    if diags.is_empty() {
        Ok(cfg)
    } else {
        Err(diags)
    }
}

fn output_root(r: &Resolved) -> PathBuf {
    match std::env::var_os("VLCA_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(r.str("output_dir")),
    }
}

/// Runs one resolved config into `dir`; the manifest is written either way.
fn execute(cfg: &Config, dir: &Path) -> Result<(), String> {
    let r = Resolved::new(cfg);
    let mut out = Emitter::new(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let error = scenarios::run(&r, &mut out).err().map(|e| e.to_string());
    out.finish(&r.scenario, r.seed(), cfg.digest(), r.all().clone(), error.clone())
        .map_err(|e| format!("writing manifest: {e}"))?;
    error.map_or(Ok(()), Err)
}

fn cmd_run(path: &Path, set: &[String]) -> u8 {
    let cfg = match load(path, set) {
        Ok(c) => c,
        Err(d) => {
            print_diagnostics(&d);
            return EXIT_CONFIG;
        }
    };
    let dir = output_root(&Resolved::new(&cfg));
    match execute(&cfg, &dir) {
        Ok(()) => {
            println!("wrote {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SCENARIO
        }
    }
}

fn cmd_validate(path: &Path, set: &[String]) -> u8 {
    match load(path, set) {
        Ok(_) => {
            println!("ok");
            0
        }
        Err(d) => {
            print_diagnostics(&d);
            EXIT_CONFIG
        }
    }
}

/// `key=start:stop:step` into the key and its values, stop included.
fn parse_axis(spec: &str) -> Result<(String, Vec<String>), Diagnostic> {
    let bad = |m: &str| Diagnostic { key: spec.to_string(), message: m.to_string() };
    let (key, range) = spec.split_once('=').ok_or_else(|| bad("expected key=start:stop:step"))?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("range bounds must be numbers"))?;
    let [a, b, step] = parts[..] else {
        return Err(bad("expected key=start:stop:step"));
    };
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad("need start ≤ stop and a positive step"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    let values = (0..=n).map(|k| format!("{}", a + k as f64 * step)).collect();
    Ok((key.trim().to_string(), values))
}

fn cmd_sweep(path: &Path, set: &[String], vary: &[String], jobs: Option<usize>) -> u8 {
    let base = match load(path, set) {
        Ok(c) => c,
        Err(d) => {
            print_diagnostics(&d);
            return EXIT_CONFIG;
        }
    };
    let axes = match vary.iter().map(|v| parse_axis(v)).collect::<Result<Vec<_>, _>>() {
        Ok(a) => a,
        Err(d) => {
            print_diagnostics(&[d]);
            return EXIT_CONFIG;
        }
    };
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    let mut configs = Vec::with_capacity(points.len());
    for p in &points {
        let mut c = base.clone();
        for (k, v) in p {
            let _ = c.set(&format!("{k}={v}"));
        }
        let d = c.validate();
        if !d.is_empty() {
            print_diagnostics(&d);
            return EXIT_CONFIG;
        }
        configs.push(c);
    }

    let root = output_root(&Resolved::new(&base));
    let mut index = String::from("run");
    for (key, _) in &axes {
        index.push(',');
        index.push_str(key);
    }
    index.push_str(",status\n");
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_SCENARIO;
        }
    };
    let results: Vec<Result<(), String>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(k, c)| execute(c, &root.join(format!("run_{k:03}"))))
            .collect()
    });
    let mut failed = 0;
    for (k, (p, res)) in points.iter().zip(&results).enumerate() {
        index.push_str(&format!("run_{k:03}"));
        for (_, v) in p {
            index.push(',');
            index.push_str(v);
        }
        match res {
            Ok(()) => index.push_str(",ok\n"),
            Err(e) => {
                failed += 1;
                eprintln!("error: run_{k:03}: {e}");
                index.push_str(",failed\n");
            }
        }
    }
    if let Err(e) = std::fs::create_dir_all(&root).and_then(|_| std::fs::write(root.join("sweep.csv"), index)) {
        eprintln!("error: writing sweep index: {e}");
        return EXIT_SCENARIO;
    }
    println!("wrote {} runs to {}", results.len(), root.display());
    if failed > 0 {
        EXIT_SCENARIO
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_includes_stop() {
        let (k, v) = parse_axis("gains.k_p=2:4:1").unwrap();
        assert_eq!(k, "gains.k_p");
        assert_eq!(v, ["2", "3", "4"]);
    }

    #[test]
    fn axis_rejects_bad_step() {
        assert!(parse_axis("gains.k_p=2:4:0").is_err());
        assert!(parse_axis("gains.k_p=2:4").is_err());
    }
}
