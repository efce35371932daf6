//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or failed self-check,
//! 2 conservation violation.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::parse_config;
use crate::error::{Error, Result};
use crate::output::{write_report, write_statics_csv};
use crate::scenarios::{
    preset, run_scenario, sweep, ComparisonReport, ScenarioConfig, PRESET_NAMES,
};
use crate::selfcheck::run_selfcheck;
use crate::statics::find_static_solutions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hybridyn",
    version,
    about = "Oscillator coupled to two spins: quantum, semiclassical and background-driven dynamics"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Fixed integrator step; disables automatic step tightening.
    #[arg(long, global = true)]
    dt: Option<f64>,

    #[arg(long = "t-final", global = true)]
    t_final: Option<f64>,

    /// Run the seeded invariant self-test suite.
    #[arg(long = "seed-check", global = true)]
    seed_check: bool,

    /// Seed for `--seed-check`.
    #[arg(long, global = true, default_value_t = 20240611)]
    seed: u64,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario from a config file or preset name.
    Run { config: String },
    /// Run every `*.cfg` in a directory.
    Sweep { dir: PathBuf },
    /// Search for static solutions of the semiclassical system.
    Statics { config: String },
    /// List built-in presets.
    Presets,
}

struct Overrides {
    dt: Option<f64>,
    t_final: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(dt) = self.dt {
            cfg.integrator.dt = dt;
            cfg.integrator.auto_dt = false;
        }
        if let Some(t) = self.t_final {
            cfg.integrator.t_final = t;
        }
        cfg.validate()
    }
}

/// A path to an existing file is parsed as a config; otherwise the
/// argument must name a preset.
fn load(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        parse_config(&fs::read_to_string(path)?)
    } else {
        preset(arg)
    }
}

fn summarize(report: &ComparisonReport) {
    for t in &report.trajectories {
        let c = &t.conservation;
        let energy = c
            .max_energy_drift
            .map_or("n/a".to_string(), |e| format!("{e:.3e}"));
        println!(
            "{:<14} {}  samples={}  max_radius={:.6}  max_s_ent={:.6}  norm_drift={:.3e}  energy_drift={}{}",
            report.label,
            t.regime,
            t.len(),
            t.max_radius(),
            t.max_entropy(),
            c.max_norm_drift,
            energy,
            if c.violated() { "  CONSERVATION VIOLATION" } else { "" }
        );
        if let Some(reason) = &c.aborted {
            println!("{:<14} {}  aborted: {reason}", report.label, t.regime);
        }
    }
    for p in &report.pairs {
        println!(
            "{:<14} {}-{}  phase_dev={:.3e}  s_ent_dev={:.3e}",
            report.label, p.a, p.b, p.phase, p.s_ent
        );
    }
}

fn run_one(cfg: &ScenarioConfig, out: &Path) -> Result<i32> {
    let start = Instant::now();
    let report = run_scenario(cfg)?;
    let (_, manifest) = write_report(&report, cfg, out, start.elapsed())?;
    summarize(&report);
    println!("manifest: {}", manifest.display());
    Ok(if report.conservation_violated() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

fn cmd_sweep(dir: &Path, out: &Path, ov: &Overrides) -> Result<i32> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();

    let mut code = EXIT_OK;
    let mut jobs = Vec::new();
    for path in &paths {
        let parsed = fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|t| parse_config(&t))
            .and_then(|mut c| ov.apply(&mut c).map(|_| c));
        match parsed {
            Ok(cfg) => jobs.push((path, cfg)),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                code = EXIT_INVALID;
            }
        }
    }
    let configs: Vec<ScenarioConfig> = jobs.iter().map(|(_, c)| c.clone()).collect();
    let start = Instant::now();
    let results = sweep(&configs);
    let elapsed = start.elapsed();
    for ((path, cfg), result) in jobs.iter().zip(results) {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match result.and_then(|r| write_report(&r, cfg, &out.join(&stem), elapsed).map(|m| (r, m)))
        {
            Ok((report, (_, manifest))) => {
                summarize(&report);
                println!("manifest: {}", manifest.display());
                if report.conservation_violated() && code == EXIT_OK {
                    code = EXIT_VIOLATION;
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                code = EXIT_INVALID;
            }
        }
    }
    Ok(code)
}

fn cmd_statics(cfg: &ScenarioConfig, out: &Path) -> Result<i32> {
    let mut found = Vec::new();
    for &branch in &cfg.statics.branches {
        for &guess in &cfg.statics.guesses {
            match find_static_solutions(&cfg.params, branch, guess) {
                Ok(s) => found.push(s),
                Err(e) => eprintln!("branch {branch} from ({:.4}, {:.4}): {e}", guess.0, guess.1),
            }
        }
    }
    fs::create_dir_all(out)?;
    let path = out.join(format!("{}_statics.csv", cfg.label));
    write_statics_csv(&found, &path)?;
    for s in &found {
        println!(
            "branch {}  x={:.10}  p={:.10}  r^2={:.10}  E={:.10}  residual={:.2e}",
            s.branch,
            s.x,
            s.p,
            s.x * s.x + s.p * s.p,
            s.eigenvalue,
            s.residual
        );
    }
    println!("{} solutions written to {}", found.len(), path.display());
    Ok(EXIT_OK)
}

fn configure_threads() {
    let Ok(v) = std::env::var("HYBRIDYN_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            // A pool may already exist when called from a library host.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Err(_) => eprintln!("ignoring HYBRIDYN_THREADS={v:?}: not a count"),
    }
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    configure_threads();

    if cli.seed_check {
        let checks = run_selfcheck(cli.seed, 100);
        for c in &checks {
            println!(
                "{} {}: worst {:.3e} (tolerance {:.0e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance
            );
        }
        if checks.iter().any(|c| !c.passed) {
            return EXIT_INVALID;
        }
        if cli.command.is_none() {
            return EXIT_OK;
        }
    }

    let ov = Overrides {
        dt: cli.dt,
        t_final: cli.t_final,
    };
    let result = match cli.command {
        None => {
            eprintln!("no subcommand given; try --help");
            Ok(EXIT_INVALID)
        }
        Some(Command::Presets) => {
            for name in PRESET_NAMES {
                let cfg = preset(name).expect("built-in preset");
                let p = &cfg.params;
                let regimes: Vec<&str> = cfg.regimes.iter().map(|r| r.as_str()).collect();
                println!(
                    "{name:<13} omega_s={} g1={} g2={} lambda={} t_final={} regimes={}",
                    p.omega_s,
                    p.g1,
                    p.g2,
                    p.lambda,
                    cfg.integrator.t_final,
                    regimes.join(",")
                );
            }
            Ok(EXIT_OK)
        }
        Some(Command::Run { config }) => load(&config)
            .and_then(|mut c| ov.apply(&mut c).map(|_| c))
            .and_then(|c| run_one(&c, &cli.out)),
        Some(Command::Sweep { dir }) => cmd_sweep(&dir, &cli.out, &ov),
        Some(Command::Statics { config }) => load(&config).and_then(|c| cmd_statics(&c, &cli.out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
