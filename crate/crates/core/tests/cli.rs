use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hybridyn::config::parse_config;
use hybridyn::output::{read_trajectory_csv, STATICS_HEADER, TRAJECTORY_HEADER};

fn hybridyn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridyn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn run_writes_three_csvs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("small.cfg"),
        "preset = fig3_g_small\nlabel = small\n",
    )
    .unwrap();
    let out = hybridyn(
        dir.path(),
        &["run", "small.cfg", "--t-final", "2", "--out", "res"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    for regime in ["qq", "sc", "cb"] {
        let path = dir.path().join(format!("res/small_{regime}.csv"));
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next(), Some(TRAJECTORY_HEADER));
        assert_eq!(read_trajectory_csv(&path).unwrap().len(), 201);
    }
    let manifest = fs::read_to_string(dir.path().join("res/small_manifest.cfg")).unwrap();
    assert!(manifest.contains("file_sc = "));
    let echoed = parse_config(&manifest).unwrap();
    assert_eq!(echoed.label, "small");
    assert_eq!(echoed.integrator.t_final, 2.0);
}

#[test]
fn statics_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let doc = "label = circle\n[params]\nomega_s = 1\ng = 2\nlambda = 0\n[statics]\nbranches = 0\nguess_radii = 1.4\nguess_angles = 8\n";
    fs::write(dir.path().join("c.cfg"), doc).unwrap();
    let out = hybridyn(dir.path(), &["statics", "c.cfg"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("out/circle_statics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(STATICS_HEADER));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        assert!((r[1] * r[1] + r[2] * r[2] - 1.5).abs() < 1e-8);
    }
}

#[test]
fn coarse_step_on_stiff_preset_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = hybridyn(
        dir.path(),
        &["run", "fig2_br", "--dt", "2e-3", "--t-final", "5"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("CONSERVATION VIOLATION"));
}

#[test]
fn invalid_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "[params]\nlevels = 1\n").unwrap();
    assert_eq!(
        hybridyn(dir.path(), &["run", "bad.cfg"]).status.code(),
        Some(1)
    );
    assert_eq!(
        hybridyn(dir.path(), &["run", "no_such_preset"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(hybridyn(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        hybridyn(dir.path(), &["run", "fig2_tl", "--dt", "-1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn presets_and_seed_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = hybridyn(dir.path(), &["presets"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 7);
    assert!(text.contains("fig3_g_mid"));

    let out = hybridyn(dir.path(), &["--seed-check", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn sweep_writes_per_item_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs = dir.path().join("cfgs");
    fs::create_dir(&cfgs).unwrap();
    for (name, g) in [("a", "0.0001"), ("b", "0.1"), ("c", "1.5")] {
        let doc = format!("preset = fig3_g_small\nlabel = {name}\n[params]\ng = {g}\n");
        fs::write(cfgs.join(format!("{name}.cfg")), doc).unwrap();
    }
    fs::write(cfgs.join("notes.txt"), "ignored").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hybridyn"))
        .current_dir(dir.path())
        .env("HYBRIDYN_THREADS", "2")
        .args(["sweep", "cfgs", "--t-final", "1"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["a", "b", "c"] {
        assert!(dir
            .path()
            .join(format!("out/{name}/{name}_qq.csv"))
            .is_file());
    }

    fs::write(cfgs.join("d.cfg"), "[params]\nbogus = 1\n").unwrap();
    let out = hybridyn(dir.path(), &["sweep", "cfgs", "--t-final", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("out/c/c_sc.csv").is_file());
}
