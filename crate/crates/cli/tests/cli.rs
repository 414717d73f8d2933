use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_names_six_scenarios() {
    let o = qmem(&["list"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
    let o = qmem(&["list", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[mux]\ntrials = 20000\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = qmem(&["run", "fig4", "--config", &cfg, "--seed", "5", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "report.json"));
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["scenario"], "fig4");
}

#[test]
fn exchange_schedule_validates() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "x.qmc", "# exchange time bins\nf1t1 retime t2\nf2t2 retime t1\n");
    let o = qmem(&["validate", &s]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 channels, 2 outputs"));
}

#[test]
fn collision_names_both_lines() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "c.qmc", "input f1t1 f2t2\nf1t1 retime t2\nf2t2 shift f1\n");
    let o = qmem(&["validate", &s]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("f1t2") && err.contains("lines 2 and 3"), "{err}");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "p.qmc", "f1t1 retime t2\nf2t2 teleport t1\n");
    let o = qmem(&["validate", &s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn empty_schedule_warns() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "e.qmc", "# nothing to do\n");
    let o = qmem(&["validate", &s]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("no channels"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qmem(&["run", "fig9"]).status.code(), Some(2));
    assert_eq!(qmem(&["run", "fig2a", "--bogus"]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(qmem(&["run", "fig2a", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.toml", "[tomography]\nresamples = 5\n");
    let o = qmem(&["run", "qpt", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("resamples"));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "seed = 1\n[mux]\ntrails = 5\n");
    let o = qmem(&["run", "fig3c", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("trails") && err.contains("line 3"), "{err}");
}

#[test]
fn scenario_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "scenario = \"capacity\"\n");
    let out = dir.path().join("out");
    let o = qmem(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("mode_grid_60x50x51"));
    assert!(out.join("report.json").exists());
}

#[test]
fn config_schedule_is_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "swap.qmc", "input f1t2\nf1t2 shift f2\n");
    let cfg = write(dir.path(), "c.toml", "schedule = \"swap.qmc\"\n[mux]\ntrials = 10000\n");
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_qmem"))
        .current_dir(std::env::temp_dir())
        .args(["run", "fig4", "--config", &cfg, "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("qmc_fidelity_f1t2->f2t2"));
}

#[test]
fn shipped_config_is_the_default() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/calibrated.toml");
    let cfg: qmem::scenarios::ScenarioConfig = toml::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(cfg, qmem::scenarios::ScenarioConfig::default());
}

#[test]
fn shipped_schedules_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["exchange.qmc", "swap_both.qmc", "split.qmc"] {
        let o = qmem(&["validate", dir.join(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
}

#[test]
fn partial_blocks_keep_other_defaults() {
    let cfg: qmem::scenarios::ScenarioConfig =
        toml::from_str("[calibration]\nmu = 0.5\n[timing]\ngate_us = 0.8\n[mux.leak]\nspatial = 0.01\n").unwrap();
    let d = qmem::scenarios::ScenarioConfig::default();
    assert_eq!(cfg.calibration.mu, 0.5);
    assert_eq!(cfg.calibration.eta_sw, d.calibration.eta_sw);
    assert_eq!(cfg.timing.gate_us, 0.8);
    assert_eq!(cfg.timing.delta_hz, d.timing.delta_hz);
    assert_eq!(cfg.mux.leak.spatial, 0.01);
}
