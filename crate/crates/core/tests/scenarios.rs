use qmem::mux::parse_schedule;
use qmem::scenarios::{run_scenario, MetricValue, Provenance, ScenarioConfig, SCENARIOS};

fn quick() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.mux.trials = 20_000;
    cfg.tomography.resamples = 100;
    cfg
}

#[test]
fn every_scenario_runs_and_repeats() {
    let cfg = quick();
    for (name, _) in SCENARIOS {
        let a = run_scenario(name, &cfg, None).unwrap();
        let b = run_scenario(name, &cfg, None).unwrap();
        assert_eq!(a, b, "{name}");
        assert!(!a.metrics.is_empty(), "{name}");
        for art in &a.artifacts {
            assert!(!art.contents.is_empty(), "{name}/{}", art.name);
        }
    }
}

#[test]
fn seed_changes_stochastic_output() {
    let cfg = quick();
    let other = ScenarioConfig { seed: cfg.seed + 1, ..cfg.clone() };
    let a = run_scenario("fig2a", &cfg, None).unwrap();
    let b = run_scenario("fig2a", &other, None).unwrap();
    assert_ne!(a.artifacts, b.artifacts);
}

#[test]
fn capacity_is_exact() {
    let r = run_scenario("capacity", &ScenarioConfig::default(), None).unwrap();
    let count = |n: &str| match r.metric(n).unwrap().value {
        MetricValue::Count(c) => c,
        ref v => panic!("{n}: {v:?}"),
    };
    assert_eq!(count("temporal_capacity"), 10);
    assert_eq!(count("mode_grid_2x2x3"), 12);
    assert_eq!(count("mode_grid_60x50x51"), 153_000);
    assert!(r.metrics.iter().all(|m| m.provenance == Provenance::Derived));
}

#[test]
fn storage_timing_is_exact() {
    let r = run_scenario("fig2a", &quick(), None).unwrap();
    assert_eq!(r.metric("storage_time_us").unwrap().as_f64(), Some(12.68));
    assert_eq!(r.metric("afc_delay_us").unwrap().as_f64(), Some(5.0));
}

#[test]
fn table1_has_eight_rows() {
    let r = run_scenario("table1", &quick(), None).unwrap();
    let rows = r.metrics.iter().filter(|m| m.name.starts_with("fidelity_")).count();
    assert_eq!(rows, 8);
    let csv = &r.artifacts.iter().find(|a| a.name == "table1.csv").unwrap().contents;
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn custom_schedule_replaces_builtin_conversion() {
    let s = parse_schedule("input f1t2\nf1t2 shift f2\n").unwrap();
    let r = run_scenario("fig4", &quick(), Some(&s)).unwrap();
    assert_eq!(r.metric("qmc_outputs").unwrap().value, MetricValue::Count(1));
    assert!(r.metric("qmc_fidelity_f1t2->f2t2").is_some());
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = quick();
    cfg.tomography.resamples = 10;
    assert!(run_scenario("qpt", &cfg, None).is_err());
    assert!(run_scenario("nope", &quick(), None).is_err());
}
