use std::path::Path;
use std::process::{Command, Output};

use ultratight::harness::{MetricsReport, METRICS_CSV, METRICS_JSON, RAW_IQ_FILE};
use ultratight::scenario::preset::static_desk;
use ultratight::scenario::{Cn0Schedule, ScenarioConfig};
use ultratight::signal::{read_raw, RawSidecar};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultratight")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// 12 s static scenario, long enough to switch to vector tracking.
fn short_scenario(dir: &Path) -> String {
    let mut sc = static_desk(45.0);
    sc.duration = 12.0;
    sc.cn0 = Cn0Schedule::constant(45.0, sc.duration);
    let path = dir.join("short.toml");
    std::fs::write(&path, sc.to_toml_string().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn scenario_gen_writes_a_loadable_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig8.toml");
    let o = cli(&["scenario", "gen", "--preset", "figure-eight", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sc = ScenarioConfig::from_file(&out).unwrap();
    assert_eq!(sc.satellites.len(), 8);
    assert_eq!(sc.duration, 60.0);
}

#[test]
fn unknown_preset_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x.toml");
    assert_eq!(code(&cli(&["scenario", "gen", "--preset", "spiral", "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn bad_inputs_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let out = out.to_str().unwrap();
    let missing = tmp.path().join("missing.toml");
    assert_eq!(code(&cli(&["run", "--config", missing.to_str().unwrap(), "--arch", "alfa", "--out", out])), 2);

    let garbage = tmp.path().join("garbage.toml");
    std::fs::write(&garbage, "duration = \"long\"\n").unwrap();
    assert_eq!(code(&cli(&["run", "--config", garbage.to_str().unwrap(), "--arch", "alfa", "--out", out])), 2);

    let cfg = short_scenario(tmp.path());
    assert_eq!(code(&cli(&["run", "--config", &cfg, "--arch", "pll", "--out", out])), 2);
    let o = cli(&["run", "--config", &cfg, "--arch", "alfa", "--out", out, "--fidelity", "measurement", "--raw-iq"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&cli(&["compare", "--out", out, missing.to_str().unwrap()])), 2);
}

#[test]
fn run_then_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short_scenario(tmp.path());
    let mut dirs = Vec::new();
    for arch in ["stl", "alfa"] {
        let dir = tmp.path().join(arch);
        let o = cli(&["run", "--config", &cfg, "--arch", arch, "--seed", "3", "--out", dir.to_str().unwrap(), "--fidelity", "measurement"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let report = MetricsReport::from_json(&std::fs::read_to_string(dir.join(METRICS_JSON)).unwrap()).unwrap();
        assert_eq!(report.architecture.name(), arch);
        assert_eq!(report.seed, 3);
        assert!(dir.join(METRICS_CSV).exists());
        dirs.push(dir);
    }
    let cmp = tmp.path().join("cmp");
    let o = cli(&["compare", "--out", cmp.to_str().unwrap(), dirs[0].to_str().unwrap(), dirs[1].join(METRICS_JSON).to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(cmp.join("comparison.csv")).unwrap();
    assert!(table.lines().next().unwrap().contains("alfa_minus_stl_pr_rmse_m"));
    assert_eq!(table.lines().count(), 9);
    assert!(cmp.join("plot.json").exists());
}

#[test]
fn compare_rejects_reports_with_different_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short_scenario(tmp.path());
    let mut dirs = Vec::new();
    for seed in ["1", "2"] {
        let dir = tmp.path().join(seed);
        let o = cli(&["run", "--config", &cfg, "--arch", "stl", "--seed", seed, "--out", dir.to_str().unwrap(), "--fidelity", "measurement"]);
        assert_eq!(code(&o), 0);
        dirs.push(dir.to_str().unwrap().to_string());
    }
    let cmp = tmp.path().join("cmp");
    assert_eq!(code(&cli(&["compare", "--out", cmp.to_str().unwrap(), &dirs[0], &dirs[1]])), 2);
}

#[test]
fn raw_iq_export_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let mut sc = static_desk(45.0);
    sc.duration = 0.5;
    sc.cn0 = Cn0Schedule::constant(45.0, sc.duration);
    let cfg = tmp.path().join("tiny.toml");
    std::fs::write(&cfg, sc.to_toml_string().unwrap()).unwrap();
    let dir = tmp.path().join("raw");
    let o = cli(&["run", "--config", cfg.to_str().unwrap(), "--arch", "stl", "--out", dir.to_str().unwrap(), "--raw-iq"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (block, sidecar): (_, RawSidecar) = read_raw(&dir.join(RAW_IQ_FILE)).unwrap();
    assert_eq!(sidecar.fs, sc.signal.fs);
    assert_eq!(block.len() as f64, (sc.duration * sc.signal.fs).round());
}
