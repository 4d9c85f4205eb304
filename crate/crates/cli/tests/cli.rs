use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ehtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehtx")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn pee_prints_example_value() {
    let v = json_stdout(&ehtx(&["pee"]));
    let p = v["result"]["p_ee_w"].as_f64().unwrap();
    assert!((p - 0.0792).abs() < 1e-4);
}

#[test]
fn offline_writes_schedule_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let v = json_stdout(&ehtx(&["offline", "--out", out]));
    assert!((v["result"]["throughput_bits"].as_f64().unwrap() / 1e6 - 63.14).abs() < 0.02);
    assert_eq!(v["result"]["i_ee"], 3);
    let csv = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    assert!(csv.starts_with("start_s,end_s,power_W,total_power_W\n"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary, v);
}

#[test]
fn staircase_and_multichannel_run() {
    let v = json_stdout(&ehtx(&["staircase"]));
    assert!((v["result"]["throughput_bits"].as_f64().unwrap() / 1e6 - 55.80).abs() < 0.02);
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&ehtx(&["multichannel", "--out", dir.path().to_str().unwrap()]));
    assert_eq!(v["result"]["channels"], 3);
    let csv = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    assert!(csv.starts_with("start_s,end_s,power_W,total_power_W,power_0_W,power_1_W,power_2_W\n"));
}

#[test]
fn online_trace_and_policy_flag() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&ehtx(&["online", "--out", dir.path().to_str().unwrap()]));
    assert!((v["result"]["throughput_bits"].as_f64().unwrap() / 1e6 - 61.61).abs() < 0.3);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("time_s,E_s_J,power_W,on_fraction,bits\n"));
    assert!(trace.lines().count() > 2000);
    let eep = json_stdout(&ehtx(&["online", "--policy", "eep", "--step", "0.005"]));
    assert_eq!(eep["result"]["policy"], "eep");
    assert_eq!(eep["result"]["time_step_s"], 0.005);
}

#[test]
fn sweep_csv_is_bit_identical_across_runs() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = ehtx(&["sweep_lambda", "--trials", "3", "--seed", seed, "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("results.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(fs::read(a.path().join("summary.json")).unwrap(), fs::read(b.path().join("summary.json")).unwrap());
    let csv = String::from_utf8(read(&a)).unwrap();
    assert!(csv.starts_with("sweep_value,seed,policy,throughput_bits,runtime_ms\n"));
    assert_eq!(csv.lines().count(), 1 + 10 * 3 * 4);
}

#[test]
fn horizon_and_ofdma_sweeps_run() {
    let v = json_stdout(&ehtx(&["sweep_horizon", "--trials", "2"]));
    assert_eq!(v["rows"], 4 * 2 * 4);
    let v = json_stdout(&ehtx(&["ofdma", "--trials", "2"]));
    assert_eq!(v["rows"], 8 * 2 * 4);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
        let scenario = stem.split("_generated").next().unwrap();
        let out = ehtx(&[scenario, "--config", path.to_str().unwrap(), "--print-config"]);
        assert!(out.status.success(), "{stem}: {}", String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert!(seen >= 8);
}

#[test]
fn invalid_input_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"channel": {"bandwidth_hz": 1e6}}"#).unwrap();
    let out = ehtx(&["pee", "--config", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");

    let out = ehtx(&["sweep_lambda", "--trials", "0"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");

    fs::write(&bad, r#"{"channel": {"bandwidth_hz": 1e6, "noise_density_w_per_hz": 1e-16, "gain": 1e-8}, "circuit": {"alpha_w": 0.1},
        "profile": {"initial_energy_j": 0.5, "horizon_s": 10, "arrivals": [{"time_s": 12, "energy_j": 1}]}}"#)
        .unwrap();
    let out = ehtx(&["offline", "--config", bad.to_str().unwrap()]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_profile");

    assert!(!ehtx(&["no_such_scenario"]).status.success());
}
