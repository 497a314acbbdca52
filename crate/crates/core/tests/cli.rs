// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_gatecqed");

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env_remove("GATECQED_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name)
}

fn assert_schema(name: &str, value: &Value) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}\n{value:#}");
}

fn sha256(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const REFLECTION_SYNTH: &str = r#"
[synth]
seed = 21
snr_db = 40.0
dataset = { kind = "reflection_trace", f_r_ghz = 5.443, ql = 6740.0, qc = 7360.0 }
"#;

#[test]
fn reference_trace_gives_qi_near_80k() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.toml", REFLECTION_SYNTH);
    let out = run(
        &["synth", "--config", "r.toml", "--out", "data"],
        dir.path(),
    );
    let summary = json_stdout(&out);
    assert_schema("synth_summary.schema.json", &summary);
    let out = run(&["fit-resonator", "data/reflection_trace.csv"], dir.path());
    let fit = json_stdout(&out);
    assert_schema("fit_resonator.schema.json", &fit);
    let qi = fit["qi"].as_f64().unwrap();
    assert!((75_000.0..=85_000.0).contains(&qi), "Qi = {qi}");
    assert_eq!(fit["with_delay"], false);
    assert!(fit["params"].get("delay_ns").is_none());
}

#[test]
fn delay_flag_adds_parameter() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.toml", REFLECTION_SYNTH);
    json_stdout(&run(
        &["synth", "--config", "r.toml", "--out", "."],
        dir.path(),
    ));
    let fit = json_stdout(&run(
        &[
            "fit-resonator",
            "reflection_trace.csv",
            "--delay",
            "--out",
            "fit",
        ],
        dir.path(),
    ));
    assert_schema("fit_resonator.schema.json", &fit);
    assert_eq!(fit["with_delay"], true);
    assert!(fit["params"]["delay_ns"].as_f64().unwrap().abs() < 0.05);
    assert!(dir
        .path()
        .join("fit/reflection_trace_residuals.csv")
        .exists());
    assert!(dir.path().join("fit/reflection_trace_fit.json").exists());
}

#[test]
fn delay_can_come_from_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.toml", REFLECTION_SYNTH);
    json_stdout(&run(
        &["synth", "--config", "r.toml", "--out", "."],
        dir.path(),
    ));
    write(dir.path(), "fit.toml", "[fit]\nwith_delay = true\n");
    let fit = json_stdout(&run(
        &[
            "fit-resonator",
            "reflection_trace.csv",
            "--config",
            "fit.toml",
        ],
        dir.path(),
    ));
    assert_eq!(fit["with_delay"], true);
}

#[test]
fn empty_and_malformed_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "empty.csv", "");
    let out = run(&["fit-resonator", "empty.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    write(
        dir.path(),
        "bad.csv",
        "freq_ghz,re,im\n5.0,1,0\n5.1,1,0\n5.2,x,0\n",
    );
    let out = run(&["fit-resonator", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv:4"), "{err}");
    let out = run(&["fit-resonator", "missing.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["no-such-verb"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flat_trace_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("freq_ghz,re,im\n");
    for i in 0..200 {
        text.push_str(&format!("{},1,0\n", 5.0 + i as f64 * 1e-4));
    }
    write(dir.path(), "flat.csv", &text);
    let out = run(&["fit-resonator", "flat.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lorentzian_and_rabi_fits_validate() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "l.toml",
        r#"
[synth]
seed = 3
snr_db = 30.0
dataset = { kind = "lorentzian_trace", f0_ghz = 4.5, fwhm_mhz = 21.0, depth = 3.0, offset = -20.0, freq_ghz = { start = 4.4, stop = 4.6, points = 201 } }
"#,
    );
    write(
        dir.path(),
        "r.toml",
        r#"
[synth]
seed = 4
snr_db = 30.0
dataset = { kind = "rabi_trace", amplitude = 0.4, t_r_ns = 260.0, rabi_mhz = 10.0, t_ns = { start = 0.0, stop = 1000.0, points = 201 } }
"#,
    );
    json_stdout(&run(
        &["synth", "--config", "l.toml", "--out", "."],
        dir.path(),
    ));
    json_stdout(&run(
        &["synth", "--config", "r.toml", "--out", "."],
        dir.path(),
    ));
    let head = std::fs::read_to_string(dir.path().join("rabi_trace.csv")).unwrap();
    assert!(head.starts_with("t_ns,y\n"));
    let l = json_stdout(&run(
        &["fit-lorentzian", "lorentzian_trace.csv"],
        dir.path(),
    ));
    assert_schema("fit_lorentzian.schema.json", &l);
    let fwhm_mhz = l["params"]["fwhm"].as_f64().unwrap() * 1e3;
    assert!((fwhm_mhz - 21.0).abs() < 2.1, "{fwhm_mhz}");
    let r = json_stdout(&run(
        &["fit-rabi", "rabi_trace.csv", "--out", "fits", "--plot"],
        dir.path(),
    ));
    assert_schema("fit_rabi.schema.json", &r);
    assert!((r["params"]["t_r_ns"].as_f64().unwrap() - 260.0).abs() < 60.0);
    assert!(dir.path().join("fits/rabi_trace_fit.svg").exists());
    // A Lorentzian file is not a Rabi record.
    let out = run(&["fit-rabi", "lorentzian_trace.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_cavity_te101() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(
        &[
            "simulate-cavity",
            "--a-mm",
            "70",
            "--b-mm",
            "5",
            "--d-mm",
            "30",
            "--mode",
            "1,0,1",
        ],
        dir.path(),
    ));
    assert_schema("cavity.schema.json", &v);
    let f = v["f_ghz"].as_f64().unwrap();
    assert!((f - 5.44).abs() < 0.01, "{f}");
    let out = run(&["simulate-cavity", "--mode", "1,0,0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_gatemon_full_transmission() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(
        &[
            "simulate-qubit",
            "--ec-mhz",
            "190",
            "--gap-mhz",
            "1900000",
            "--transmission",
            "1",
        ],
        dir.path(),
    ));
    assert_schema("qubit_spectrum.schema.json", &v);
    let alpha = v["alpha"].as_f64().unwrap();
    assert!((alpha + 190.0 / 4.0).abs() < 0.05 * 47.5, "{alpha}");
}

#[test]
fn simulate_qubit_infers_transmission_from_config() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "q.toml",
        "[qubit]\nec_mhz = 190.0\ngap_mhz = 190000.0\ntransmissions = [0.3]\ninfer_alpha_mhz = -172.0\n",
    );
    let v = json_stdout(&run(
        &[
            "simulate-qubit",
            "--config",
            "q.toml",
            "--out",
            "q",
            "--plot",
        ],
        dir.path(),
    ));
    assert_schema("qubit_spectrum.schema.json", &v);
    let a = v["inferred_transmission"]["alpha_mhz"].as_f64().unwrap();
    assert!((a + 172.0).abs() < 1.0);
    assert!(dir.path().join("q/qubit_levels.csv").exists());
    assert!(dir.path().join("q/qubit_levels.svg").exists());
}

#[test]
fn simulate_transmon_flags() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(
        &["simulate-qubit", "--ec-mhz", "190", "--ej-mhz", "9500"],
        dir.path(),
    ));
    assert_schema("qubit_spectrum.schema.json", &v);
    let f01 = v["f01"].as_f64().unwrap();
    let approx = (8.0f64 * 9500.0 * 190.0).sqrt() - 190.0;
    assert!((f01 - approx).abs() / f01 < 0.01);
    let out = run(&["simulate-qubit", "--ej-mhz", "9500"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

const SWEEP: &str = r#"
[sweep]
profile = { kind = "file", path = "ej.csv", interpolation = "linear" }
solver = { kind = "transmon", ec_mhz = 190.0 }
cavity = { f_bare_ghz = 5.2816, g_mhz = 100.0 }
v_g = { start = 0.0, stop = 4.0, points = 5 }
"#;

#[test]
fn sweep_file_produces_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ej.csv", "V_G,EJ_MHz\n0,0\n4,40000\n");
    write(dir.path(), "s.toml", SWEEP);
    let v = json_stdout(&run(
        &["sweep-gate", "--config", "s.toml", "--out", "o"],
        dir.path(),
    ));
    assert_schema("sweep.schema.json", &v);
    let csv = std::fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "V_G,f_Q_MHz,chi_MHz,f_C_GHz,f_plus_GHz,f_minus_GHz"
    );
    assert_eq!(lines.next().unwrap(), "0,0,0,5.2816,5.2816,0");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    // Independent check of each row: f01 from the transmon solver, chi from g^2/delta.
    for r in &rows {
        let ej = 10_000.0 * r[0];
        let s = gatecqed::spectra::transmon_levels(
            &gatecqed::spectra::QubitParams::transmon(190.0, ej, 0.0),
            30,
        )
        .unwrap();
        assert_eq!(r[1], s.f01);
        let delta = 5281.6 - s.f01;
        if delta.abs() > 1000.0 {
            let chi = 100.0 * 100.0 / delta;
            assert!((r[2] - chi).abs() < 1e-9 * chi.abs().max(1.0), "{r:?}");
        }
    }
}

#[test]
fn synth_is_byte_identical_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.toml", REFLECTION_SYNTH);
    json_stdout(&run(
        &["synth", "--config", "r.toml", "--out", "a", "--plot"],
        dir.path(),
    ));
    json_stdout(&run(
        &["synth", "--config", "r.toml", "--out", "b", "--plot"],
        dir.path(),
    ));
    json_stdout(&run(
        &["synth", "--config", "r.toml", "--out", "c", "--seed", "22"],
        dir.path(),
    ));
    for f in [
        "reflection_trace.csv",
        "reflection_trace_truth.json",
        "reflection_trace.svg",
    ] {
        assert_eq!(
            sha256(&dir.path().join("a").join(f)),
            sha256(&dir.path().join("b").join(f)),
            "{f}"
        );
    }
    assert_ne!(
        sha256(&dir.path().join("a/reflection_trace.csv")),
        sha256(&dir.path().join("c/reflection_trace.csv"))
    );
}

#[test]
fn gate_map_synth_has_configured_shape() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ej.csv", "V_G,EJ_MHz\n0,0\n4,40000\n");
    write(
        dir.path(),
        "g.toml",
        r#"
[synth]
seed = 9
snr_db = 30.0

[synth.dataset]
kind = "gate_map"
qc = 7270.0
qi_intrinsic = 27000.0
gamma_q_mhz = 5.0
freq_ghz = { start = 5.2, stop = 5.4, points = 41 }

[synth.dataset.sweep]
profile = { kind = "file", path = "ej.csv" }
solver = { kind = "transmon", ec_mhz = 190.0 }
cavity = { f_bare_ghz = 5.2816, g_mhz = 100.0 }
v_g = { start = 0.0, stop = 4.0, points = 9 }
"#,
    );
    json_stdout(&run(
        &["synth", "--config", "g.toml", "--out", "."],
        dir.path(),
    ));
    let text = std::fs::read_to_string(dir.path().join("gate_map.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 9);
    assert!(lines[0].starts_with("v_g\\freq_ghz,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 42));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.toml", REFLECTION_SYNTH);
    let out = Command::new(BIN)
        .args(["synth", "--config", "r.toml"])
        .current_dir(dir.path())
        .env("GATECQED_OUT_DIR", dir.path().join("env_out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("env_out/reflection_trace.csv").exists());
}

#[test]
fn invalid_synth_spec_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.toml",
        "[synth]\nseed = 1\ndataset = { kind = \"reflection_trace\", f_r_ghz = 5.4, qc = 7000.0 }\n",
    );
    let out = run(&["synth", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    write(dir.path(), "typo.toml", "[synth]\nseed = 1\nsnr = 3\n");
    let out = run(&["synth", "--config", "typo.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn default_pipeline_passes() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(&["pipeline", "--out", "."], dir.path()));
    assert_schema("pipeline_report.schema.json", &v);
    assert_eq!(v["pass"], true);
    assert!(dir.path().join("pipeline_report.json").exists());
}

#[test]
fn tightened_pipeline_fails_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "p.toml",
        r#"
[[pipeline.cases]]
name = "tight"
tolerances = { ql = { rel = 1e-4 } }
[pipeline.cases.synth]
seed = 2
snr_db = 30.0
dataset = { kind = "reflection_trace", f_r_ghz = 5.2816, qi = 27000.0, qc = 7270.0 }
"#,
    );
    let out = run(&["pipeline", "--config", "p.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_schema("pipeline_report.schema.json", &v);
    assert_eq!(v["pass"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL tight/ql"));
}

#[test]
fn missing_stage_input_is_labelled() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "p.toml",
        r#"
[[pipeline.cases]]
name = "external"
input = "nowhere.csv"
estimator = "reflection"
truth = { ql = 1000.0 }
tolerances = { ql = { rel = 0.1 } }
"#,
    );
    let out = run(&["pipeline", "--config", "p.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stage 'external/load'"), "{err}");
}
