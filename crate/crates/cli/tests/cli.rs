use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dyonlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyonlab"))
        .args(args)
        .env_remove("DYONLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = dyonlab(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn value(r: &Value, name: &str) -> f64 {
    r["results"][name]["value"]
        .as_f64()
        .unwrap_or_else(|| panic!("no result {name}: {r}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn unit_quanta_give_trivial_phase() {
    let r = report(&[
        "phase",
        "--nq",
        "1",
        "--ng",
        "1",
        "--theta",
        "0",
        "--flux-quanta",
        "--n",
        "1",
    ]);
    assert!(value(&r, "phase").abs() < 1e-12);
    assert_eq!(r["passed"], true);
}

#[test]
fn half_turn_cross_section() {
    let r = report(&[
        "scatter",
        "--theta",
        "3.14159265",
        "--k",
        "1",
        "--phi",
        "3.14159265",
    ]);
    assert!((value(&r, "cross_section") - 0.1591549).abs() < 1e-6);
    assert!((value(&r, "partial_wave") - 0.1591549).abs() < 1e-6);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("r{i}.json"));
            let o = dyonlab(&[
                "check",
                "--suite",
                "scattering",
                "--seed",
                "9",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(o.status.success());
            fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(!String::from_utf8_lossy(&runs[0]).contains("wall_time_s"));
}

#[test]
fn timing_is_opt_in() {
    let r = report(&["vacuum", "--m", "10", "--timing"]);
    assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn negative_flag_values_parse() {
    let r = report(&[
        "phase", "--q", "-0.5", "--g", "0", "--phi-m", "-3", "--phi-e", "0", "--n", "-2",
    ]);
    assert!((value(&r, "phase") + 3.0).abs() < 1e-12);
}

#[test]
fn witten_partner_passes_pairing() {
    let r = report(&[
        "charges", "--nq", "1", "--ng", "1", "--theta", "0.3", "--nq2", "2", "--ng2", "-1",
    ]);
    assert!((value(&r, "sz_pairing") + 1.5).abs() < 1e-9);
    assert_eq!(
        r["data"]["string_phase_label"]
            .as_str()
            .unwrap()
            .split(':')
            .next(),
        Some("heuristic")
    );
}

#[test]
fn failed_pairing_exits_one() {
    let out = dyonlab(&["charges", "--q", "1", "--g", "0.3", "--nq2", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sz_quantised"));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["bogus"],
        vec!["check", "--suite", "nope"],
        vec!["scatter", "--theta", "1", "--phi", "0"],
        vec!["phase", "--nq", "1", "--q", "1", "--flux-quanta"],
        vec![
            "loop-integral",
            "--path",
            "/nonexistent/path.csv",
            "--theta",
            "1",
        ],
    ] {
        assert_eq!(dyonlab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"charges": {"nq": 1}}"#);
    let out = dyonlab(&["phase", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `nq`"));
    let cfg = write(dir.path(), "v.json", r#"{"schema_version": 2}"#);
    assert_eq!(
        dyonlab(&["vacuum", "--config", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn bad_thread_count_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_dyonlab"))
        .args(["vacuum", "--m", "5"])
        .env("DYONLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "seed": 5, "vacuum": {"theta": 0.5, "m": 8}}"#,
    );
    let r = report(&["vacuum", "--config", &cfg, "--theta", "1.5"]);
    assert_eq!(r["seed"], 5);
    assert_eq!(r["inputs"]["m"], 8);
    assert_eq!(r["inputs"]["theta"].as_f64(), Some(1.5));
}

#[test]
fn csv_outputs_have_headers() {
    let dir = TempDir::new().unwrap();
    let csv = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let cases: [(&[&str], &str, &str); 3] = [
        (&["vacuum", "--m", "4"], "v.csv", "n,re,im"),
        (&["fringe", "--theta", "1"], "f.csv", "x,intensity"),
        (
            &[
                "scatter",
                "--alpha-eff",
                "0.3",
                "--phi-min",
                "0.5",
                "--phi-max",
                "3",
                "--points",
                "4",
            ],
            "s.csv",
            "phi,closed_form,partial_wave,rel_error",
        ),
    ];
    for (args, name, header) in cases {
        let path = csv(name);
        let mut a = args.to_vec();
        a.extend(["--csv", path.as_str()]);
        report(&a);
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header));
        assert!(lines.count() >= 4, "{name}");
    }
}

#[test]
fn loop_integral_counts_windings() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "sq.csv", "x,y\n1,0\n0,1\n-1,0\n0,-1\n1,0\n");
    let r = report(&["loop-integral", "--path", &path, "--theta", "0.7"]);
    assert!((value(&r, "integral") - 0.7).abs() < 1e-8);
    assert_eq!(r["results"]["winding"]["value"], 1);
}

#[test]
fn flux_rule_from_integers() {
    let r = report(&[
        "flux",
        "--n-phi-e",
        "1",
        "--n-phi-m",
        "2",
        "--nq",
        "1",
        "--ng",
        "1",
        "--theta",
        "0.5",
    ]);
    assert_eq!(r["results"]["flux_rule_n"]["value"], 1);
    assert!((value(&r, "phase") - std::f64::consts::TAU).abs() < 1e-9);
}

#[test]
fn fringe_shift_matches_prediction() {
    let r = report(&["fringe", "--theta", "3.14159"]);
    let period = value(&r, "period");
    assert!((value(&r, "delta_x") - value(&r, "predicted")).abs() <= 0.02 * period);
}

#[test]
fn algebra_suite_passes() {
    let r = report(&["check", "--suite", "algebra"]);
    assert_eq!(r["passed"], true);
    assert!(r["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn evolve_from_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"evolution": {"n": 48, "dx": 1.0, "radius_eps": 1.0, "mass": 1.0, "dt": 0.5, "steps": 20,
            "packet": {"center": [12.0, 30.0], "sigma": 3.0, "k": [0.5, 0.0]}, "alpha_eff": 0.25}}"#,
    );
    let r = report(&["evolve", "--config", &cfg]);
    assert!(value(&r, "max_step_drift") < 1e-10);
    assert!((value(&r, "final_norm") - 1.0).abs() < 1e-8);
    assert_eq!(dyonlab(&["evolve"]).status.code(), Some(2));
}

#[test]
fn quick_two_path_recovers_phase() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("p.csv");
    let r = report(&[
        "two-path",
        "--preset",
        "quick",
        "--alpha-eff",
        "0.3",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!((value(&r, "measured_phase") - 0.6 * std::f64::consts::PI).abs() < 1e-2);
    assert!(fs::read_to_string(csv)
        .unwrap()
        .starts_with("y,intensity\n"));
}

#[test]
fn grazing_two_path_is_invalid_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"two_path": {"alpha_eff": 0.3, "geometry": {"n": 256, "dx": 1.0, "radius_eps": 1.0, "mass": 1.0,
            "sigma": 8.0, "speed": 0.85, "source_x": 60.0, "source_y": 2.0, "meet_x": 100.0, "dt": 0.25,
            "absorb_margin": 12, "guard_radius": 3.0}}}"#,
    );
    let out = dyonlab(&["two-path", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn shipped_configs_run() {
    let docs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/configs");
    let dir = TempDir::new().unwrap();
    for (file, command) in [
        ("phase_witten.json", "phase"),
        ("scatter_scan.json", "scatter"),
        ("evolve.json", "evolve"),
        ("two_path_quick.json", "two-path"),
    ] {
        let cfg = docs.join(file);
        let csv = dir.path().join(format!("{command}.csv"));
        let r = report(&[
            command,
            "--config",
            cfg.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(r["passed"], true, "{file}");
    }
}
