//! Black-box tests of the binary: exit codes, determinism of outputs, and
//! the documented command surface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn vicert(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vicert"))
        .args(args)
        .current_dir(dir)
        .env("VICERT_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("vicert-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn no_args_prints_usage_and_fails() {
    let d = tmpdir("usage");
    let out = vicert(&[], &d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("USAGE"));
}

#[test]
fn missing_file_is_a_parse_error_exit_1() {
    let d = tmpdir("missing");
    let out = vicert(
        &["certify", "--config", "no-such-file.json", "--draw", "3", "--beta", "0.1", "--seed", "1"],
        &d,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_flag_value_exit_1() {
    let d = tmpdir("badflag");
    let out = vicert(&["epsilon-table", "--K", "ten", "--beta", "0.1"], &d);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn epsilon_table_has_all_levels() {
    let d = tmpdir("etable");
    let out = vicert(&["epsilon-table", "--K", "100", "--beta", "1e-6"], &d);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102); // header + h = 0..=100
    assert_eq!(lines[0], "h,epsilon");
    // the exact even-split level at h = 4
    assert!(lines[5].starts_with("4,0.2953309"), "{}", lines[5]);
    assert_eq!(lines[101], "100,1");
}

#[test]
fn certify_triangle_demo() {
    let d = tmpdir("certtri");
    let args = ["certify", "--family", "triangle", "--draw", "3", "--beta", "0.1", "--seed", "1"];
    let out = vicert(&args, &d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["K"], 3);
    assert_eq!(v["s_K"], 1);
    assert!((v["epsilon"].as_f64().unwrap() - 0.894_590_7).abs() < 1e-6);
    // re-running is byte-identical
    let again = vicert(&args, &d);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn solve_runs_are_byte_identical() {
    let d = tmpdir("solvedet");
    // generate a small instance, then solve its problem file twice
    let gen = vicert(
        &["pev-gen", "--desk", "--n", "3", "--t", "6", "--seed", "5", "--draw", "4", "--out", "inst"],
        &d,
    );
    assert_eq!(gen.status.code(), Some(0), "{}", String::from_utf8_lossy(&gen.stderr));
    let problem = d.join("inst").join("problem.json");
    assert!(problem.exists());
    let args = [
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--seed",
        "7",
        "--restarts",
        "12",
    ];
    let a = vicert(&args, &d);
    let b = vicert(&args, &d);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
    // a different seed changes the cloud
    let c = vicert(
        &["solve", "--problem", problem.to_str().unwrap(), "--seed", "8", "--restarts", "12"],
        &d,
    );
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn violation_reports_bound_and_holds_on_triangle() {
    let d = tmpdir("violtri");
    let out = vicert(
        &[
            "violation", "--family", "pev", "--desk", "--n", "3", "--t", "6", "--draw", "20",
            "--beta", "1e-3", "--fresh", "300", "--repetitions", "2", "--seed", "3",
            "--restarts", "10",
        ],
        &d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["bound_held"], serde_json::json!([true, true]));
    assert!(v["report"]["v_max"].as_f64().unwrap() <= v["certificate"]["epsilon"].as_f64().unwrap());
}

#[test]
fn report_sweep_writes_artifacts() {
    let d = tmpdir("sweep");
    let out = vicert(
        &[
            "report", "--sweep", "--family", "pev", "--desk", "--n", "3", "--t", "6",
            "--k-list", "0,5,10", "--beta", "1e-3", "--repetitions", "2", "--fresh", "200",
            "--seed", "6", "--restarts", "8", "--out", "exp",
        ],
        &d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(d.join("exp").join("table.csv")).unwrap();
    assert!(table.starts_with("K,active_count,s_K,epsilon,v_max,v_avg,shrink,bound_held,vacuous"));
    assert_eq!(table.lines().count(), 4);
    assert!(d.join("exp").join("certificate_K5.json").exists());
}

#[test]
fn report_aggregates_a_cloud() {
    let d = tmpdir("aggreport");
    // build an instance and a cloud through the public surface
    let gen = vicert(
        &["pev-gen", "--desk", "--n", "3", "--t", "6", "--seed", "5", "--draw", "0", "--out", "inst"],
        &d,
    );
    assert_eq!(gen.status.code(), Some(0));
    let problem = d.join("inst").join("problem.json");
    let solve = vicert(
        &[
            "solve", "--problem", problem.to_str().unwrap(), "--seed", "7", "--restarts", "10",
            "--format", "csv", "--out", "cloud",
        ],
        &d,
    );
    assert_eq!(solve.status.code(), Some(0), "{}", String::from_utf8_lossy(&solve.stderr));
    let out = vicert(
        &[
            "report", "--desk", "--n", "3", "--t", "6", "--seed", "5", "--cloud", "cloud.csv",
            "--out", "agg.csv", "--svg", "agg.svg",
        ],
        &d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("agg.csv")).unwrap();
    assert!(csv.starts_with("t,d_nom,sigma_avg,total_avg,capacity"));
    let svg = std::fs::read_to_string(d.join("agg.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}
