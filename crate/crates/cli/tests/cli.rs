use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rdna(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdna"))
        .args(args)
        .env_remove("RDNA_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_single_error_line(out: &Output) {
    let err = stderr(out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn missing_scenario_exits_1_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdna(&[
        "run",
        "--scenario",
        "/no/such/file.cfg",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_single_error_line(&out);
    assert!(stderr(&out).contains("/no/such/file.cfg"));
}

#[test]
fn zero_reps_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdna(&["run", "--reps", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_single_error_line(&out);
    assert!(stderr(&out).contains("reps"));
}

#[test]
fn parse_error_names_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    let text = rdna_core::ScenarioConfig::preset_text().replace("n_tap = 10", "n_tap = 10\nn_tapz = 3");
    fs::write(&cfg, text).unwrap();
    let out = rdna(&[
        "run",
        "--scenario",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_single_error_line(&out);
    let err = stderr(&out);
    assert!(err.contains("n_tapz") && err.contains("line"), "{err}");
}

#[test]
fn invalid_value_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.cfg");
    let text = rdna_core::ScenarioConfig::preset_text().replace("n_tap = 10", "n_tap = 0");
    fs::write(&cfg, text).unwrap();
    let out = rdna(&[
        "run",
        "--scenario",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("n_tap"));
}

#[test]
fn bad_arguments_exit_nonzero_with_one_line() {
    let out = rdna(&["fig4", "--out", "/tmp", "--n-tap-range", "9..3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_single_error_line(&out);
}

fn run_into(dir: &Path, seed: &str, threads: &str) -> (String, String) {
    let out = rdna(&[
        "run",
        "--reps",
        "50",
        "--seed",
        seed,
        "--threads",
        threads,
        "--smart",
        "--d2d",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    (
        fs::read_to_string(dir.join("summary.csv")).unwrap(),
        fs::read_to_string(dir.join("replications.csv")).unwrap(),
    )
}

#[test]
fn run_is_byte_stable() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_into(a.path(), "9", "1");
    let second = run_into(b.path(), "9", "4");
    assert_eq!(first, second);
    assert!(first.0.starts_with("metric,mean,std_err,ci_low,ci_high,n\n"));
    assert!(!first.0.contains('\r'));
    assert_eq!(first.1.lines().count(), 51);
    let other = run_into(a.path(), "10", "1");
    assert_ne!(first.0, other.0);
}

#[test]
fn seed_env_overrides_flag() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let reference = run_into(a.path(), "42", "1");
    let out = Command::new(env!("CARGO_BIN_EXE_rdna"))
        .args([
            "run",
            "--reps",
            "50",
            "--seed",
            "7",
            "--threads",
            "1",
            "--smart",
            "--d2d",
            "--out",
        ])
        .arg(b.path())
        .env("RDNA_SEED", "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(b.path().join("summary.csv")).unwrap(), reference.0);
}

#[test]
fn fig4_writes_one_table_per_variant() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdna(&[
        "fig4",
        "--reps",
        "5",
        "--n-o",
        "10,20",
        "--n-tap-range",
        "2..4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for v in ["baseline", "smart", "d2d", "smart_d2d"] {
        let csv = fs::read_to_string(dir.path().join(format!("fig4_{v}.csv"))).unwrap();
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert!(body[0].starts_with("n_tap,tau_o_no10_mean,"));
        assert_eq!(body.len(), 4);
        assert!(csv.contains(&format!("# variant = {v}")));
    }
}

#[test]
fn fig5_and_fig6_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(rdna(&["fig5", "--reps", "5", "--n-tap-range", "3..5", "--out", d])
        .status
        .success());
    let fig5 = fs::read_to_string(dir.path().join("fig5_baseline.csv")).unwrap();
    assert!(fig5.contains("p_switching_mean"));

    assert!(rdna(&[
        "fig6",
        "--ratios",
        "1,6",
        "--na",
        "1,2",
        "--xi-grid",
        "0.9,1",
        "--out",
        d
    ])
    .status
    .success());
    let fig6 = fs::read_to_string(dir.path().join("fig6_baseline.csv")).unwrap();
    assert!(fig6.ends_with("1,NA,NA,NA,NA\n"), "{fig6}");

    assert!(rdna(&["fig6", "--smart", "--xi-grid", "0.999,1", "--out", d])
        .status
        .success());
    let smart = fs::read_to_string(dir.path().join("fig6_smart.csv")).unwrap();
    for line in smart.lines().filter(|l| !l.starts_with('#')).skip(1) {
        assert!(line.split(',').skip(1).all(|w| w == "1"), "{line}");
    }
}

#[test]
fn plan_prints_key_values() {
    let out = rdna(&["plan", "--lambda-p", "1", "--xi-min", "0.9", "--tau-max", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t_w_star,0.0519"), "{text}");
    assert!(text.contains("\nw_star,"));

    let bad = rdna(&["plan", "--lambda-p", "1", "--xi-min", "1.5", "--tau-max", "0.5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_single_error_line(&bad);
}
