use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binomci"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv_text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(Result::unwrap).collect();
    (header, rows)
}

fn field(header: &csv::StringRecord, row: &csv::StringRecord, name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn interval_cp_example() {
    let (h, r) = rows(&stdout(&[
        "interval", "--n", "10", "--k", "5", "--delta", "0.05", "--method", "cp",
    ]));
    assert_eq!(r.len(), 1);
    assert!((field(&h, &r[0], "lower") - 0.187_086_028_447_398_53).abs() < 1e-9);
    assert!((field(&h, &r[0], "upper") - 0.812_913_971_552_601_47).abs() < 1e-9);
}

#[test]
fn interval_cp_zero_successes() {
    let (h, r) = rows(&stdout(&[
        "interval", "--n", "10", "--k", "0", "--delta", "0.05", "--method", "cp",
    ]));
    assert_eq!(field(&h, &r[0], "lower"), 0.0);
    assert!((field(&h, &r[0], "upper") - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
}

#[test]
fn interval_defaults_to_all_methods() {
    let (h, r) = rows(&stdout(&["interval", "--n", "20", "--k", "7", "--delta", "0.01"]));
    let names: Vec<&str> = r.iter().map(|x| &x[0]).collect();
    assert_eq!(names, ["cp", "rigorous", "tuned", "wald", "wilson"]);
    for row in &r {
        assert!(field(&h, row, "lower") < field(&h, row, "upper"));
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["interval", "--n", "10", "--k", "11", "--delta", "0.05"],
        vec!["interval", "--n", "10", "--k", "5", "--delta", "1.5"],
        vec![
            "interval", "--n", "10", "--k", "5", "--delta", "0.05", "--method", "bogus",
        ],
        vec![
            "interval", "--n", "10", "--k", "5", "--delta", "0.02", "--method", "tuned",
        ],
        vec![
            "coverage", "--method", "cp", "--n", "10", "--p", "1.0", "--delta", "0.05",
        ],
        vec!["tune", "--delta", "1.5"],
        vec![
            "sweep", "--axis", "p", "--n", "10", "--delta", "0.05", "--grid", "",
        ],
        vec!["sweep", "--axis", "p", "--n", "10", "--delta", "0.05"],
        vec!["sweep", "--preset", "99"],
        vec!["interval", "--n", "10"],
        vec!["nonsense"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_four() {
    let out = run(&[
        "--out",
        "/nonexistent-dir/x.csv",
        "interval",
        "--n",
        "10",
        "--k",
        "5",
        "--delta",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn coverage_examples() {
    let (h, r) = rows(&stdout(&[
        "coverage", "--method", "cp", "--n", "50", "--p", "0.3", "--delta", "0.05",
    ]));
    assert!(field(&h, &r[0], "coverage") >= 0.95);

    // exhaustive-enumeration value frozen from the library tests
    let (h, r) = rows(&stdout(&[
        "coverage", "--method", "wald", "--n", "40", "--p", "0.5", "--delta", "0.05",
    ]));
    assert!((field(&h, &r[0], "coverage") - 0.919_309_532_248_007_6).abs() < 1e-12);

    let (h, r) = rows(&stdout(&[
        "coverage", "--method", "rigorous", "--n", "10", "--p", "0.999", "--delta", "0.05",
    ]));
    assert_eq!(&r[0][5], "strict");
    let c = field(&h, &r[0], "coverage");
    assert!((0.95..=1.0).contains(&c));
}

#[test]
fn coverage_with_monte_carlo_row() {
    let (h, r) = rows(&stdout(&[
        "--seed", "9", "coverage", "--method", "wilson", "--n", "30", "--p", "0.2", "--delta", "0.05",
        "--mc", "20000",
    ]));
    assert_eq!(r.len(), 2);
    assert_eq!(&r[1][0], "monte_carlo");
    assert_eq!(field(&h, &r[1], "seed"), 9.0);
    let gap = (field(&h, &r[1], "coverage") - field(&h, &r[0], "coverage")).abs();
    assert!(gap <= 4.0 * field(&h, &r[1], "std_error"));
}

#[test]
fn sweep_over_k_has_one_row_per_k_and_method() {
    let text = stdout(&[
        "sweep",
        "--axis",
        "k",
        "--n",
        "10",
        "--delta",
        "0.05",
        "--methods",
        "cp,rigorous",
    ]);
    let (h, r) = rows(&text);
    assert_eq!(r.len(), 22);
    for pair in r.chunks(2) {
        assert_eq!(&pair[0][0], "cp");
        assert_eq!(&pair[1][0], "rigorous");
        assert!(field(&h, &pair[1], "raw_lower") <= field(&h, &pair[0], "lower"));
        assert!(field(&h, &pair[0], "upper") <= field(&h, &pair[1], "raw_upper"));
    }
}

#[test]
fn sweep_over_p_rigorous_min_coverage() {
    let (h, r) = rows(&stdout(&[
        "sweep",
        "--axis",
        "p",
        "--grid",
        "0.001:0.001:0.999",
        "--n",
        "100",
        "--delta",
        "0.05",
        "--methods",
        "rigorous",
    ]));
    assert_eq!(r.len(), 999);
    let min = r.iter().map(|x| field(&h, x, "coverage")).fold(1.0, f64::min);
    assert!(min >= 0.95, "{min}");
}

#[test]
fn sweep_summary_goes_to_stderr_without_out() {
    let out = run(&[
        "sweep",
        "--axis",
        "n",
        "--p",
        "0.5",
        "--grid",
        "10:10:50",
        "--delta",
        "0.05",
        "--methods",
        "wald",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("method=wald cells=5 min_coverage="), "{err}");
}

#[test]
fn preset_matches_explicit_flags() {
    let a = stdout(&["sweep", "--preset", "21", "--grid", "10:10:200"]);
    let b = stdout(&[
        "sweep",
        "--axis",
        "n",
        "--p",
        "0.5",
        "--delta",
        "0.05",
        "--grid",
        "10:10:200",
        "--methods",
        "wald,tuned,rigorous",
    ]);
    let (_, ra) = rows(&a);
    let (_, rb) = rows(&b);
    assert_eq!(ra, rb);
}

#[test]
fn tune_reports_feasible_theta() {
    let (h, r) = rows(&stdout(&[
        "tune",
        "--delta",
        "0.05",
        "--n-set",
        "10,50,100",
        "--p-grid",
        "0.01:0.01:0.99",
    ]));
    let star = field(&h, &r[0], "theta_star");
    let rig = field(&h, &r[0], "theta_rigorous");
    assert!((rig - 0.304_970_659_517_043_9).abs() < 1e-12);
    assert!(star >= rig);
    assert!(field(&h, &r[0], "binding_coverage") >= 0.95);
}

#[test]
fn tuned_theta_override() {
    let (h, r) = rows(&stdout(&[
        "--tuned-theta",
        "0.02=0.4",
        "interval",
        "--n",
        "10",
        "--k",
        "5",
        "--delta",
        "0.02",
        "--method",
        "tuned",
    ]));
    assert_eq!(field(&h, &r[0], "theta"), 0.4);
}

#[test]
fn json_schema() {
    let text = stdout(&[
        "--format",
        "json",
        "interval",
        "--n",
        "10",
        "--k",
        "3",
        "--delta",
        "0.05",
        "--method",
        "cp,wilson",
    ]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["params"]["command"], "interval");
    assert_eq!(v["params"]["n"], 10);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["method"], "cp");
    assert!(rows[0]["theta"].is_null());
    let keys: Vec<&String> = rows[1].as_object().unwrap().keys().collect();
    assert_eq!(keys[0], "method");
    assert_eq!(keys.last().unwrap().as_str(), "width");
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["interval", "--n", "37", "--k", "4", "--delta", "0.001"];
    let (h, r) = rows(&stdout(&args));
    let mut json_args = vec!["--format", "json"];
    json_args.extend(args);
    let v: Value = serde_json::from_str(&stdout(&json_args)).unwrap();
    for (row, j) in r.iter().zip(v["rows"].as_array().unwrap()) {
        for col in ["lower", "upper", "width"] {
            assert_eq!(field(&h, row, col), j[col].as_f64().unwrap());
        }
    }
}

#[test]
fn out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let p = path.to_str().unwrap();
    let out = run(&["--out", p, "interval", "--n", "10", "--k", "5", "--delta", "0.05"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("method,n,k,delta,theta,lower,upper,raw_lower,raw_upper,width\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "--format", "json", "--seed", "5", "coverage", "--method", "tuned", "--n", "80", "--p", "0.37",
        "--delta", "0.05", "--mc", "10000",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn single_cell_grid_writes_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let out = run(&[
        "--out",
        path.to_str().unwrap(),
        "sweep",
        "--axis",
        "p",
        "--grid",
        "0.5",
        "--n",
        "10",
        "--delta",
        "0.05",
        "--methods",
        "cp",
    ]);
    assert!(out.status.success());
    let (_, r) = rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(r.len(), 1);
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.starts_with("method=cp cells=1 "), "{summary}");
}
