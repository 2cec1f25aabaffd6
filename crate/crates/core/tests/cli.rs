use std::io::Write;
use std::process::{Command, Output};

use confounding_interval::cli::format::rounded;
use confounding_interval::model::{SensitivityTuple, SummaryStats};
use confounding_interval::oracle::synthesize_data;
use confounding_interval::prior::quantile;
use serde_json::Value;

const CASE_STUDY: &[&str] = &[
    "--rho-xy",
    "-0.11",
    "--sigma-ratio",
    "42.94",
    "--r2x",
    "0.1",
    "0.5",
    "--r2y",
    "0",
    "0.2",
];

fn confint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn with(sub: &str, base: &[&str], extra: &[&str]) -> Vec<String> {
    std::iter::once(sub)
        .chain(base.iter().copied())
        .chain(extra.iter().copied())
        .map(String::from)
        .collect()
}

fn run(args: Vec<String>) -> Output {
    confint(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn interval_prints_case_study_endpoints() {
    let o = run(with("interval", CASE_STUDY, &[]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[-36.60, 17.71]"), "{}", stdout(&o));

    let o = run(with("interval", CASE_STUDY, &["--rho-hxhy", "0", "1"]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[-36.60, -5.25]"));
}

#[test]
fn interval_rejects_inverted_bounds() {
    let o = confint(&[
        "interval",
        "--rho-xy",
        "-0.11",
        "--sigma-ratio",
        "42.94",
        "--r2x",
        "0.6",
        "0.5",
        "--r2y",
        "0",
        "0.2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lower bound exceeds upper"));
    assert!(stderr(&o).contains("r2x"));
}

#[test]
fn interval_reports_empty_feasible_set() {
    let o = confint(&[
        "interval",
        "--rho-xy",
        "0.9",
        "--sigma-ratio",
        "1",
        "--r2x",
        "0.9",
        "0.95",
        "--r2y",
        "0.9",
        "0.95",
        "--rho-hxhy",
        "-1",
        "-0.9",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn missing_required_value_is_invalid_input() {
    let o = confint(&["interval", "--sigma-ratio", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rho-xy"));
}

#[test]
fn interval_json_parses_back() {
    let o = run(with("interval", CASE_STUDY, &["--format", "json"]));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lower = v["lower"].as_f64().unwrap();
    assert_eq!(lower, rounded(-36.604440545526));
    assert!((v["upper"].as_f64().unwrap() - 17.71).abs() < 0.01);
    assert_eq!(v["argmin"]["rho_hxhy"].as_f64(), Some(1.0));
    assert!(v["candidates"]["distinct"].as_u64().unwrap() >= 1);
}

#[test]
fn csv_and_json_agree_exactly() {
    let csv = stdout(&run(with("interval", CASE_STUDY, &["--format", "csv"])));
    let json: Value = serde_json::from_str(&stdout(&run(with(
        "interval",
        CASE_STUDY,
        &["--format", "json"],
    ))))
    .unwrap();
    let row = &csv_rows(&csv)[0];
    assert_eq!(
        row[0].parse::<f64>().unwrap(),
        json["lower"].as_f64().unwrap()
    );
    assert_eq!(
        row[1].parse::<f64>().unwrap(),
        json["upper"].as_f64().unwrap()
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        f,
        "# case study\nrho-xy = -0.11\nsigma-ratio = 42.94\nr2x = 0.1 0.5\nr2y = 0 0.5"
    )
    .unwrap();
    let path = f.path().to_str().unwrap();
    let o = confint(&["interval", "--config", path]);
    assert!(stdout(&o).contains("[-47.40, 33.49]"), "{}", stdout(&o));
    let o = confint(&["interval", "--config", path, "--r2y", "0", "0.2"]);
    assert!(stdout(&o).contains("[-36.60, 17.71]"));
}

#[test]
fn unreadable_config_is_io_error() {
    let o = confint(&["interval", "--config", "/nonexistent/cfg"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_rows_match_case_study() {
    let o = run(with("sweep", CASE_STUDY, &["--format", "csv"]));
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 21 * 22 / 2);
    let find = |lo: &str, hi: &str| {
        rows.iter()
            .find(|r| r[0] == lo && r[1] == hi)
            .unwrap()
            .clone()
    };
    let num = |s: &str| s.parse::<f64>().unwrap();
    let full = find("-1", "1");
    assert!((num(&full[2]) + 36.60).abs() < 0.01 && (num(&full[3]) - 17.71).abs() < 0.01);
    let half = find("0", "1");
    assert!((num(&half[2]) + 36.60).abs() < 0.01 && (num(&half[3]) + 5.25).abs() < 0.01);
    for r in rows.iter().filter(|r| r[0] == r[1]) {
        assert_eq!(r[4], "ok");
        assert!(num(&r[2]) >= num(&full[2]) - 1e-9 && num(&r[3]) <= num(&full[3]) + 1e-9);
    }
}

#[test]
fn sweep_flags_infeasible_rows() {
    let o = confint(&[
        "sweep",
        "--rho-xy",
        "0.9",
        "--sigma-ratio",
        "1",
        "--r2x",
        "0.9",
        "0.95",
        "--r2y",
        "0.9",
        "0.95",
        "--steps",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().any(|r| r[4] == "empty" && r[2].is_empty()));
    assert!(rows.iter().any(|r| r[4] == "ok"));
}

#[test]
fn from_data_round_trips_synthesized_parameters() {
    let stats = SummaryStats::new(-0.11, 42.94).unwrap();
    let t = SensitivityTuple::new(0.5, 0.2, 1.0).unwrap();
    let d = synthesize_data(&stats, &t, 10, 2, 5).unwrap();
    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    writeln!(f, "x,y,w1,w2").unwrap();
    for i in 0..d.n() {
        writeln!(
            f,
            "{:e},{:e},{:e},{:e}",
            d.x[i], d.y[i], d.w[0][i], d.w[1][i]
        )
        .unwrap();
    }
    f.flush().unwrap();
    let o = confint(&["from-data", f.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let get = |k: &str| v[k].as_f64().unwrap();
    assert!((get("rho_xy") + 0.11).abs() < 1e-10);
    assert!((get("sigma_ratio") - 42.94).abs() < 1e-9);
    assert!((get("r2wx") - 0.5).abs() < 1e-10);
    assert!((get("r2wy") - 0.2).abs() < 1e-10);
    assert!((get("rho_hxhy") - 1.0).abs() < 1e-10);
    assert!((get("ols_beta") + 36.60).abs() < 0.01);
    assert!(get("discrepancy") < 1e-8);
}

#[test]
fn from_data_without_confounders_reports_stats_only() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x,y\n1,2\n2,3.5\n3,5\n4,4").unwrap();
    let o = confint(&["from-data", f.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.get("rho_xy").is_some());
    assert!(v.get("r2wx").is_none());
}

#[test]
fn from_data_names_bad_cell() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x,y,w1\n1,2,0\n2,oops,1\n3,5,2").unwrap();
    let o = confint(&["from-data", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("'y'"), "{e}");
}

#[test]
fn region_cloud_is_nonempty_and_outside_range() {
    let o = confint(&[
        "region",
        "--rho-xy",
        "0.5",
        "--sigma-ratio",
        "1",
        "--exclude",
        "0.2",
        "inf",
        "--resolution",
        "31",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() < 0.2));
}

#[test]
fn prior_output_is_byte_identical_and_inside_interval() {
    let args = with(
        "prior",
        CASE_STUDY,
        &[
            "--uniform",
            "--samples",
            "100000",
            "--seed",
            "7",
            "--format",
            "csv",
        ],
    );
    let a = run(args.clone());
    let b = run(args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let row = &csv_rows(&stdout(&a))[0];
    let vals: Vec<f64> = row[3..].iter().map(|s| s.parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    assert!(vals[0] >= -36.61 && vals[vals.len() - 1] <= 17.72);
}

#[test]
fn emitted_samples_reproduce_reported_quantiles() {
    let base = with(
        "prior",
        CASE_STUDY,
        &["--samples", "500", "--seed", "3", "--prior-x2", "beta:2:2"],
    );
    let mut json_args = base.clone();
    json_args.extend(["--format".into(), "json".into(), "--emit-samples".into()]);
    let v: Value = serde_json::from_str(&stdout(&run(json_args))).unwrap();
    let mut samples: Vec<f64> = v["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(samples.len(), 500);
    samples.sort_by(f64::total_cmp);
    // Quantiles are computed before rounding, so compare at print precision.
    assert!((quantile(&samples, 0.5) - v["q50"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn incompatible_prior_exits_with_empty_code() {
    let o = confint(&[
        "prior",
        "--rho-xy",
        "0.9",
        "--sigma-ratio",
        "1",
        "--r2x",
        "0",
        "0.95",
        "--r2y",
        "0",
        "0.95",
        "--prior-x2",
        "point:0.9",
        "--prior-y2",
        "point:0.9",
        "--prior-rho",
        "point:-1",
        "--samples",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iv.json");
    let o = run(with(
        "interval",
        CASE_STUDY,
        &["--format", "json", "--out", path.to_str().unwrap()],
    ));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(v["lower"].is_number());
}

#[test]
fn verify_passes_and_names_reproducing_bounds() {
    let o = confint(&["verify", "--cases", "5", "--resolution", "41"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    assert!(text.contains("reproduced by u_y2=[0.2]"));
}
