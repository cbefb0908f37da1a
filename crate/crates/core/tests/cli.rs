use std::path::Path;
use std::process::{Command, Output};

use nojulia::cli::ConstructionFile;
use serde_json::Value;

fn nojulia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nojulia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn construct_reports_thresholds() {
    for (lambda, n0) in [("1.5", 3), ("1.25", 1)] {
        let o = nojulia(&["construct", "--lambda", lambda]);
        assert_eq!(code(&o), 0);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["construction"]["n0"], n0);
        assert_eq!(v["certificate"]["n0"], n0);
    }
}

#[test]
fn construct_rejects_out_of_range_lambda() {
    let o = nojulia(&["construct", "--lambda", "2.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("between 1 and 2"));
}

#[test]
fn construct_without_room_for_a_certificate_is_a_usage_error() {
    let o = nojulia(&["construct", "--lambda", "1.75", "--scan-upper", "1000"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn spec_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&nojulia(&["construct", "--lambda", "1.5", "--out", p])),
        0
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let file: ConstructionFile = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&file).unwrap() + "\n";
    assert_eq!(again, text);
    assert_eq!(file.construction.n0, 3);

    let o = nojulia(&["geometry", "--spec", p, "--n-max", "6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 4);

    let o = nojulia(&["geometry", "--spec", p, "--lambda", "1.25"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tampered_spec_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, r#"{"lambda": 1.5, "p": 2.0, "n0": 1, "start": 2}"#).unwrap();
    let o = nojulia(&["geometry", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn geometry_table() {
    let o = nojulia(&["geometry", "--lambda", "1.5"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        header.join(","),
        "n,log_A,K,center_ratio,radius_ratio,near_ratio,far_ratio,margin_g"
    );
    assert_eq!(rows.len(), 17);
    let mut prev = f64::NEG_INFINITY;
    for (i, r) in rows.iter().enumerate() {
        let n = r[0];
        assert_eq!(n, (i + 4) as f64);
        assert_eq!(r[1], n * n);
        assert!((r[2] - n * (n + 2.0) / ((n + 1.0) * (n + 1.0))).abs() < 1e-15);
        assert!((r[5] * r[6] - 1.0).abs() < 1e-13);
        assert!(r[7] > 0.0 && r[7] > prev);
        prev = r[7];
    }
    assert_eq!(
        code(&nojulia(&["geometry", "--lambda", "1.5", "--n-max", "2"])),
        2
    );
}

#[test]
fn eval_accepts_negative_arguments() {
    let o = nojulia(&[
        "eval", "--lambda", "1.5", "--point", "20,-1.5", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header[2], "log_abs_f");
    assert_eq!(rows[0][1], -1.5);
    assert!(rows[0][2] > 0.0);
    assert_eq!(
        code(&nojulia(&[
            "eval", "--lambda", "1.5", "--point", "nonsense"
        ])),
        2
    );
}

#[test]
fn characteristic_table_and_jensen() {
    let o = nojulia(&[
        "characteristic",
        "--lambda",
        "1.5",
        "--log-r-min",
        "50",
        "--log-r-max",
        "2000",
    ]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        header.join(","),
        "log_r,m_f,N_poles,m_inv,N_zeros,T,jensen_residual"
    );
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!(r[6].abs() <= 2e-6);
        assert_eq!(r[2], r[4]);
    }
}

#[test]
fn characteristic_below_first_modulus_counts_nothing() {
    let o = nojulia(&[
        "characteristic",
        "--lambda",
        "1.5",
        "--log-r-min",
        "1",
        "--log-r-max",
        "15",
    ]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows.iter().all(|r| r[2] == 0.0 && r[4] == 0.0));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["characteristic", "--lambda", "1.5", "--points", "0"][..],
        &[
            "characteristic",
            "--lambda",
            "1.5",
            "--log-r-min",
            "9",
            "--log-r-max",
            "3",
        ],
        &["characteristic", "--lambda", "1.5", "--quad-tol", "0"],
        &["characteristic"],
        &["frobnicate"],
        &["scan", "--lambda", "1.5", "--directions", "2"],
        &["construct", "--lambda", "1.5", "--format", "csv"],
    ] {
        assert_eq!(code(&nojulia(args)), 2, "{args:?}");
    }
    assert_eq!(code(&nojulia(&["--help"])), 0);
}

fn write_csv(path: &Path, rows: &[(f64, f64)]) {
    let mut s = String::from("log_r,m_f,N_poles,m_inv,N_zeros,T,jensen_residual\n");
    for &(l, t) in rows {
        s += &format!("{l:.16e},0,0,0,0,{t:.16e},0\n");
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn order_fit_of_exact_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let rows: Vec<(f64, f64)> = (0..16)
        .map(|k| {
            let l = 50.0 * 40f64.powf(k as f64 / 15.0);
            (l, l.powf(1.5))
        })
        .collect();
    write_csv(&path, &rows);
    let o = nojulia(&["order", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["lambda_hat"].as_f64().unwrap() - 1.5).abs() < 1e-10);

    write_csv(&path, &rows[..2]);
    assert_eq!(code(&nojulia(&["order", path.to_str().unwrap()])), 2);
    assert_eq!(code(&nojulia(&["order", "/nonexistent/t.csv"])), 2);
}

#[test]
fn scan_covers_axes_and_catches_surrogate() {
    let o = nojulia(&["scan", "--lambda", "1.5", "--directions", "4"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let thetas: Vec<f64> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["theta"].as_f64().unwrap())
        .collect();
    let pi = std::f64::consts::PI;
    assert_eq!(thetas, vec![-pi / 2.0, 0.0, pi / 2.0, pi]);
    assert_eq!(v["summary"]["violations"], 0);

    let o = nojulia(&[
        "scan",
        "--lambda",
        "1.5",
        "--directions",
        "8",
        "--surrogate",
    ]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["summary"]["violations"].as_u64().unwrap() > 0);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let base = [
        "characteristic",
        "--lambda",
        "1.25",
        "--log-r-min",
        "20",
        "--log-r-max",
        "400",
    ];
    let one = nojulia(&[&base[..], &["--threads", "1"]].concat());
    let four = nojulia(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);

    let scan = [
        "scan",
        "--lambda",
        "1.5",
        "--directions",
        "24",
        "--seed",
        "9",
    ];
    let a = nojulia(&[&scan[..], &["--threads", "1"]].concat());
    let b = nojulia(&[&scan[..], &["--threads", "3"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "lambda = 1.25\nlog-r-min = 1\nlog_r_max = 15\npoints = 8\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let o = nojulia(&["characteristic", "--config", c]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 9);

    let o = nojulia(&["characteristic", "--config", c, "--points", "10"]);
    assert_eq!(stdout(&o).lines().count(), 11);

    let o = nojulia(&["construct", "--config", c, "--lambda", "1.5"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["construction"]["n0"], 3);

    std::fs::write(&cfg, "lambda = 1.5\ncolour = blue\n").unwrap();
    assert_eq!(code(&nojulia(&["construct", "--config", c])), 2);
}
