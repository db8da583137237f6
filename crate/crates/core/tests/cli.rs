use std::fs;
use std::process::{Command, Output};

use quench_rqa::pipeline::{read_series_csv, SWEEP_HEADER};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench-rqa"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn simulate_then_rp() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    let csv_s = csv.to_str().unwrap();
    let out = run(&["simulate", "--size", "32", "--h", "0.8", "--t-max", "40", "--distances", "1,4", "--out", csv_s]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,xx_1,xx_4\n"));
    let series = read_series_csv(&text, Some("xx_4")).unwrap();
    assert_eq!(series.len(), 401);
    assert_eq!(series.values()[0], 0.0);

    let rp_dir = dir.path().join("rp");
    let out = run(&[
        "rp", "--input", csv_s, "--column", "xx_4", "--window", "20:40", "--rr", "0.1",
        "--matrix-csv", "--out", rp_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pgm = fs::read(rp_dir.join("rp.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n200 200\n255\n"));
    assert_eq!(pgm.len(), b"P5\n200 200\n255\n".len() + 200 * 200);
    for name in ["diagonal_hist.csv", "vertical_hist.csv", "rqa.csv", "rp.csv"] {
        assert!(rp_dir.join(name).exists(), "{name}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("DET="));
}

#[test]
fn sweep_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.cfg");
    fs::write(&config, "size = 16\nt_max = 60\nh = 0.5\ndistances = 1\nwindow = 10:20\nrr = 0.3\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap(),
        "--rr", "0.1", "--h", "0.5,1.5", "--window", "15:25", "--rescale", "--threads", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("xx,0.5,1,"));
    assert!(lines[2].starts_with("xx,1.5,1,"));
    let rr: f64 = lines[1].split(',').nth(7).unwrap().parse().unwrap();
    assert!((rr - 0.1).abs() < 0.01);
}

#[test]
fn sweep_reports_failing_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep", "--size", "16", "--t-max", "30", "--h", "1.5,0.2", "--distances", "2",
        "--window", "10:20", "--rescale", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("h = 0.2") && err.contains("l = 2"), "{err}");
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "size = 16\nunknown_key = 3\n").unwrap();
    let out = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn oracle_check_passes() {
    let out = run(&["oracle-check"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("72 comparisons at L=8"));
}

#[test]
fn oracle_check_fails_on_impossible_tolerance() {
    let out = run(&["oracle-check", "--tol", "0"]);
    assert!(!out.status.success());
}
