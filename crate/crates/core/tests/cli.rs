//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slope-screen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_path_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = bin(&["synth", "--out-dir", arg(d), "--n", "60", "--p", "50", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["X.csv", "y.csv", "groups.txt", "beta_true.csv"] {
        assert!(d.join(f).exists(), "{f} missing");
    }

    let (x, y, g) = (d.join("X.csv"), d.join("y.csv"), d.join("groups.txt"));
    let data = ["--x", arg(&x), "--y", arg(&y), "--groups", arg(&g)];
    let screened = d.join("screened.json");
    let full = d.join("full.json");
    for (file, flag) in [(&screened, "--screen"), (&full, "--no-screen")] {
        let mut args = vec!["path", "--len", "8", "--tol", "1e-8", "--max-iter", "50000", flag];
        args.extend(data);
        args.extend(["--format", "json", "--output", arg(file)]);
        let out = bin(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    let out = bin(&["compare", arg(&screened), arg(&full)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,lambda,l2_distance"));
    let rows: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|&d| d <= 1e-4), "{rows:?}");

    let mut args = vec!["path", "--len", "5"];
    args.extend(data);
    let out = bin(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,lambda,card_A_g,"));
    assert_eq!(text.lines().count(), 6);

    let mut args = vec!["fit", "--lambda-ratio", "0.5", "--method", "gslope"];
    args.extend(data);
    let out = bin(&args);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 50);
}

#[test]
fn weights_output() {
    let out = bin(&["weights", "--scheme", "oscar", "--p", "4", "--sigma1", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",v"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(v, vec![1.75, 1.5, 1.25, 1.0]);
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["nonsense"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("X.csv");
    let y = dir.path().join("y.csv");
    fs::write(&x, "1,2\n3,x\n").unwrap();
    fs::write(&y, "1\n2\n").unwrap();
    let out = bin(&["fit", "--x", arg(&x), "--y", arg(&y), "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());

    let missing = dir.path().join("absent.csv");
    let out = bin(&["path", "--x", arg(&missing), "--y", arg(&y)]);
    assert_eq!(out.status.code(), Some(1));

    // A response this large overflows the squared loss.
    fs::write(&x, "1,0\n0,1\n1,1\n").unwrap();
    fs::write(&y, "1e300\n-1e300\n1e300\n").unwrap();
    let out = bin(&[
        "fit",
        "--x",
        arg(&x),
        "--y",
        arg(&y),
        "--lambda",
        "1",
        "--no-intercept",
        "--no-standardize",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
