use std::path::Path;
use std::process::{Command, Output};

use permix::{LCheck, Permutation, SampleSet};
use permix_cli::{DemixResult, DemixRunConfig, DeterminantRunConfig, HardResult, HardRunConfig, Report};
use serde_json::Value;

fn permix(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permix"))
        .current_dir(dir)
        .env_remove("PERMIX_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = permix(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn sample_writes_header_and_count_lines() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(
        dir.path(),
        &[
            "sample",
            "--n",
            "4",
            "--phi",
            "0.5",
            "--central",
            "1 2 3 4",
            "--count",
            "1000",
            "--seed",
            "7",
        ],
    );
    let text = String::from_utf8(text).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "# permix-samples n=4 phi=0.5 seed=7 generator=rim-chacha8 count=1000"
    );
    assert_eq!(lines.clone().count(), 1000);
    for l in lines {
        let p: Permutation = l.parse().unwrap();
        assert_eq!(p.n(), 4);
    }
    let set = SampleSet::read_from(text.as_bytes()).unwrap();
    assert_eq!(set.provenance().seed, Some(7));
}

#[test]
fn verify_determinant_r2_reports_singular_value_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["verify-determinant", "--r", "2"]);
    let report: Report<DeterminantRunConfig, LCheck> = serde_json::from_slice(&out).unwrap();
    assert!(report.result.invertible);
    assert_eq!(report.result.min_singular_values.len(), 3);
    for s in &report.result.min_singular_values {
        assert!((s - 4.0).abs() < 1e-9);
    }
    assert!(report.timing.is_some());
}

#[test]
fn hard_instance_m2_is_indistinguishable_at_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["hard-instance", "--m", "2", "--ell", "3"]);
    let report: Report<HardRunConfig, HardResult> = serde_json::from_slice(&out).unwrap();
    assert_eq!(report.result.verdict, "indistinguishable");
    assert_eq!(report.result.sigma1.len(), 2);
    assert_ne!(report.result.sigma1, report.result.sigma2);

    let out = ok(dir.path(), &["hard-instance", "--m", "2", "--ell", "4"]);
    let report: Report<HardRunConfig, HardResult> = serde_json::from_slice(&out).unwrap();
    assert_eq!(report.result.verdict, "distinguishable");
    assert_eq!(report.result.witness.unwrap().len(), 4);
}

#[test]
fn reports_reject_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["hard-instance", "--m", "1", "--ell", "1"]);
    let mut v: Value = serde_json::from_slice(&out).unwrap();
    assert!(serde_json::from_value::<Report<HardRunConfig, HardResult>>(v.clone()).is_ok());
    v["result"]["extra"] = Value::Bool(true);
    assert!(serde_json::from_value::<Report<HardRunConfig, HardResult>>(v).is_err());
}

#[test]
fn tv_scan_csv_has_log_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = String::from_utf8(ok(dir.path(), &["tv-scan", "--m", "1", "--eps-grid", "0.1,0.01,0.001"])).unwrap();
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "eps,tv,log_eps,log_tv");
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[0].ln() - f[2]).abs() < 1e-12);
        assert!((f[1].ln() - f[3]).abs() < 1e-12);
    }
    let slope: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("# fitted_slope="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 1.0).abs() < 0.1);
}

#[test]
fn exit_codes_and_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let out = permix(dir.path(), &["sample", "--phi", "0.5", "--count", "3", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[usage]"));

    let out = permix(dir.path(), &["sample", "--n", "3", "--phi", "1.5", "--count", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[domain]"));

    std::fs::write(dir.path().join("bad.txt"), "# permix-samples n=3\n1 2 2\n").unwrap();
    let out = permix(
        dir.path(),
        &[
            "demix",
            "--samples",
            "bad.txt",
            "--k",
            "1",
            "--phi",
            "0.3",
            "--gamma",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[input]"));

    let out = permix(
        dir.path(),
        &[
            "demix",
            "--samples",
            "missing.txt",
            "--k",
            "1",
            "--phi",
            "0.3",
            "--gamma",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[input]"));

    let out = permix(dir.path(), &["moments", "--m", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = permix(
        dir.path(),
        &["sample", "--n", "3", "--phi", "0.5", "--count", "3", "--threads", "0"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demix_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "sample",
            "--phi",
            "0.3",
            "--central",
            "1 2 3 4 5",
            "--central",
            "5 3 1 4 2",
            "--count",
            "20000",
            "--seed",
            "5",
            "-o",
            "s.txt",
        ],
    );
    let out = ok(
        d,
        &[
            "demix",
            "--samples",
            "s.txt",
            "--k",
            "2",
            "--phi",
            "0.3",
            "--gamma",
            "0.5",
            "--prune-radius",
            "1",
            "--perms",
            "p.txt",
        ],
    );
    let report: Report<DemixRunConfig, DemixResult> = serde_json::from_slice(&out).unwrap();
    let want: Vec<Permutation> = vec!["1 2 3 4 5".parse().unwrap(), "5 3 1 4 2".parse().unwrap()];
    assert_eq!(report.result.perms, want);
    assert_eq!(report.config.count, 20000);
    assert_eq!(report.config.demix.prune_radius, Some(1.0));

    let out = ok(
        d,
        &[
            "weights",
            "--samples",
            "s.txt",
            "--phi",
            "0.3",
            "--gamma",
            "0.2",
            "--perms",
            "p.txt",
        ],
    );
    let v: Value = serde_json::from_slice(&out).unwrap();
    for w in v["result"]["weights"].as_array().unwrap() {
        assert!((w.as_f64().unwrap() - 0.5).abs() <= 0.05);
    }
}

#[test]
fn theoretical_mode_reports_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sample", "--n", "4", "--phi", "0.5", "--count", "50", "-o", "s.txt"],
    );
    let out = permix(
        dir.path(),
        &[
            "demix",
            "--samples",
            "s.txt",
            "--k",
            "2",
            "--phi",
            "0.5",
            "--gamma",
            "0.5",
            "--mode",
            "theoretical",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theoretical mode infeasible"));
}

/// Same flags under different worker counts must give identical bytes.
#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "sample",
            "--phi",
            "0.4",
            "--central",
            "2 1 4 3 5",
            "--count",
            "9000",
            "-o",
            "s.txt",
        ],
    );
    let runs: [&[&str]; 5] = [
        &["sample", "--n", "6", "--phi", "0.6", "--count", "10000"],
        &[
            "demix",
            "--samples",
            "s.txt",
            "--k",
            "1",
            "--phi",
            "0.4",
            "--gamma",
            "1",
            "--n-prime",
            "3000",
        ],
        &[
            "weights",
            "--samples",
            "s.txt",
            "--phi",
            "0.4",
            "--gamma",
            "0.2",
            "--central",
            "2 1 4 3 5",
            "--central",
            "1 2 3 4 5",
        ],
        &["noiseless-demo", "--n", "9", "--k", "4"],
        &["tv-scan", "--m", "2", "--format", "json"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--threads", threads, "--no-timing"]);
            outputs.push(ok(d, &full));
        }
        let mut env_run = Command::new(env!("CARGO_BIN_EXE_permix"));
        env_run
            .current_dir(d)
            .env("PERMIX_THREADS", "2")
            .args(args)
            .arg("--no-timing");
        outputs.push(env_run.output().unwrap().stdout);
        assert!(
            outputs.windows(2).all(|w| w[0] == w[1]),
            "{args:?} differs across thread counts"
        );
    }
}
