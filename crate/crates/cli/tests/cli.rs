use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn psc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psc"))
        .args(args)
        .env_remove("PSC_WORKERS")
        .output()
        .expect("run psc")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn construct_ebch16(path: &Path) {
    let p = path.to_str().unwrap();
    ok(&psc(&[
        "construct", "--parent", "ebch", "--m", "4", "--d", "6", "--channel", "bec:0.5", "--k",
        "6", "--out", p,
    ]));
}

fn frozen_indices(text: &str) -> Vec<usize> {
    text.lines()
        .filter_map(|l| l.strip_prefix("frozen "))
        .map(|r| r.split_whitespace().next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn construct_ebch_16_6() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.pscf");
    construct_ebch16(&path);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("pscf 1\nn 16\nk 6\n"));
    assert_eq!(frozen_indices(&text), [0, 1, 2, 3, 4, 6, 8, 9, 10, 12]);
}

#[test]
fn construct_without_parent_at_full_rate() {
    let out = psc(&[
        "construct", "--parent", "none", "--m", "3", "--channel", "esn0:0", "--k", "8",
    ]);
    let text = ok(&out);
    assert!(frozen_indices(&text).is_empty());
    assert!(text.contains("k 8\n"));
}

#[test]
fn construct_rejects_too_large_dimension() {
    let out = psc(&[
        "construct", "--parent", "ebch", "--m", "4", "--d", "6", "--channel", "bec:0.5", "--k",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analyze_reports_weights_and_distance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.pscf");
    construct_ebch16(&path);
    let text = ok(&psc(&["analyze", path.to_str().unwrap(), "--channel", "bec:0.5"]));
    assert!(text.contains("  wt 0: 1\n  wt 1: 4\n  wt 2: 5\n"), "{text}");
    assert!(text.contains("min distance 6\n"), "{text}");
    assert!(text.contains("sc error estimate"), "{text}");
}

#[test]
fn noiseless_sweep_has_no_errors() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("c.pscf");
    let csv = dir.path().join("r.csv");
    construct_ebch16(&spec);
    ok(&psc(&[
        "simulate",
        spec.to_str().unwrap(),
        "--decoder",
        "list4",
        "--channel",
        "bec:0,esn0:60",
        "--max-frames",
        "600",
        "--seed",
        "3",
        "--workers",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "code,decoder,channel_kind,param_db_or_eps,frames,frame_errors,fer,ci_lo,ci_hi,seed,seconds"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[4], "600");
        assert_eq!(r[5], "0");
        assert_eq!(r[6].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[7].parse::<f64>().unwrap(), 0.0);
    }
    assert_eq!(rows[0][2], "bec");
    assert_eq!(rows[1][2], "biawgn");
}

#[test]
fn fixed_seed_rerun_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("c.pscf");
    construct_ebch16(&spec);
    let mut files = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let csv = dir.path().join(format!("r{i}.csv"));
        ok(&psc(&[
            "simulate",
            spec.to_str().unwrap(),
            "--decoder",
            "sc",
            "--channel",
            "ebn0:1",
            "--max-frames",
            "3000",
            "--target-errors",
            "50",
            "--seed",
            "11",
            "--workers",
            workers,
            "--no-wall-time",
            "--out",
            csv.to_str().unwrap(),
        ]));
        files.push(fs::read(&csv).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(psc(&[]).status.code(), Some(2));
    assert_eq!(psc(&["simulate", "x.pscf", "--channel", "bec:0"]).status.code(), Some(2));
    assert_eq!(
        psc(&["simulate", "x.pscf", "--channel", "awgn:1", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        psc(&["construct", "--parent", "ebch", "--m", "4", "--channel", "bec:0.5", "--k", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bad_spec_reports_line_and_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pscf");
    fs::write(&path, "pscf 1\nn 4\nk 3\nkernel arikan l=2 m=2\nfrozen 1 = 3\n").unwrap();
    let out = psc(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");

    let out = psc(&["analyze", dir.path().join("missing.pscf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
