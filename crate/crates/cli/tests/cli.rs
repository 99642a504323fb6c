//! End-to-end runs of the `nhqsl` binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn nhqsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhqsl")).args(args).output().expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn rows(csv_path: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(Path::new(csv_path)).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "bound", "lhs", "rhs", "slack", "applicable", "cond_failures", "quad_err"]
    );
    r.records().map(Result::unwrap).collect()
}

fn num(rec: &csv::StringRecord, i: usize) -> f64 {
    rec[i].parse().unwrap()
}

#[test]
fn dephasing_sweep_matches_closed_forms() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "d.csv");
    let o = nhqsl(&[
        "check",
        "--model",
        "builtin:dephasing?gamma=0.5",
        "--bounds",
        "ml-open",
        "--observable",
        "jump-count",
        "--t-final",
        "2",
        "--steps",
        "4",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = rows(&out);
    assert_eq!(recs.len(), 12);
    for r in &recs {
        let t = num(r, 0);
        assert_eq!(&r[5], "true");
        match &r[1] {
            // 1 - exp(-gamma t / 2) with activity gamma for L = sqrt(gamma) sigma_z.
            "qsl_ml_open" => assert!((num(r, 2) - (1.0 - (-0.25 * t).exp())).abs() < 1e-12),
            // Poisson counts: ratio^2 = gamma t.
            "tur_ml_open" | "tur_ml_open_classical" => {
                assert!((num(r, 2) - ((0.5 * t).exp() - 1.0)).abs() < 1e-10);
                assert!((num(r, 3) - 0.5 * t).abs() < 1e-10);
            }
            other => panic!("unexpected bound {other}"),
        }
    }
}

#[test]
fn refrigerator_coherent_state_has_no_violations() {
    let dir = TempDir::new().unwrap();
    let (out, summary) = (path(&dir, "r.csv"), path(&dir, "r.json"));
    let o = nhqsl(&[
        "check",
        "--model",
        "builtin:refrigerator",
        "--state",
        "uniform",
        "--observable",
        "jump-count",
        "--t-final",
        "0.6",
        "--steps",
        "3",
        "--out",
        &out,
        "--summary",
        &summary,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(json["violations"], 0);
    assert_eq!(json["passed"], true);
    let recs = rows(&out);
    let first = recs.iter().find(|r| &r[1] == "qsl_ml_open").unwrap();
    assert_eq!(&first[5], "true");
    assert!(num(first, 4) >= 0.0);
}

#[test]
fn out_of_domain_bound_is_reported_not_failed() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "v.csv");
    let o = nhqsl(&["check", "--model", "builtin:dephasing", "--bounds", "mt-open", "--tau2", "0.5", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let recs = rows(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(&recs[0][1], "qsl_mt_open");
    assert_eq!(&recs[0][5], "false");
    assert_eq!(&recs[0][6], "fidelity_at_most_z");
}

#[test]
fn bad_configurations_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.csv");
    let cases: [&[&str]; 5] = [
        &["check", "--model", "builtin:dephasing", "--bounds", "ml", "--out", &out],
        &["check", "--model", "builtin:nosuch", "--out", &out],
        &["check", "--model", "builtin:dephasing?gamma=-1", "--out", &out],
        &["check", "--model", "builtin:dephasing?gama=1", "--out", &out],
        &["check", "--model", "builtin:two-level", "--t-final", "0", "--out", &out],
    ];
    for args in cases {
        let o = nhqsl(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    }
}

#[test]
fn sweeps_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = path(&dir, name);
        let o = nhqsl(&[
            "check",
            "--model",
            "builtin:random-lindblad?dim=3&seed=4",
            "--state",
            "random-pure:9",
            "--observable",
            "jump-count-mc",
            "--n-traj",
            "200",
            "--seed",
            "3",
            "--steps",
            "3",
            "--out",
            &out,
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn emitted_models_reload() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "fridge.json");
    let o = nhqsl(&["models", "refrigerator", "gamma=0.3", "beta3=0.8", "--emit", &file]);
    assert_eq!(o.status.code(), Some(0));
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    let from_file = nhqsl(&["check", "--model", &file, "--steps", "3", "--out", &a]);
    let builtin = nhqsl(&["check", "--model", "builtin:refrigerator?gamma=0.3&beta3=0.8", "--steps", "3", "--out", &b]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(builtin.status.code(), Some(0));
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn trajectory_ensemble_tracks_exact_counts() {
    let dir = TempDir::new().unwrap();
    let (out, summary) = (path(&dir, "t.csv"), path(&dir, "t.json"));
    let o = nhqsl(&[
        "trajectory",
        "--model",
        "builtin:dephasing?gamma=1",
        "--t-final",
        "1",
        "--n-traj",
        "2000",
        "--seed",
        "7",
        "--out",
        &out,
        "--summary",
        &summary,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let (mean, se, exact) = (
        json["jump_mean"].as_f64().unwrap(),
        json["jump_mean_standard_error"].as_f64().unwrap(),
        json["exact_jump_mean"].as_f64().unwrap(),
    );
    assert!((exact - 1.0).abs() < 1e-10);
    assert!((mean - exact).abs() < 4.0 * se);
    assert_eq!(csv::Reader::from_path(&out).unwrap().records().count(), 2000);
}
