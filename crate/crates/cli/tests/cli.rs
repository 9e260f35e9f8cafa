//! End-to-end runs of the binary: exit codes, file layouts and contents.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use rumorflow::invariants::hamiltonian_piqueira;
use rumorflow::models::{Params, State2};

fn rumorflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rumorflow")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Rows of a CSV file as string fields, header first.
fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn simulate_fig2_reaches_predicted_final_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorflow(&["simulate", "--scenario", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary, stdout_json(&out));
    assert_eq!(summary["stop_reason"], "SpreaderExtinct");
    let end_i = num(&summary["final_state"]["I"]);
    assert!((end_i - 8.15e-5).abs() <= 2e-6, "terminal I {end_i}");
    assert!(num(&summary["rel_gap"]) <= 1e-3);
    assert!(num(&summary["max_drift"]) <= 1e-8);
    assert!((num(&summary["sigma"]) - 0.1).abs() < 1e-15);

    let rows = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(rows[0].join(","), "t,I,S,R,H,drift");
    assert_eq!(rows[1][5].parse::<f64>().unwrap(), 0.0);
    let last = rows.last().unwrap();
    assert_eq!(last[1].parse::<f64>().unwrap(), end_i);
}

#[test]
fn csv_floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorflow(&["simulate", "--scenario", "fig2", "--t-end", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for row in read_csv(&dir.path().join("trajectory.csv")).iter().skip(1) {
        for field in row.iter().filter(|f| !f.is_empty()) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(&format!("{v:.16e}"), field);
        }
    }
}

#[test]
fn equilibrium_start_records_constant_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorflow(&["simulate", "--i0", "0.2", "--s0", "0", "--r0", "0.8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["stop_reason"], "SpreaderExtinct");
    let rows = read_csv(&dir.path().join("trajectory.csv"));
    assert!(rows.len() >= 2);
    for row in &rows[1..] {
        assert_eq!(row[1..4], rows[1][1..4]);
    }
}

#[test]
fn fig3_warns_about_renormalization() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorflow(&["simulate", "--scenario", "fig3", "--t-end", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("renormalized"));
    let warnings = stdout_json(&out)["warnings"].as_array().unwrap().clone();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("0.99")));
}

#[test]
fn unit_rate_simulation_has_no_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorflow(&[
        "simulate", "--model", "belen-pearce", "--i0", "0.999", "--s0", "0.001", "--r0", "0", "--t-end", "400",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let summary = stdout_json(&out);
    assert!(summary["sigma"].is_null());
    assert!((num(&summary["predicted_i_inf"]) - 0.2032).abs() <= 1e-3);
    assert!((num(&summary["final_state"]["I"]) - 0.2032).abs() <= 1e-3);
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&rumorflow(&["simulate", "--rho1", "-0.1", "--i0", "0.5", "--out", d])), 2);
    assert_eq!(code(&rumorflow(&["simulate", "--out", d])), 2);
    assert_eq!(code(&rumorflow(&["simulate", "--i0", "0.5", "--step", "0", "--out", d])), 2);
    assert_eq!(code(&rumorflow(&["simulate", "--scenario", "fig9", "--out", d])), 2);
    assert_eq!(code(&rumorflow(&["simulate", "--i0", "0.5", "--model", "sir", "--out", d])), 2);
    assert_eq!(code(&rumorflow(&["bogus"])), 2);

    let bad = dir.path().join("typo.json");
    std::fs::write(&bad, r#"{"rho1": 0.1, "rh02": 0.9, "i0": 0.5}"#).unwrap();
    let out = rumorflow(&["simulate", "--scenario", bad.to_str().unwrap(), "--out", d]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rh02"));
}

#[test]
fn equilibria_report_threshold_and_classes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = rumorflow(&["equilibria", "--rho1", "0.4", "--rho2", "0.8", "--n", "31", "--out", d]);
    assert_eq!(code(&out), 0);
    let report = read_json(&dir.path().join("equilibria.json"));
    assert!((num(&report["sigma"]) - 1.0 / 3.0).abs() <= 1e-15);
    let rows = read_csv(&dir.path().join("equilibria.csv"));
    assert_eq!(rows[0].join(","), "I,R,tau,class");
    assert_eq!(rows.len(), 32);
    let classes: Vec<&str> = rows[1..].iter().map(|r| r[3].as_str()).filter(|c| *c != "marginal").collect();
    assert_eq!(classes.windows(2).filter(|w| w[0] != w[1]).count(), 1);

    let scaled = tempfile::tempdir().unwrap();
    let out = rumorflow(&["equilibria", "--rho1", "0.4", "--rho2", "0.8", "--mu", "3", "--n", "31", "--out", scaled.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rows3 = read_csv(&scaled.path().join("equilibria.csv"));
    for (a, b) in rows[1..].iter().zip(&rows3[1..]) {
        assert_eq!(a[3], b[3]);
        let (ta, tb): (f64, f64) = (a[2].parse().unwrap(), b[2].parse().unwrap());
        assert!((3.0 * ta - tb).abs() <= 1e-15);
    }

    assert_eq!(code(&rumorflow(&["equilibria", "--rho1", "0", "--out", d])), 2);
    assert_eq!(code(&rumorflow(&["equilibria", "--n", "1", "--out", d])), 2);
}

#[test]
fn final_size_reports_and_ill_posed_starts() {
    let out = rumorflow(&["final-size", "--scenario", "fig2"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert!((num(&report["i_inf"]) - 8.15e-5).abs() <= 2e-6);
    for key in ["k", "sigma", "i_inf", "r_inf", "bracket", "iterations", "residual"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }

    let stable = stdout_json(&rumorflow(&["final-size", "--rho1", "0.4", "--rho2", "0.8", "--i0", "0.2", "--s0", "0", "--r0", "0.8"]));
    assert_eq!(num(&stable["i_inf"]), 0.2);
    assert_eq!(stable["iterations"], 0);

    let out = rumorflow(&["final-size", "--scenario", "fig5"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable start"));
}

#[test]
fn verify_integral_exit_codes_follow_the_verdict() {
    let out = rumorflow(&["verify-integral", "--model", "piqueira"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"], "Conserved");

    let out = rumorflow(&["verify-integral", "--model", "belen-pearce", "--variant", "paper"]);
    assert_eq!(code(&out), 5);
    let report = stdout_json(&out);
    assert_eq!(report["verdict"], "NotConserved");
    assert!(num(&report["max_abs_residual"]) >= 0.1);

    let out = rumorflow(&["verify-integral", "--model", "belen-pearce", "--variant", "corrected"]);
    assert_eq!(code(&out), 0);

    assert_eq!(code(&rumorflow(&["verify-integral", "--model", "belen-pearce", "--variant", "eq9"])), 2);
    assert_eq!(code(&rumorflow(&["verify-integral", "--model", "piqueira", "--variant", "paper"])), 2);
}

#[test]
fn verify_integral_seed_changes_samples_not_verdict() {
    let a = stdout_json(&rumorflow(&["verify-integral", "--seed", "1"]));
    let b = stdout_json(&rumorflow(&["verify-integral", "--seed", "1"]));
    let c = stdout_json(&rumorflow(&["verify-integral", "--seed", "2"]));
    assert_eq!(a, b);
    assert_ne!(a["mean_abs_residual"], c["mean_abs_residual"]);
    assert_eq!(a["verdict"], c["verdict"]);
}

#[test]
fn phase_portrait_fig4_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = rumorflow(&[
        "phase-portrait", "--scenario", "fig4", "--levels", "-1.25,-0.9", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let meta = read_json(&dir.path().join("metadata.json"));
    let sigma = num(&meta["sigma"]);
    assert!((sigma - 1.0 / 3.0).abs() <= 1e-15);
    let p = Params::new(0.4, 0.8, 1.0).unwrap();
    let trajectories = meta["trajectories"].as_array().unwrap();
    assert_eq!(trajectories.len(), 5);
    for t in trajectories {
        assert!(num(&t["terminal_I"]) < sigma);
        let k = num(&t["k"]);
        let rows = read_csv(&dir.path().join(t["file"].as_str().unwrap()));
        assert_eq!(rows[0].join(","), "t,I,S,R,H,drift");
        for row in &rows[1..] {
            let (i, r): (f64, f64) = (row[1].parse().unwrap(), row[3].parse().unwrap());
            let h = hamiltonian_piqueira(&p, &State2 { r, i }).unwrap();
            assert!((h - k).abs() <= 1e-8, "|H - k| = {}", (h - k).abs());
        }
    }
    for (idx, level) in meta["levels"].as_array().unwrap().iter().enumerate() {
        assert_eq!(level["file"], format!("level_{idx:02}.csv"));
        let rows = read_csv(&dir.path().join(format!("level_{idx:02}.csv")));
        assert_eq!(rows[0].join(","), "I,R,inside");
        let k = num(&level["k"]);
        for row in rows[1..].iter().filter(|r| r[2] == "true") {
            let (i, r): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
            assert!((hamiltonian_piqueira(&p, &State2 { r, i }).unwrap() - k).abs() <= 1e-12);
        }
    }
}

#[test]
fn phase_portrait_without_levels_and_with_bad_starts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = rumorflow(&["phase-portrait", "--scenario", "fig4", "--levels=", "--t-end", "50", "--out", d]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with("level_")));

    let out = rumorflow(&["phase-portrait", "--rho1", "0.4", "--starts", "0.6:0.6", "--out", d]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_matches_single_commands_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--scenario", "fig2", "--step", "0.01", "--t-end", "2000"];
    let mut csvs = Vec::new();
    for workers in ["1", "8"] {
        let out_dir = dir.path().join(workers);
        let mut args = vec!["sweep", "--rho1-values", "0.1,0.4,0.8", "--rho2-values", "0.1,0.4,0.8", "--workers", workers];
        args.extend(base);
        args.extend(["--out", out_dir.to_str().unwrap()]);
        let out = rumorflow(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read(out_dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);

    let rows = read_csv(&dir.path().join("1").join("sweep.csv"));
    assert_eq!(rows[0].join(","), "rho1,rho2,mu,I0,S0,R0,sigma,i_inf,i_T,rel_gap,error");
    assert_eq!(rows.len(), 10);
    let grid: Vec<(f64, f64)> = rows[1..].iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    for row in &rows[1..] {
        assert!(row[10].is_empty());
        assert!(row[9].parse::<f64>().unwrap() <= 1e-3);
    }

    // a one-cell grid reproduces final-size and simulate
    let one = dir.path().join("one");
    let mut args = vec!["sweep"];
    args.extend(base);
    args.extend(["--out", one.to_str().unwrap()]);
    assert_eq!(code(&rumorflow(&args)), 0);
    let row = &read_csv(&one.join("sweep.csv"))[1];
    let fs = stdout_json(&rumorflow(&["final-size", "--scenario", "fig2"]));
    assert_eq!(row[7].parse::<f64>().unwrap(), num(&fs["i_inf"]));
    let sim_dir = dir.path().join("sim");
    let mut args = vec!["simulate"];
    args.extend(base);
    args.extend(["--out", sim_dir.to_str().unwrap()]);
    let sim = stdout_json(&rumorflow(&args));
    assert_eq!(row[8].parse::<f64>().unwrap(), num(&sim["final_state"]["I"]));
    assert_eq!(row[9].parse::<f64>().unwrap(), num(&sim["rel_gap"]));
}

#[test]
fn sweep_records_row_failures_and_fails_when_all_do() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    // every cell starts on the unstable part of the equilibrium segment
    let out = rumorflow(&["sweep", "--scenario", "fig5", "--model", "piqueira", "--rho1-values", "0.4,0.5", "--out", d]);
    assert_eq!(code(&out), 3);
    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| !r[10].is_empty() && r[7].is_empty()));

    // 0.89 is unstable for rho1 = 0.4 but stable for rho1 = 9
    let out = rumorflow(&["sweep", "--scenario", "fig5", "--model", "piqueira", "--rho1-values", "0.4,9", "--out", d]);
    assert_eq!(code(&out), 0);
    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert!(!rows[1][10].is_empty());
    assert!(rows[2][10].is_empty());
}
