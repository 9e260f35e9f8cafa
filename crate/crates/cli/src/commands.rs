//! The subcommands. Each returns the JSON document printed on stdout together
//! with the process exit code; files go under the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use rumorflow::finalsize::{self, final_ignorants, final_ignorants_bp, level_curve};
use rumorflow::integrate::{simulate, SimOptions, StopReason, Trajectory};
use rumorflow::invariants::{
    drift_along, hamiltonian_bp, hamiltonian_piqueira, verify_first_integral, BpVariant, FirstIntegral,
    SampleDomain, Verdict,
};
use rumorflow::models::{self, reduce, ModelId, Params, State2, State3};
use rumorflow::stability::{equilibrium_scan, threshold_sigma, StabilityClass};

use crate::error::CliError;
use crate::scenario::{model_name, parse_model, Scenario};

pub const TRAJECTORY_HEADER: &str = "t,I,S,R,H,drift";
pub const EQUILIBRIA_HEADER: &str = "I,R,tau,class";
pub const LEVEL_HEADER: &str = "I,R,inside";
pub const SWEEP_HEADER: &str = "rho1,rho2,mu,I0,S0,R0,sigma,i_inf,i_T,rel_gap,error";

#[derive(Debug)]
pub struct Outcome {
    pub json: Value,
    pub exit_code: u8,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(json: Value, warnings: Vec<String>) -> Self {
        Self { json, exit_code: 0, warnings }
    }
}

/// 17 significant digits, enough to round-trip any `f64`. Non-finite values
/// are written as empty fields.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StateJson {
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl From<State3> for StateJson {
    fn from(x: State3) -> Self {
        Self { i: x.i, s: x.s, r: x.r }
    }
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut csv = String::with_capacity(traj.len() * 120);
    csv.push_str(TRAJECTORY_HEADER);
    csv.push('\n');
    let h = traj.h_values.as_deref();
    let h0 = h.map(|h| h[0]);
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let hk = h.map(|h| h[k]).filter(|v| v.is_finite());
        let drift = hk.zip(h0).map(|(a, b)| (a - b).abs());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt17(*t),
            fmt17(x.i),
            fmt17(x.s),
            fmt17(x.r),
            fmt_opt(hk),
            fmt_opt(drift)
        );
    }
    csv
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    write(dir, name, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn init_with_warnings(scn: &Scenario, params: Option<&Params>) -> Result<(State3, Vec<String>), CliError> {
    let (x0, renorm) = scn.init()?;
    let mut warnings: Vec<String> = params.map(|p| p.warnings()).unwrap_or_default();
    warnings.extend(renorm);
    Ok((x0, warnings))
}

/// Final-size prediction for any model: level-set root for the contact-rate
/// model, conserved-value root for the unit-rate model.
fn predict(model: ModelId, p: &Params, x0: &State3) -> rumorflow::Result<f64> {
    if model.is_unit_rate() {
        final_ignorants_bp(x0.i, x0.s, finalsize::DEFAULT_TOL)
    } else {
        Ok(final_ignorants(p, &reduce(x0), finalsize::DEFAULT_TOL)?.i_inf)
    }
}

pub fn cmd_simulate(scn: &Scenario, out: &Path) -> Result<Outcome, CliError> {
    let model = scn.model()?;
    let p = scn.params()?;
    let (x0, warnings) = init_with_warnings(scn, (!model.is_unit_rate()).then_some(&p))?;
    let opts = scn.sim_options()?;
    let traj = simulate(model, &p, &x0, &opts)?;

    let integral = FirstIntegral::for_model(model, &p);
    let drift = drift_along(&traj, &integral).ok();
    let end = traj.final_state();
    let (predicted, prediction_error) = match predict(model, &p, &x0) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = json!({
        "model": model_name(model),
        "params": (!model.is_unit_rate()).then_some(p),
        "initial": StateJson::from(x0),
        "step": opts.step,
        "t_end": opts.t_end,
        "stop_reason": traj.stop_reason,
        "t_final": traj.final_time(),
        "final_state": StateJson::from(end),
        "recorded_states": traj.len(),
        "max_drift": drift.map(|d| d.max_drift),
        "final_drift": drift.map(|d| d.final_drift),
        "drift_truncated": drift.map(|d| d.truncated),
        "max_population_error": traj.max_population_error(),
        "sigma": (!model.is_unit_rate()).then(|| threshold_sigma(&p)),
        "predicted_i_inf": predicted,
        "rel_gap": predicted.map(|v| (end.i - v).abs() / v),
        "prediction_error": prediction_error,
        "warnings": warnings,
    });
    if scn.wants("trajectory")? {
        write(out, "trajectory.csv", &trajectory_csv(&traj))?;
    }
    if scn.wants("summary")? {
        write_json(out, "summary.json", &summary)?;
    }
    Ok(Outcome::ok(summary, warnings))
}

fn class_name(class: StabilityClass) -> &'static str {
    match class {
        StabilityClass::Stable => "stable",
        StabilityClass::Unstable => "unstable",
        StabilityClass::Marginal => "marginal",
    }
}

pub fn cmd_equilibria(scn: &Scenario, out: &Path) -> Result<Outcome, CliError> {
    let p = scn.params()?;
    let n = scn.n.unwrap_or(11);
    let scan = equilibrium_scan(&p, n)?;
    let mut csv = String::from(EQUILIBRIA_HEADER);
    csv.push('\n');
    let mut points = Vec::with_capacity(scan.len());
    for rep in &scan {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt17(rep.point.i),
            fmt17(rep.point.r),
            fmt17(rep.tau()),
            class_name(rep.class)
        );
        points.push(json!({ "I": rep.point.i, "R": rep.point.r, "tau": rep.tau(), "class": class_name(rep.class) }));
    }
    let report = json!({ "params": p, "sigma": threshold_sigma(&p), "n": n, "points": points });
    write(out, "equilibria.csv", &csv)?;
    write_json(out, "equilibria.json", &report)?;
    Ok(Outcome::ok(report, p.warnings()))
}

pub fn cmd_final_size(scn: &Scenario, out: Option<&Path>) -> Result<Outcome, CliError> {
    let model = scn.model()?;
    let p = scn.params()?;
    let (x0, warnings) = init_with_warnings(scn, (!model.is_unit_rate()).then_some(&p))?;
    let report = if model.is_unit_rate() {
        let tol = scn.tol.unwrap_or(finalsize::DEFAULT_TOL);
        let i_inf = final_ignorants_bp(x0.i, x0.s, tol)?;
        let k = hamiltonian_bp(BpVariant::Corrected, x0.i, x0.s)?;
        json!({
            "model": model_name(model),
            "k": k,
            "sigma": null,
            "i_inf": i_inf,
            "r_inf": 1.0 - i_inf,
            "bracket": null,
            "iterations": null,
            "residual": (k - (2.0 * i_inf - i_inf.ln())).abs(),
        })
    } else {
        let fs = final_ignorants(&p, &reduce(&x0), scn.tol.unwrap_or(finalsize::DEFAULT_TOL))?;
        json!({
            "model": model_name(model),
            "k": fs.k,
            "sigma": threshold_sigma(&p),
            "i_inf": fs.i_inf,
            "r_inf": fs.r_inf,
            "bracket": [fs.bracket.0, fs.bracket.1],
            "iterations": fs.iterations,
            "residual": fs.residual,
        })
    };
    if let Some(dir) = out {
        write_json(dir, "final_size.json", &report)?;
    }
    Ok(Outcome::ok(report, warnings))
}

pub fn cmd_verify_integral(scn: &Scenario, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let model = parse_model(scn.model.as_deref().unwrap_or("piqueira"))?;
    let samples = scn.samples.unwrap_or(1000);
    let tol = scn.tol.unwrap_or(1e-6);
    let (variant, report) = if model.is_unit_rate() {
        let variant = match scn.variant.as_deref().unwrap_or("corrected") {
            "paper" | "printed" => BpVariant::Printed,
            "corrected" => BpVariant::Corrected,
            other => return Err(CliError::Invalid(format!("unknown variant {other:?}; expected paper or corrected"))),
        };
        let report = verify_first_integral(
            |y| models::belen_pearce_planar(y[0], y[1]).unwrap_or([f64::NAN; 2]),
            |y| hamiltonian_bp(variant, y[0], y[1]).unwrap_or(f64::NAN),
            &SampleDomain::belen_pearce(),
            samples,
            tol,
            seed,
        )?;
        (if variant == BpVariant::Printed { "paper" } else { "corrected" }, report)
    } else {
        match scn.variant.as_deref().unwrap_or("standard") {
            "standard" => {}
            other => return Err(CliError::Invalid(format!("unknown variant {other:?}; expected standard"))),
        }
        let p = scn.params()?;
        let report = verify_first_integral(
            |y| models::planar_field(&p, &State2 { r: y[0], i: y[1] }),
            |y| hamiltonian_piqueira(&p, &State2 { r: y[0], i: y[1] }).unwrap_or(f64::NAN),
            &SampleDomain::piqueira(),
            samples,
            tol,
            seed,
        )?;
        ("standard", report)
    };
    let family = if model.is_unit_rate() { "belen-pearce" } else { "piqueira" };
    let json = json!({
        "model": family,
        "variant": variant,
        "tol": tol,
        "seed": seed,
        "max_abs_residual": report.max_abs_residual,
        "mean_abs_residual": report.mean_abs_residual,
        "sample_count": report.sample_count,
        "verdict": report.verdict,
    });
    if let Some(dir) = out {
        write_json(dir, "verify_integral.json", &json)?;
    }
    let exit_code = if report.verdict == Verdict::Conserved { 0 } else { 5 };
    Ok(Outcome { json, exit_code, warnings: Vec::new() })
}

pub fn cmd_phase_portrait(scn: &Scenario, out: &Path) -> Result<Outcome, CliError> {
    let p = scn.params()?;
    let opts = scn.sim_options()?;
    let starts = match &scn.starts {
        Some(s) => s.clone(),
        None => {
            let (x0, _) = scn.init()?;
            vec![[x0.r, x0.i]]
        }
    };
    let starts: Vec<State2> = starts
        .iter()
        .map(|&[r, i]| State2::new(r, i).map_err(|e| CliError::Invalid(format!("start ({r}, {i}): {e}"))))
        .collect::<Result<_, _>>()?;

    let mut trajectories = Vec::with_capacity(starts.len());
    for (idx, y0) in starts.iter().enumerate() {
        let traj = rumorflow::integrate::simulate_planar(&p, y0, &opts)?;
        let file = format!("trajectory_{idx:02}.csv");
        write(out, &file, &trajectory_csv(&traj))?;
        trajectories.push(json!({
            "file": file,
            "R0": y0.r,
            "I0": y0.i,
            "k": hamiltonian_piqueira(&p, y0).ok(),
            "terminal_I": traj.final_state().i,
            "stop_reason": traj.stop_reason,
        }));
    }

    let n = scn.level_points.unwrap_or(200).max(1);
    let grid: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
    let mut levels = Vec::new();
    for (idx, &k) in scn.levels.as_deref().unwrap_or(&[]).iter().enumerate() {
        let mut csv = String::from(LEVEL_HEADER);
        csv.push('\n');
        for pt in level_curve(&p, k, &grid)? {
            let _ = writeln!(csv, "{},{},{}", fmt17(pt.i), fmt17(pt.r), pt.inside);
        }
        let file = format!("level_{idx:02}.csv");
        write(out, &file, &csv)?;
        levels.push(json!({ "file": file, "k": k }));
    }

    let meta = json!({
        "params": p,
        "sigma": threshold_sigma(&p),
        "trajectories": trajectories,
        "levels": levels,
    });
    write_json(out, "metadata.json", &meta)?;
    Ok(Outcome::ok(meta, p.warnings()))
}

#[derive(Debug, Clone)]
struct SweepRow {
    p: Params,
    x0: State3,
    sigma: Option<f64>,
    result: Result<(f64, f64), String>,
}

impl SweepRow {
    fn csv_line(&self) -> String {
        let (i_inf, i_t, gap, err) = match &self.result {
            Ok((i_inf, i_t)) => (Some(*i_inf), Some(*i_t), Some((i_t - i_inf).abs() / i_inf), String::new()),
            Err(e) => (None, None, None, e.replace([',', '\n'], ";")),
        };
        [
            fmt17(self.p.rho1),
            fmt17(self.p.rho2),
            fmt17(self.p.mu),
            fmt17(self.x0.i),
            fmt17(self.x0.s),
            fmt17(self.x0.r),
            fmt_opt(self.sigma),
            fmt_opt(i_inf),
            fmt_opt(i_t),
            fmt_opt(gap),
            err,
        ]
        .join(",")
    }
}

fn sweep_cell(model: ModelId, p: Params, x0: State3, opts: &SimOptions) -> SweepRow {
    let result = predict(model, &p, &x0).map_err(|e| e.to_string()).and_then(|i_inf| {
        let traj = simulate(model, &p, &x0, opts).map_err(|e| e.to_string())?;
        if traj.stop_reason == StopReason::LeftDomain {
            return Err("trajectory left the domain".to_string());
        }
        Ok((i_inf, traj.final_state().i))
    });
    let sigma = (!model.is_unit_rate()).then(|| threshold_sigma(&p));
    SweepRow { p, x0, sigma, result }
}

/// Rows in lexicographic `(rho1, rho2, mu)` order whatever the worker count.
pub fn sweep_csv(scn: &Scenario, workers: usize) -> Result<(String, usize, usize), CliError> {
    let model = scn.model()?;
    let base = scn.params()?;
    let (x0, _) = scn.init()?;
    let opts = scn.sim_options()?;
    let rho1s = scn.rho1_values.clone().unwrap_or_else(|| vec![base.rho1]);
    let rho2s = scn.rho2_values.clone().unwrap_or_else(|| vec![base.rho2]);
    let mus = scn.mu_values.clone().unwrap_or_else(|| vec![base.mu]);
    let mut grid = Vec::with_capacity(rho1s.len() * rho2s.len() * mus.len());
    for &a in &rho1s {
        for &b in &rho2s {
            for &mu in &mus {
                grid.push(Params::new(a, b, mu)?);
            }
        }
    }
    if grid.is_empty() {
        return Err(CliError::Invalid("empty parameter grid".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start {workers} workers: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| grid.par_iter().map(|p| sweep_cell(model, *p, x0, &opts)).collect());

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    Ok((csv, rows.len(), failed))
}

pub fn cmd_sweep(scn: &Scenario, workers: usize, out: &Path) -> Result<Outcome, CliError> {
    let (csv, rows, failed) = sweep_csv(scn, workers)?;
    write(out, "sweep.csv", &csv)?;
    if failed == rows {
        return Err(CliError::AllRowsFailed);
    }
    Ok(Outcome::ok(json!({ "rows": rows, "failed": failed, "file": "sweep.csv" }), Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [8.15e-5, 1.0 / 3.0, 0.1, 1e-300, 123456.789] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(fmt17(f64::NAN), "");
    }

    #[test]
    fn sweep_row_escapes_errors() {
        let row = SweepRow {
            p: Params::new(0.1, 0.2, 1.0).unwrap(),
            x0: State3::new(0.5, 0.0, 0.5).unwrap(),
            sigma: None,
            result: Err("a, b".into()),
        };
        assert_eq!(row.csv_line().split(',').count(), 11);
    }
}
