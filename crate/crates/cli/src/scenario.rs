//! Scenario files: a flat JSON object whose keys mirror the command-line
//! overrides. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use rumorflow::integrate::SimOptions;
use rumorflow::models::{ModelId, Params, State3, BOUNDARY_TOL};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: Option<String>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub mu: Option<f64>,
    pub i0: Option<f64>,
    pub s0: Option<f64>,
    pub r0: Option<f64>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub stop_s_below: Option<f64>,
    pub record_every: Option<usize>,
    /// Subset of `trajectory`, `summary`.
    pub outputs: Option<Vec<String>>,
    /// Equilibrium scan size.
    pub n: Option<usize>,
    /// First-integral variant for `verify-integral`.
    pub variant: Option<String>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    /// Phase-portrait starts as `[R, I]` pairs.
    pub starts: Option<Vec<[f64; 2]>>,
    /// Phase-portrait level values.
    pub levels: Option<Vec<f64>>,
    pub level_points: Option<usize>,
    pub rho1_values: Option<Vec<f64>>,
    pub rho2_values: Option<Vec<f64>>,
    pub mu_values: Option<Vec<f64>>,
}

pub const DEFAULT_RHO1: f64 = 0.4;
pub const DEFAULT_RHO2: f64 = 0.8;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 1000.0;
pub const DEFAULT_RECORD_EVERY: usize = 100;

/// Names accepted by `--scenario` in place of a file path.
pub const CANNED: [&str; 5] = ["fig1", "fig2", "fig3", "fig4", "fig5"];

impl Scenario {
    /// A canned scenario name or a path to a JSON file.
    pub fn load(name_or_path: &str) -> Result<Self, CliError> {
        if let Some(s) = Self::canned(name_or_path) {
            return Ok(s);
        }
        let text = std::fs::read_to_string(Path::new(name_or_path))
            .map_err(|e| CliError::Invalid(format!("cannot read scenario {name_or_path}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("scenario {name_or_path}: {e}")))
    }

    /// Built-in scenarios `fig1` to `fig5`.
    pub fn canned(name: &str) -> Option<Self> {
        let contact = |rho1: f64, rho2: f64, mu: f64| Self {
            model: Some("piqueira".into()),
            rho1: Some(rho1),
            rho2: Some(rho2),
            mu: Some(mu),
            ..Self::default()
        };
        let s = match name {
            // invented start, with the rates of fig2 and fig3
            "fig1" => Self { i0: Some(0.7), s0: Some(0.2), r0: Some(0.1), ..contact(0.1, 0.9, 0.8) },
            "fig2" => Self { i0: Some(0.4), s0: Some(0.5), r0: Some(0.1), ..contact(0.1, 0.9, 0.8) },
            // sums to 0.99; renormalized on load
            "fig3" => Self { i0: Some(0.84), s0: Some(0.05), r0: Some(0.1), ..contact(0.1, 0.9, 0.8) },
            "fig4" => Self {
                model: Some("piqueira-planar".into()),
                i0: Some(0.8),
                r0: Some(0.1),
                starts: Some(vec![[0.0, 0.95], [0.05, 0.8], [0.2, 0.6], [0.3, 0.5], [0.1, 0.4]]),
                ..contact(0.4, 0.8, 1.0)
            },
            "fig5" => Self {
                model: Some("piqueira-planar".into()),
                i0: Some(0.89),
                s0: Some(0.0),
                r0: Some(0.11),
                starts: Some(vec![[0.11, 0.89]]),
                ..contact(0.4, 0.8, 1.0)
            },
            _ => return None,
        };
        Some(s)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: Scenario) -> Scenario {
        macro_rules! pick {
            ($($f:ident),*) => { Scenario { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            model, rho1, rho2, mu, i0, s0, r0, step, t_end, stop_s_below, record_every, outputs, n, variant,
            samples, tol, starts, levels, level_points, rho1_values, rho2_values, mu_values
        )
    }

    pub fn model(&self) -> Result<ModelId, CliError> {
        parse_model(self.model.as_deref().unwrap_or("piqueira"))
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Params::new(
            self.rho1.unwrap_or(DEFAULT_RHO1),
            self.rho2.unwrap_or(DEFAULT_RHO2),
            self.mu.unwrap_or(1.0),
        )
        .map_err(CliError::from_model)
    }

    /// Initial state. `s0` defaults to `1 - i0 - r0`; other triples that miss
    /// the unit sum are renormalized and a warning is returned.
    pub fn init(&self) -> Result<(State3, Option<String>), CliError> {
        let i0 = self.i0.ok_or_else(|| CliError::Invalid("missing initial ignorant fraction i0".into()))?;
        let r0 = self.r0.unwrap_or(0.0);
        let s0 = self.s0.unwrap_or(1.0 - (i0 + r0));
        let sum = i0 + s0 + r0;
        if (sum - 1.0).abs() <= BOUNDARY_TOL {
            return Ok((State3::new(i0, s0, r0).map_err(CliError::from_model)?, None));
        }
        let (x, sum) = State3::renormalized(i0, s0, r0).map_err(CliError::from_model)?;
        let warning = format!(
            "initial fractions I = {i0}, S = {s0}, R = {r0} sum to {sum}; renormalized to ({}, {}, {})",
            x.i, x.s, x.r
        );
        Ok((x, Some(warning)))
    }

    pub fn sim_options(&self) -> Result<SimOptions, CliError> {
        let opts = SimOptions {
            step: self.step.unwrap_or(DEFAULT_STEP),
            t_end: self.t_end.unwrap_or(DEFAULT_T_END),
            stop_s_below: self.stop_s_below.unwrap_or(SimOptions::default().stop_s_below),
            record_every: self.record_every.unwrap_or(DEFAULT_RECORD_EVERY),
        };
        opts.validate().map_err(CliError::from_model)?;
        Ok(opts)
    }

    pub fn wants(&self, output: &str) -> Result<bool, CliError> {
        match &self.outputs {
            None => Ok(true),
            Some(list) => {
                if let Some(bad) = list.iter().find(|o| !matches!(o.as_str(), "trajectory" | "summary")) {
                    return Err(CliError::Invalid(format!("unknown output {bad:?}; expected trajectory or summary")));
                }
                Ok(list.iter().any(|o| o == output))
            }
        }
    }
}

pub fn parse_model(name: &str) -> Result<ModelId, CliError> {
    match name {
        "piqueira" | "piqueira3" => Ok(ModelId::Piqueira3),
        "piqueira-planar" => Ok(ModelId::PiqueiraPlanar),
        "belen-pearce" | "belen-pearce3" => Ok(ModelId::BelenPearce3),
        "belen-pearce-planar" => Ok(ModelId::BelenPearcePlanar),
        other => Err(CliError::Invalid(format!(
            "unknown model {other:?}; expected piqueira, piqueira-planar, belen-pearce or belen-pearce-planar"
        ))),
    }
}

pub fn model_name(model: ModelId) -> &'static str {
    match model {
        ModelId::Piqueira3 => "piqueira",
        ModelId::PiqueiraPlanar => "piqueira-planar",
        ModelId::BelenPearce3 => "belen-pearce",
        ModelId::BelenPearcePlanar => "belen-pearce-planar",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canned_scenarios_carry_their_values() {
        let fig2 = Scenario::canned("fig2").unwrap();
        assert_eq!((fig2.rho1, fig2.rho2, fig2.mu), (Some(0.1), Some(0.9), Some(0.8)));
        assert_eq!((fig2.i0, fig2.s0, fig2.r0), (Some(0.4), Some(0.5), Some(0.1)));
        let fig3 = Scenario::canned("fig3").unwrap();
        assert_eq!((fig3.i0, fig3.s0, fig3.r0), (Some(0.84), Some(0.05), Some(0.1)));
        let fig4 = Scenario::canned("fig4").unwrap();
        assert_eq!((fig4.rho1, fig4.rho2, fig4.mu), (Some(0.4), Some(0.8), Some(1.0)));
        let fig5 = Scenario::canned("fig5").unwrap();
        assert_eq!((fig5.i0, fig5.r0), (Some(0.89), Some(0.11)));
        assert!(CANNED.iter().all(|n| Scenario::canned(n).is_some()));
        assert!(Scenario::canned("fig6").is_none());
    }

    #[test]
    fn fig3_is_renormalized_with_a_warning() {
        let (x, warning) = Scenario::canned("fig3").unwrap().init().unwrap();
        assert!(warning.unwrap().contains("renormalized"));
        assert!((x.sum() - 1.0).abs() < 1e-15);
        let (_, warning) = Scenario::canned("fig2").unwrap().init().unwrap();
        assert!(warning.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<Scenario>(r#"{"rho1": 0.1, "rh02": 0.3}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn overrides_win() {
        let base = Scenario::canned("fig2").unwrap();
        let merged = base.merged(Scenario { mu: Some(1.0), ..Scenario::default() });
        assert_eq!(merged.mu, Some(1.0));
        assert_eq!(merged.rho1, Some(0.1));
    }

    #[test]
    fn missing_spreaders_fill_the_simplex() {
        let s = Scenario { i0: Some(0.6), r0: Some(0.1), ..Scenario::default() };
        let (x, warning) = s.init().unwrap();
        assert!(warning.is_none());
        assert!((x.s - 0.3).abs() < 1e-15);
    }

    #[test]
    fn output_selection() {
        let s = Scenario { outputs: Some(vec!["summary".into()]), ..Scenario::default() };
        assert!(s.wants("summary").unwrap());
        assert!(!s.wants("trajectory").unwrap());
        let bad = Scenario { outputs: Some(vec!["plot".into()]), ..Scenario::default() };
        assert!(bad.wants("summary").is_err());
    }
}
