use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Outcome};
use crate::error::CliError;
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "rumorflow", version, about = "Rumor-spreading models: integration, equilibria, final size")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and compare its end with the predicted final size.
    Simulate,
    /// Classify a uniform scan of the spreader-free equilibria.
    Equilibria,
    /// Predict the asymptotic ignorant fraction without integrating.
    FinalSize,
    /// Check a first integral against the vector field at sampled points.
    VerifyIntegral,
    /// Planar trajectories from several starts plus level curves.
    PhasePortrait,
    /// Final size against integration over a grid of rates.
    Sweep,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Scenario file, or one of fig1..fig5.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Output directory; `out` for commands that always write files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// piqueira, piqueira-planar, belen-pearce or belen-pearce-planar.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub rho1: Option<f64>,
    #[arg(long, global = true)]
    pub rho2: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub i0: Option<f64>,
    #[arg(long, global = true)]
    pub s0: Option<f64>,
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    #[arg(long = "record-every", global = true)]
    pub record_every: Option<usize>,
    /// First-integral variant: standard (contact-rate), paper or corrected (unit-rate).
    #[arg(long, global = true)]
    pub variant: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Number of equilibria in the scan.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Phase-portrait starts as `R:I` pairs separated by commas.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_start)]
    pub starts: Option<Vec<[f64; 2]>>,
    /// Level values for the phase portrait, comma separated; may be empty.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_levels)]
    pub levels: Option<Levels>,
    #[arg(long = "rho1-values", global = true, value_delimiter = ',')]
    pub rho1_values: Option<Vec<f64>>,
    #[arg(long = "rho2-values", global = true, value_delimiter = ',')]
    pub rho2_values: Option<Vec<f64>>,
    #[arg(long = "mu-values", global = true, value_delimiter = ',')]
    pub mu_values: Option<Vec<f64>>,
}

fn parse_start(s: &str) -> Result<[f64; 2], String> {
    let (r, i) = s.split_once(':').ok_or_else(|| format!("expected R:I, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok([parse(r)?, parse(i)?])
}

/// Comma-separated level values taken as one token, so that negative values
/// and the empty list both parse.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Levels(pub Vec<f64>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Levels)
}

impl Common {
    fn overrides(&self) -> Scenario {
        Scenario {
            model: self.model.clone(),
            rho1: self.rho1,
            rho2: self.rho2,
            mu: self.mu,
            i0: self.i0,
            s0: self.s0,
            r0: self.r0,
            step: self.step,
            t_end: self.t_end,
            record_every: self.record_every,
            variant: self.variant.clone(),
            samples: self.samples,
            tol: self.tol,
            n: self.n,
            starts: self.starts.clone(),
            levels: self.levels.clone().map(|l| l.0),
            rho1_values: self.rho1_values.clone(),
            rho2_values: self.rho2_values.clone(),
            mu_values: self.mu_values.clone(),
            ..Scenario::default()
        }
    }

    /// The scenario named on the command line with the flag overrides applied.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let base = match &self.scenario {
            Some(s) => Scenario::load(s)?,
            None => Scenario::default(),
        };
        Ok(base.merged(self.overrides()))
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let c = &cli.common;
    let scn = c.scenario()?;
    let explicit = c.out.as_deref();
    let out = explicit.unwrap_or(Path::new("out"));
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&scn, out),
        Command::Equilibria => commands::cmd_equilibria(&scn, out),
        Command::FinalSize => commands::cmd_final_size(&scn, explicit),
        Command::VerifyIntegral => commands::cmd_verify_integral(&scn, c.seed, explicit),
        Command::PhasePortrait => commands::cmd_phase_portrait(&scn, out),
        Command::Sweep => commands::cmd_sweep(&scn, c.workers, out),
    }
}

/// Parses `args`, runs the command, prints the JSON result on stdout and
/// warnings and errors on stderr. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            match serde_json::to_string_pretty(&outcome.json) {
                // a closed pipe downstream is not an error of ours
                Ok(s) => {
                    let _ = writeln!(std::io::stdout().lock(), "{s}");
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
            i32::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            i32::from(e.exit_code())
        }
    }
}
