use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use sasaki_core::{Polynomial, Weights};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "sasaki",
    version,
    about = "Transverse conformal invariants on weighted Sasakian 3-spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// First weight a1 > 0.
    #[arg(long, global = true, default_value_t = 2.0, allow_hyphen_values = true)]
    pub a1: f64,

    /// Second weight a2 > 0.
    #[arg(long, global = true, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a2: f64,

    /// Collocation nodes [default: 128; flow 32; sphere 192].
    #[arg(long, global = true)]
    pub nodes: Option<usize>,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Random trials per suite.
    #[arg(long, global = true, default_value_t = 25)]
    pub trials: usize,

    /// Largest flow step [default: 2e-4].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dt: Option<f64>,

    /// Flow step limit [default: 20000].
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,

    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,

    /// Write the CSV table here (`-` for stdout).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Conformal exponent as monomial coefficients, lowest degree first.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1
    )]
    pub u_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Run every property suite and report each deviation against its bound.
    Verify,
    /// Evaluate the conformal invariant numerically and in closed form.
    Invariant,
    /// Evaluate the invariant over random metrics of the conformal class.
    Sweep,
    /// Run the normalized transverse Yamabe flow.
    Flow,
    /// Kazdan–Warner, Bourguignon–Ezin and Gauss–Bonnet suites on round spheres.
    Sphere,
}

/// Validated settings of one run, embedded in every JSON report.
///
/// Output paths are left out: they do not affect any computed value.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub a1: f64,
    pub a2: f64,
    pub nodes: usize,
    pub seed: u64,
    pub trials: usize,
    pub dt: f64,
    pub max_steps: usize,
    pub u_coeffs: Option<Vec<f64>>,
    #[serde(skip)]
    pub weights: Weights,
    #[serde(skip)]
    pub json: Option<PathBuf>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, Failure> {
        let weights = Weights::new(cli.a1, cli.a2)?;
        let nodes = cli.nodes.unwrap_or(match cli.command {
            Command::Flow => 32,
            Command::Sphere => 192,
            _ => 128,
        });
        sasaki_core::CollocationGrid::new(nodes, sasaki_core::Interval::Unit)?;
        if cli.trials == 0 {
            return Err(Failure::Usage("--trials must be at least 1".into()));
        }
        let dt = cli.dt.unwrap_or(2e-4);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Failure::Usage(format!("--dt must be positive, got {dt}")));
        }
        let max_steps = cli.max_steps.unwrap_or(20_000);
        if max_steps == 0 {
            return Err(Failure::Usage("--max-steps must be at least 1".into()));
        }
        if let Some(c) = &cli.u_coeffs {
            if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                return Err(Failure::Usage(
                    "--u-coeffs needs finite comma-separated numbers".into(),
                ));
            }
        }
        Ok(Self {
            command: cli.command,
            a1: cli.a1,
            a2: cli.a2,
            nodes,
            seed: cli.seed,
            trials: cli.trials,
            dt,
            max_steps,
            u_coeffs: cli.u_coeffs.clone(),
            weights,
            json: cli.json.clone(),
            csv: cli.csv.clone(),
        })
    }

    pub fn stdout_reserved(&self) -> bool {
        let dash = |p: &Option<PathBuf>| p.as_ref().is_some_and(|p| p.as_os_str() == "-");
        dash(&self.json) || dash(&self.csv)
    }

    pub fn exponent(&self) -> Polynomial {
        self.u_coeffs
            .clone()
            .map(Polynomial)
            .unwrap_or_else(Polynomial::zero)
    }
}
