use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sn_bound::{FrictionModel, IntegrationControls, ProblemParams};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "sn-bound",
    version,
    about = "Bound states of the Schrödinger–Newton system by shooting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate one bound state and write its profile, diagnostics and manifest.
    Solve(SolveArgs),
    /// Ladder of bound states over a grid of m values.
    Scan(ScanArgs),
    /// Run the diagnostic checks on a trajectory or a stored profile.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Spatial dimension.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    /// Angular momentum (dimension 2).
    #[arg(long, conflicts_with = "parity", allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Parity sector, 0 even or 1 odd (dimension 1).
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub parity: Option<u8>,
}

impl ProblemArgs {
    pub fn m_or_parity(&self) -> Result<f64, CliError> {
        match (self.dim, self.m, self.parity) {
            (1, None, Some(p)) => Ok(p as f64),
            (1, Some(m), None) => Ok(m),
            (1, None, None) => Err(CliError::usage("--dim 1 needs --parity")),
            (2, Some(m), None) => Ok(m),
            (2, None, Some(_)) => Err(CliError::usage("--parity applies to --dim 1; use --m")),
            (_, None, None) => Err(CliError::usage("--dim 2 needs --m")),
            _ => Err(CliError::usage("give either --m or --parity")),
        }
    }

    pub fn params(&self, friction: FrictionModel) -> Result<ProblemParams, CliError> {
        let p = ProblemParams::new(self.dim, self.m_or_parity()?).map_err(CliError::from_core_usage)?;
        Ok(p.with_friction(friction))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Absolute tolerance of the integrator.
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Integration horizon; by default a fixed distance past the radius where V = 1.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Escape requires |u| to exceed this multiple of u0.
    #[arg(long, default_value_t = 10.0)]
    pub escape_factor: f64,
    /// Step budget per trajectory.
    #[arg(long, default_value_t = 2_000_000)]
    pub max_steps: usize,
}

impl ToleranceArgs {
    pub fn controls(&self) -> IntegrationControls {
        IntegrationControls {
            rel_tol: self.tol,
            abs_tol: self.abs_tol,
            r_max: self.rmax,
            escape_factor: self.escape_factor,
            max_steps: self.max_steps,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of zeros of the bound state.
    #[arg(long)]
    pub nodes: usize,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    /// Relative width at which bisection stops.
    #[arg(long, default_value_t = sn_bound::shoot::DEFAULT_BIS_TOL)]
    pub bis_tol: f64,
    /// Coupling constant of the physical variables.
    #[arg(long, requires = "sigma")]
    pub gamma: Option<f64>,
    /// Length scale of the physical variables.
    #[arg(long, requires = "gamma")]
    pub sigma: Option<f64>,
    /// Rotation frequency (dimension 2).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega_rot: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long)]
    pub m_min: f64,
    #[arg(long)]
    pub m_max: f64,
    #[arg(long)]
    pub m_step: f64,
    /// Largest node count of each ladder.
    #[arg(long)]
    pub nodes_max: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[arg(long, default_value_t = sn_bound::shoot::DEFAULT_BIS_TOL)]
    pub bis_tol: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl ScanArgs {
    pub fn m_grid(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi, step) = (self.m_min, self.m_max, self.m_step);
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::usage(format!("--m-step must be positive, got {step}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(CliError::usage(format!("empty m range [{lo}, {hi}]")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| lo + k as f64 * step).collect())
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["u0", "profile"])))]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Integrate from this initial value.
    #[arg(long)]
    pub u0: Option<f64>,
    /// Profile CSV with columns r,u,du,V,dV.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Use the coefficients of the standalone two-dimensional display.
    #[arg(long)]
    pub literal_2d: bool,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
}
