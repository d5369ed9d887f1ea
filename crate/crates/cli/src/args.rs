use std::path::PathBuf;

use annulus_core::criteria::{MuMode, TheoremId};
use annulus_core::kernels::Kernel;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Eigenvalue criteria, spectra and fixed points for radial solutions of
/// elliptic systems on an annulus.
#[derive(Debug, Parser)]
#[command(name = "annulus", version, about)]
pub struct Cli {
    /// Print one JSON document instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Directory for CSV/JSON artifacts (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the existence and index criteria on a problem file.
    Check(CheckArgs),
    /// Principal characteristic values of the four linear operators.
    Spectra(SpectraArgs),
    /// Find and certify fixed points by multi-start Newton.
    Solve(SolveArgs),
    /// Split a nonnegative profile into a difference of cone elements.
    Decompose(DecomposeArgs),
    /// Mollifier convergence table for a profile.
    Mollify(MollifyArgs),
    /// Kernel and geometry constants of a problem.
    Constants(ConstantsArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub file: PathBuf,
    /// Check only this theorem (3.1, 5.1, 5.2, 5.3, 5.4 or 5.5).
    #[arg(long, value_parser = parse_theorem)]
    pub theorem: Option<TheoremId>,
    /// Override the file's μ source [default: from file, else numeric].
    #[arg(long, value_parser = parse_mu_mode)]
    pub mu_mode: Option<MuMode>,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Problem file supplying the windows.
    #[arg(required_unless_present = "defaults", conflicts_with = "defaults")]
    pub file: Option<PathBuf>,
    /// Use the windows [1/4, 3/4] and [1/2, 1].
    #[arg(long)]
    pub defaults: bool,
    /// Which value the `used` column reports [default: from file, else numeric].
    #[arg(long, value_parser = parse_mu_mode)]
    pub mu_mode: Option<MuMode>,
    /// Nyström nodes [default: from file, else 401].
    #[arg(long = "N", value_name = "N")]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    /// Grid nodes [default: from file, else 201].
    #[arg(long = "N", value_name = "N")]
    pub nodes: Option<usize>,
    /// Start amplitudes [default: from file, else 1,10,50,100,200].
    #[arg(long, value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightArg {
    /// ω(t) = t(1 - t), window [1/4, 3/4] unless overridden.
    K1,
    /// ω(t) = t, window [1/2, 1] unless overridden.
    K2,
}

impl WeightArg {
    pub fn kernel(self) -> Kernel {
        match self {
            WeightArg::K1 => Kernel::K1,
            WeightArg::K2 => Kernel::K2,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// CSV profile on a uniform grid of [0, 1] with a `t` column.
    #[arg(required_unless_present = "demo", conflicts_with = "demo")]
    pub file: Option<PathBuf>,
    /// Use the built-in demo profile.
    #[arg(long)]
    pub demo: bool,
    /// Value column [default: first column other than `t`].
    #[arg(long)]
    pub column: Option<String>,
    /// Weight of the derivative norm.
    #[arg(long, value_enum, default_value = "k1")]
    pub weight: WeightArg,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Harnack window `a,b` [default: 0.25,0.75 for k1, 0.5,1 for k2].
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub window: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct MollifyArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Mollifier indices.
    #[arg(long, value_delimiter = ',', default_value = "8,32,128")]
    pub n_list: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    pub file: PathBuf,
}

fn parse_theorem(s: &str) -> Result<TheoremId, String> {
    s.parse()
}

fn parse_mu_mode(s: &str) -> Result<MuMode, String> {
    s.parse()
}
