//! Command-line front end for `woldkit`: manifests in, reports out.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod error;
pub mod fsio;
pub mod manifest;
pub mod mtx;
pub mod report;

pub use error::{CliError, CliResult, Exit};

use manifest::ToleranceOverrides;

#[derive(Debug, Parser)]
#[command(
    name = "woldkit",
    version,
    about = "Wold decompositions of isometries and doubly commuting tuples"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args)]
pub struct GlobalArgs {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, value_name = "TOL")]
    pub rank_tol: Option<f64>,
    /// Acceptance threshold for residuals and principal angles.
    #[arg(long, global = true, value_name = "TOL")]
    pub residual_tol: Option<f64>,
    /// Budget on operator powers applied by any iteration.
    #[arg(long, global = true, value_name = "K")]
    pub max_power: Option<usize>,
    /// Seed for fixture generation and scrambling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the machine-readable report here.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Oracle file: read by `decompose`, written by `fixture`.
    #[arg(long, global = true, value_name = "PATH")]
    pub oracle: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn overrides(&self) -> ToleranceOverrides {
        ToleranceOverrides {
            rank_tol: self.rank_tol,
            residual_tol: self.residual_tol,
            max_power: self.max_power,
            stabilization_window: None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the defects of a tuple and run the acceptance gate.
    Check { manifest: PathBuf },
    /// Compute the joint block decomposition.
    Decompose {
        manifest: PathBuf,
        /// Number of leading coordinates to split on (defaults to all).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
        method: MethodArg,
        /// Include wall-clock time in the reports.
        #[arg(long)]
        timing: bool,
    },
    /// Generate a fixture manifest and its oracle.
    Fixture(FixtureArgs),
    /// Run a named suite of checks.
    Verify {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Recursive,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Wold,
    Multi,
    Identities,
    Equivalence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Polydisc,
    SlocinskiMixed,
    ShiftUnitary,
    Random,
    RepeatedShift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    /// Matrices embedded in the manifest.
    Inline,
    /// Matrix Market array files next to the manifest.
    Array,
    /// Matrix Market coordinate files next to the manifest.
    Coordinate,
}

#[derive(Clone, Debug, Args)]
pub struct FixtureArgs {
    /// Fixture spec (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Multiplicity.
    #[arg(long)]
    pub e: Option<usize>,
    /// Shift depth.
    #[arg(long = "D", visible_alias = "degree")]
    pub degree: Option<usize>,
    /// Number of coordinates.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension of the unitary atoms in `shift-unitary`.
    #[arg(long)]
    pub u: Option<usize>,
    /// Conjugate the tuple by a seeded random unitary.
    #[arg(long)]
    pub scramble: bool,
    #[arg(long)]
    pub dim_cap: Option<usize>,
    /// Manifest output path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Inline)]
    pub matrix_format: MatrixFormat,
}

/// Parses `args`, runs the command and returns the exit status. Human-readable
/// output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{e}");
            return Exit::Parse;
        }
        Err(e) => {
            let _ = write!(out, "{e}");
            return Exit::Accepted;
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(exit) => exit,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Exit::from(&e)
        }
    }
}
