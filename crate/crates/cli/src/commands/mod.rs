mod check;
mod decompose;
mod fixture;
mod verify;

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use woldkit::{IsometryTuple, ToleranceConfig};

use crate::error::{CliError, CliResult, Exit};
use crate::manifest::load_manifest;
use crate::report::to_json;
use crate::{fsio, Cli, Command};

pub use check::check;
pub use decompose::{decompose, DecomposeOptions};
pub use fixture::fixture;
pub use verify::verify;

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<Exit> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { manifest } => check(manifest, g, out),
        Command::Decompose {
            manifest,
            depth,
            method,
            timing,
        } => {
            let opts = DecomposeOptions {
                depth: *depth,
                method: *method,
                timing: *timing,
            };
            decompose(manifest, &opts, g, out)
        }
        Command::Fixture(args) => fixture(args, g, out),
        Command::Verify { manifest, suite } => verify(manifest, *suite, g, out),
    }
}

/// Loads a manifest and resolves its tolerances against the command line.
fn load(path: &Path, g: &crate::GlobalArgs) -> CliResult<(IsometryTuple, ToleranceConfig)> {
    let loaded = load_manifest(path)?;
    let tuple = loaded.tuple()?;
    let cfg = loaded.tolerances(&g.overrides());
    cfg.validate()
        .map_err(|e| CliError::Usage(format!("tolerances: {e}")))?;
    Ok((tuple, cfg))
}

/// Prints the human report and, with `--json`, writes the machine report.
fn emit<T: Serialize>(report: &T, human: String, g: &crate::GlobalArgs, out: &mut dyn Write) -> CliResult<()> {
    if let Some(path) = &g.json {
        fsio::write_atomic(path, to_json(report).as_bytes())?;
    }
    out.write_all(human.as_bytes()).map_err(|source| CliError::Write {
        path: "<stdout>".into(),
        source,
    })
}
