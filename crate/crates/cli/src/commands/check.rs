use std::io::Write;
use std::path::Path;

use crate::error::{CliResult, Exit};
use crate::report::CheckReport;
use crate::GlobalArgs;

pub fn check(manifest: &Path, g: &GlobalArgs, out: &mut dyn Write) -> CliResult<Exit> {
    let (tuple, cfg) = super::load(manifest, g)?;
    let reason = match tuple.gate(&cfg) {
        Ok(()) => None,
        Err(woldkit::Error::Rejected { reason, .. }) => Some(reason),
        Err(e) => return Err(e.into()),
    };
    let report = CheckReport::new(tuple.dim(), tuple.n(), cfg, tuple.defects().clone(), reason);
    super::emit(&report, report.render(), g, out)?;
    Ok(report.status.exit())
}
