use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Writes `bytes` to a temporary file next to `path` and renames it into place,
/// so readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    write_all_atomic(&[(path, bytes.to_vec())])
}

/// Atomic writes of several files: everything is staged first, then renamed.
pub fn write_all_atomic(files: &[(&Path, Vec<u8>)]) -> CliResult<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let wrap = |source| CliError::Write {
            path: path.to_path_buf(),
            source,
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir).map_err(wrap)?;
        tmp.write_all(bytes).map_err(wrap)?;
        tmp.as_file().sync_all().map_err(wrap)?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| CliError::Write {
            path: path.to_path_buf(),
            source: e.error,
        })?;
    }
    Ok(())
}
