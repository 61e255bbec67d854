//! File helpers.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

fn io_err(context: String) -> impl FnOnce(std::io::Error) -> CliError {
    move |source| CliError::Io { context, source }
}

pub fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(io_err(format!("reading {}", path.display())))
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = || format!("writing {}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(ctx()))?;
    tmp.write_all(bytes).map_err(io_err(ctx()))?;
    tmp.as_file().sync_all().map_err(io_err(ctx()))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        context: ctx(),
        source: e.error,
    })?;
    Ok(())
}
