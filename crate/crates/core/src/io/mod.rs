//! On-disk formats: the SUV1 volume container, fixation CSV, JSON/CSV
//! report emission, and the TOML run configuration for batch sweeps.

pub mod config;
pub mod fixation_csv;
pub mod reports;
pub mod suv1;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes a file atomically: the bytes land in a temp file in the target
/// directory and are renamed into place, so a crashed or failed run never
/// leaves a partial output behind.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}
