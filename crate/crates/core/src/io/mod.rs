//! File formats: the QTT1 time-tag format, scenario configuration, CSV
//! tables and key/value manifests. Every writer replaces its target
//! atomically.

mod config;
mod manifest;
mod qtt;
mod tables;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use config::{AnalysisConfig, FssSynthConfig, ScenarioConfig};
pub use manifest::Manifest;
pub use qtt::{
    decode_qtt, encode_qtt, read_qtt_file, write_qtt_file, HEADER_LEN, MAGIC, RECORD_LEN, VERSION,
};
pub use tables::{
    curve_to_csv, fss_fit_to_csv, read_curve_csv, read_qwp_series_csv, read_tempsweep_csv,
    tempsweep_to_csv, qwp_series_to_csv, TempSweepRow,
};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}
