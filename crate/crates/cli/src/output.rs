//! Artifact writing. Every file goes to a temporary in the target directory
//! first and is renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use mfgauss::{Report, Result};

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `<command>.json`, one CSV per error series and the extras; returns
/// the paths written.
pub fn write_report(dir: &Path, command: &str, report: &Report, extra: &[(String, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join(format!("{command}.json"));
    write_atomic(&json, &report.to_json()?)?;
    written.push(json);
    for s in &report.series {
        let path = dir.join(format!("{}.csv", s.name));
        write_atomic(&path, &s.to_csv()?)?;
        written.push(path);
    }
    for (name, contents) in extra {
        let path = dir.join(name);
        write_atomic(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}
