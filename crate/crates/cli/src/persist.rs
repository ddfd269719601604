//! Whole-file atomic writes into a run directory.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::RunError;

/// A run directory; every file lands through a temporary file and a rename,
/// so readers never see a partial file.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, RunError> {
        let root = root.into();
        std::fs::create_dir_all(&root)
            .map_err(|e| RunError::Config(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, RunError> {
        let target = self.root.join(name);
        let io = |e: std::io::Error| RunError::Config(format!("writing {}: {e}", target.display()));
        let mut tmp = tempfile::Builder::new()
            .prefix(&format!(".{name}."))
            .tempfile_in(&self.root)
            .map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&target).map_err(|e| io(e.error))?;
        Ok(target)
    }

    pub fn write_csv<R, I>(&self, name: &str, header: &[&str], rows: R) -> Result<PathBuf, RunError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator,
        I::Item: AsRef<[u8]>,
    {
        self.write(name, &csv_bytes(header, rows)?)
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<PathBuf, RunError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| RunError::Config(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

pub fn csv_bytes<R, I>(header: &[&str], rows: R) -> Result<Vec<u8>, RunError>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator,
    I::Item: AsRef<[u8]>,
{
    let err = |e: csv::Error| RunError::Config(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| RunError::Config(format!("csv: {e}")))
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
