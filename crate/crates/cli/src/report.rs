//! Run reports and the output directory they describe.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// How a performance measure evolves with experience.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceTrace {
    pub metric: String,
    pub experience: String,
    pub points: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub verdicts: Map<String, Value>,
    pub statistics: Map<String, Value>,
    pub performance_trace: PerformanceTrace,
    pub files: Vec<FileEntry>,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn stat_f64(&self, key: &str) -> Option<f64> {
        self.statistics.get(key).and_then(Value::as_f64)
    }

    pub fn verdict(&self, key: &str) -> Option<&str> {
        self.verdicts.get(key).and_then(Value::as_str)
    }
}

/// Collects data files written into one directory, in write order.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Renders a file in memory, then writes it and records it.
    pub fn write(
        &mut self,
        name: &str,
        render: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
    ) -> io::Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        fs::write(self.root.join(name), &buf)?;
        self.files.push(FileEntry {
            name: name.to_owned(),
            bytes: buf.len() as u64,
            sha256: format!("{:x}", Sha256::digest(&buf)),
        });
        Ok(())
    }

    /// A whitespace-separated two-column file that gnuplot reads directly.
    pub fn write_trace(
        &mut self,
        name: &str,
        header: (&str, &str),
        rows: impl IntoIterator<Item = (f64, f64)>,
    ) -> io::Result<()> {
        self.write(name, |out| {
            writeln!(out, "# {} {}", header.0, header.1)?;
            for (x, y) in rows {
                writeln!(out, "{x} {y}")?;
            }
            Ok(())
        })
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

/// Geometrically spaced checkpoints `1, 2, 4, ...` up to and including `n`.
pub fn checkpoints(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 1;
    while k < n {
        out.push(k);
        k *= 2;
    }
    if n > 0 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_spacing() {
        assert_eq!(checkpoints(0), Vec::<usize>::new());
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(5), vec![1, 2, 4, 5]);
        assert_eq!(checkpoints(8), vec![1, 2, 4, 8]);
    }

    #[test]
    fn manifest_records_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write_trace("trace.dat", ("k", "v"), [(1.0, 0.5)])
            .unwrap();
        let files = out.into_files();
        let text = fs::read_to_string(dir.path().join("trace.dat")).unwrap();
        assert_eq!(text, "# k v\n1 0.5\n");
        assert_eq!(files[0].bytes, text.len() as u64);
        assert_eq!(files[0].sha256.len(), 64);
    }
}
