//! Deterministic formatting and all-or-nothing file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::CliError;

/// 17 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds a CSV table with LF line endings.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv {
            buf,
            columns: header.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        debug_assert_eq!(fields.len(), self.columns);
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes every `(name, bytes)` pair into `dir`, or none of them.
///
/// All contents are staged in temporary files inside `dir` first and only
/// then renamed into place; if a rename fails the files already placed are
/// removed again.
pub fn write_all_or_nothing(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
        tmp.write_all(bytes).map_err(|e| io_error(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| io_error(tmp.path(), e))?;
        staged.push((tmp, dir.join(name)));
    }
    let mut placed: Vec<PathBuf> = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        if let Err(e) = tmp.persist(&target) {
            for p in &placed {
                let _ = fs::remove_file(p);
            }
            return Err(io_error(&target, e.error));
        }
        placed.push(target);
    }
    Ok(placed)
}
