//! Append-only JSON-lines files.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

/// One JSON value per line. A final line without a newline is a torn write
/// and is dropped on load; any other unparsable line is corruption.
pub struct Journal<T> {
    path: Option<PathBuf>,
    file: Option<File>,
    _kind: PhantomData<T>,
}

impl<T: Serialize + DeserializeOwned> Journal<T> {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            file: None,
            _kind: PhantomData,
        }
    }

    /// Opens (creating if needed) and returns the records already present.
    pub fn open(path: &Path) -> Result<(Self, Vec<T>), StorageError> {
        let io = |source| StorageError::Io {
            path: path.to_path_buf(),
            source,
        };
        let records = if path.exists() { read_all(path)? } else { Vec::new() };
        // Rewrite without a torn tail so new appends start on a clean line.
        let raw = std::fs::read(path).unwrap_or_default();
        if !raw.is_empty() && !raw.ends_with(b"\n") {
            let keep = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            std::fs::write(path, &raw[..keep]).map_err(io)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok((
            Self {
                path: Some(path.to_path_buf()),
                file: Some(file),
                _kind: PhantomData,
            },
            records,
        ))
    }

    pub fn append(&mut self, record: &T) -> Result<(), StorageError> {
        let (Some(file), Some(path)) = (&mut self.file, &self.path) else {
            return Ok(());
        };
        let mut line = serde_json::to_vec(record).expect("journal records serialize");
        line.push(b'\n');
        file.write_all(&line)
            .and_then(|_| file.flush())
            .map_err(|source| StorageError::Io {
                path: path.clone(),
                source,
            })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }
}

pub fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StorageError> {
    let file = File::open(path).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = BufReader::new(file);
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(|source| StorageError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        if buf.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(buf.trim_end()) {
            Ok(v) => out.push(v),
            Err(_) if !complete => break,
            Err(e) => {
                return Err(StorageError::Corrupt {
                    path: path.to_path_buf(),
                    line: line_no,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}
