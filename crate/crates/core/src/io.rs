//! JSONL files with a single leading metadata line.
//!
//! Every output file starts with `{"meta":{...}}` carrying the tool
//! version, the generation seed, and the grid hash, followed by one payload
//! object per line. Readers tolerate files without the meta line so
//! externally produced fixtures also load.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: schema mismatch: {message}")]
    Schema { path: String, line: usize, message: String },
    #[error("{path}: refusing to write an empty file")]
    Empty { path: String },
}

/// Provenance stamped into every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FileMeta {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_hash: Option<String>,
}

impl FileMeta {
    pub fn new(seed: Option<String>, grid_hash: Option<String>) -> Self {
        FileMeta { tool_version: env!("CARGO_PKG_VERSION").to_string(), seed, grid_hash }
    }
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    meta: FileMeta,
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

/// Writes the meta line plus one JSON object per item. Refuses to write an
/// empty payload: nothing is created in that case.
pub fn write_jsonl<T: Serialize>(path: &Path, meta: &FileMeta, items: &[T]) -> Result<(), IoError> {
    if items.is_empty() {
        return Err(IoError::Empty { path: path.display().to_string() });
    }
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let meta_line = serde_json::to_string(&MetaLine { meta: meta.clone() })
        .expect("meta serializes");
    writeln!(out, "{meta_line}").map_err(|e| io_err(path, e))?;
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| IoError::Schema {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Reads a JSONL file, returning the meta line (if present) and the items.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Option<FileMeta>, Vec<T>), IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut meta = None;
    let mut items = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 {
            if let Ok(m) = serde_json::from_str::<MetaLine>(line) {
                meta = Some(m.meta);
                continue;
            }
        }
        let item: T = serde_json::from_str(line).map_err(|e| IoError::Schema {
            path: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok((meta, items))
}
