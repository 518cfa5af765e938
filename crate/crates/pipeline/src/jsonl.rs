//! Line-delimited JSON files with an optional leading header record.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First line of every manifest the pipeline writes: which stage produced
/// it and with what settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub stage: String,
    pub config: serde_json::Value,
}

impl Header {
    pub fn new(stage: &str, config: serde_json::Value) -> Self {
        Self {
            kind: "header".into(),
            stage: stage.into(),
            config,
        }
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(Error::io(path))?))
}

pub fn write<T: Serialize>(path: &Path, header: Option<&Header>, records: &[T]) -> Result<()> {
    let mut out = create(path)?;
    let mut put = |v: String| writeln!(out, "{v}").map_err(Error::io(path));
    if let Some(h) = header {
        put(serde_json::to_string(h).expect("header serializes"))?;
    }
    for r in records {
        put(serde_json::to_string(r).expect("record serializes"))?;
    }
    out.flush().map_err(Error::io(path))
}

/// Reads every record, reporting the first malformed line by number.
/// Blank lines are skipped; a header is recognized by `"kind": "header"`.
pub fn read<T: DeserializeOwned>(path: &Path) -> Result<(Option<Header>, Vec<T>)> {
    let (header, lines) = read_raw(path)?;
    let records = lines
        .into_iter()
        .map(|(n, v)| serde_json::from_value(v).map_err(|e| Error::line(path, n, e.to_string())))
        .collect::<Result<_>>()?;
    Ok((header, records))
}

/// Records as JSON values, each with its 1-based line number.
pub type RawLines = Vec<(usize, serde_json::Value)>;

/// Like [`read`] but leaves records as JSON values with their line numbers,
/// for callers that validate line by line.
pub fn read_raw(path: &Path) -> Result<(Option<Header>, RawLines)> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::line(path, n, e.to_string()))?;
        if v.get("kind").and_then(|k| k.as_str()) == Some("header") {
            if header.is_some() || !records.is_empty() {
                return Err(Error::line(path, n, "header must be the first record"));
            }
            header = Some(serde_json::from_value(v).map_err(|e| Error::line(path, n, e.to_string()))?);
            continue;
        }
        records.push((n, v));
    }
    Ok((header, records))
}
