//! On-disk formats: JSON documents and CSV tables stamped with the producing
//! configuration's hash, and headerless CSV signal matrices.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filtering::SignalBatch;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Key under which JSON outputs carry their [`Provenance`].
pub const PROVENANCE_KEY: &str = "provenance";

/// Hash of the resolved configuration plus the library version.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
}

impl Provenance {
    /// SHA-256 of the configuration's compact JSON form.
    pub fn of<T: Serialize>(config: &T) -> Self {
        let bytes = serde_json::to_vec(config).expect("config serializes");
        Provenance {
            config_hash: hex(&Sha256::digest(&bytes)),
            version: VERSION.to_string(),
        }
    }

    /// Comment line that opens every CSV output.
    pub fn comment(&self) -> String {
        format!("# config_hash={}, version={}", self.config_hash, self.version)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a top-level `provenance` entry added to objects.
pub fn to_stamped_json<T: Serialize>(value: &T, prov: &Provenance) -> String {
    let mut v = serde_json::to_value(value).expect("document serializes");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert(
            PROVENANCE_KEY.into(),
            serde_json::to_value(prov).expect("provenance serializes"),
        );
    }
    let mut text = serde_json::to_string_pretty(&v).expect("document serializes");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, prov: &Provenance) -> Result<()> {
    write_text(path, &to_stamped_json(value, prov))
}

/// Read a JSON document, ignoring a top-level `provenance` entry.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if let serde_json::Value::Object(map) = &mut v {
        map.remove(PROVENANCE_KEY);
    }
    serde_json::from_value(v).map_err(|e| Error::format(path, e.to_string()))
}

/// Shortest text that parses back to the same bits.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Signal matrix as headerless CSV after the provenance comment: one line per
/// signal (column), `N` values per line.
pub fn matrix_to_csv(batch: &SignalBatch, prov: &Provenance) -> String {
    let mut out = prov.comment();
    out.push('\n');
    for col in batch.columns() {
        let line: Vec<String> = col.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, batch: &SignalBatch, prov: &Provenance) -> Result<()> {
    write_text(path, &matrix_to_csv(batch, prov))
}

pub fn read_matrix(path: &Path) -> Result<SignalBatch> {
    let text = read_text(path)?;
    let mut columns = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let col = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        columns.push(col);
    }
    let n = match columns.first() {
        Some(c) => c.len(),
        None => return Err(Error::format(path, "no signals")),
    };
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::format(path, "signals have different lengths"));
    }
    SignalBatch::from_columns(n, columns).map_err(|e| Error::format(path, e.to_string()))
}

/// CSV table with a header row, after the provenance comment.
pub fn table_to_csv<I, R>(header: &[&str], rows: I, prov: &Provenance) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    format!("{}\n{body}", prov.comment())
}

pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I, prov: &Provenance) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    write_text(path, &table_to_csv(header, rows, prov))
}

/// Header and rows of a table written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = read_text(path)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(String::from).collect())
                .map_err(|e| Error::format(path, e.to_string()))
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Layout of one matrix file, for the `schema.json` sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSchema {
    pub file: String,
    pub rows: usize,
    pub cols: usize,
    pub order: String,
    pub description: String,
}

impl MatrixSchema {
    /// An `N x S` signal matrix stored one column per line.
    pub fn signals(file: &str, batch: &SignalBatch, description: &str) -> Self {
        MatrixSchema {
            file: file.into(),
            rows: batch.num_nodes(),
            cols: batch.num_signals(),
            order: "column_major: one line per column (signal), one value per node".into(),
            description: description.into(),
        }
    }
}
