//! Report envelopes, CSV flattening and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

pub const REPORT_DIR_ENV: &str = "GENTILE_REPORT_DIR";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Top-level JSON object: `{ config, version, [timestamp], <body fields> }`.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, C: Serialize, B: Serialize> {
    pub config: &'a C,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(flatten)]
    pub body: B,
}

impl<'a, C: Serialize, B: Serialize> Envelope<'a, C, B> {
    pub fn new(config: &'a C, body: B, with_timestamp: bool) -> Self {
        let timestamp = with_timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            config,
            version: VERSION,
            timestamp,
            body,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Stdout,
    File(PathBuf),
}

impl Target {
    pub fn resolve(out: &OutputArgs, command: &str) -> Target {
        match &out.output {
            Some(p) if p.as_os_str() == "-" => Target::Stdout,
            Some(p) => Target::File(p.clone()),
            None => {
                let dir = std::env::var_os(REPORT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
                Target::File(dir.join(format!("gentile-{command}.{}", out.format.extension())))
            }
        }
    }

    pub fn is_stdout(&self) -> bool {
        *self == Target::Stdout
    }

    pub fn write(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self {
            Target::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
            Target::File(path) => write_atomic(path, bytes),
        }
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Encodes a report in the requested format.
pub fn encode<C: Serialize, B: Serialize>(
    format: Format,
    envelope: &Envelope<'_, C, B>,
    csv: impl FnOnce() -> Result<Vec<u8>, CliError>,
) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => envelope.to_json(),
        Format::Csv => csv(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1e-10, -1.0000000000000002, 3.0, 1.7976931348623157e308] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/report.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn csv_quotes_commas() {
        let bytes = csv_bytes(&["a", "b"], [vec!["(2,1)".to_string(), "x".to_string()]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n\"(2,1)\",x\n");
    }

    #[test]
    fn timestamp_is_optional() {
        #[derive(Serialize)]
        struct Body {
            rows: Vec<u8>,
        }
        let cfg = 1u8;
        let without = String::from_utf8(Envelope::new(&cfg, Body { rows: vec![] }, false).to_json().unwrap()).unwrap();
        assert!(!without.contains("timestamp"));
        let with = String::from_utf8(Envelope::new(&cfg, Body { rows: vec![] }, true).to_json().unwrap()).unwrap();
        assert!(with.contains("\"timestamp\""));
    }
}
