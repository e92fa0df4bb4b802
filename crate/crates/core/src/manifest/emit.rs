//! Trace serialization and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{SignalPoint, SignalTrace};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 5] = ["t_ms", "s_x", "s_y", "magnitude", "fidelity"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One header row, then one row per point. Floats use the shortest decimal
/// that parses back to the same value.
pub fn write_csv<W: Write>(trace: &SignalTrace, out: W) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_writer(out);
    for p in &trace.points {
        w.serialize(p)?;
    }
    if trace.points.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads points written by [`write_csv`]; the header must match exactly.
pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<SignalPoint>, EmitError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(EmitError::Io(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unexpected CSV header {header:?}"),
        )));
    }
    Ok(r.deserialize().collect::<Result<Vec<SignalPoint>, _>>()?)
}

/// The whole trace, config echo included.
pub fn to_json(trace: &SignalTrace) -> Result<String, EmitError> {
    Ok(serde_json::to_string_pretty(trace)?)
}

pub fn render(trace: &SignalTrace, format: Format) -> Result<Vec<u8>, EmitError> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(trace, &mut buf)?;
            Ok(buf)
        }
        Format::Json => {
            let mut s = to_json(trace)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

/// Writes to a temporary file in the target directory, then renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
