//! Telemetry export.
//!
//! CSV columns, in order:
//!
//! `t, state, forward_mps, right_mps, up_mps, yaw_rate_dps, gimbal_pan_deg,
//! gimbal_tilt_deg, zoom, stream, detected, s_p_percent, phi_deg, theta_deg,
//! psi_deg, x_m, y_m, z_m, yaw_deg`
//!
//! Detection columns are empty on ticks without a detection. Floats use the
//! shortest round-trip representation, so equal runs give equal bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{RunRecord, TelemetryRow};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 19] = [
    "t",
    "state",
    "forward_mps",
    "right_mps",
    "up_mps",
    "yaw_rate_dps",
    "gimbal_pan_deg",
    "gimbal_tilt_deg",
    "zoom",
    "stream",
    "detected",
    "s_p_percent",
    "phi_deg",
    "theta_deg",
    "psi_deg",
    "x_m",
    "y_m",
    "z_m",
    "yaw_deg",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
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

pub fn to_csv_bytes(rows: &[TelemetryRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::validation("csv", e.to_string()))
}

pub fn to_json_bytes(record: &RunRecord) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(record)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_csv(path: &Path) -> Result<Vec<TelemetryRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!("{}: unexpected telemetry header", path.display())));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Writes `record` into `path` in the given format, creating parent directories.
pub fn export_timeseries(record: &RunRecord, path: &Path, format: Format) -> Result<()> {
    let bytes = match format {
        Format::Csv => to_csv_bytes(&record.rows)?,
        Format::Json => to_json_bytes(record)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
