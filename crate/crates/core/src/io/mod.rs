//! Pulse JSON, spectrometer shape files, trajectory and sweep CSV, and
//! fidelity reports.
//!
//! Every real is written with 17 significant digits so values survive a
//! round trip bit for bit.

mod json;
mod report;
mod shape;
mod trajectory;

pub use json::{parse_pulse_json, pulse_to_json, read_pulse_json, write_pulse_json};
pub use report::{report_json, sweep_csv, SWEEP_HEADER};
pub use shape::{export_shape, parse_shape, read_shape, write_shape, ShapeFile, ShapeRow};
pub use trajectory::{trajectory_csv, write_trajectory_csv, CSV_HEADER};

use std::path::Path;

use crate::error::PulseIoError;

/// Decimal form with 17 significant digits.
pub(crate) fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), PulseIoError> {
    std::fs::write(path, text).map_err(|source| PulseIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, PulseIoError> {
    std::fs::read_to_string(path).map_err(|source| PulseIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}
