use std::fmt::Write as _;
use std::path::Path;

use crate::bloch::{Pulse, PulseSegment, RfScale, U0};
use crate::error::PulseIoError;

use super::{read_file, real, write_file};

/// One dwell of a shaped pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeRow {
    /// `|u| / u_0` in `[0, 1]`.
    pub amplitude: f64,
    /// Degrees in `[0, 360)`.
    pub phase: f64,
}

/// Amplitude/phase table with a uniform dwell.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFile {
    /// Comment lines, without the leading `#`.
    pub header: Vec<String>,
    pub rows: Vec<ShapeRow>,
    /// Seconds per row.
    pub dwell: f64,
}

impl ShapeFile {
    pub fn duration_s(&self) -> f64 {
        self.dwell * self.rows.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            let _ = writeln!(s, "# {h}");
        }
        let _ = writeln!(s, "# dwell_s = {}", real(self.dwell));
        for r in &self.rows {
            let _ = writeln!(s, "{}, {}", real(r.amplitude), real(r.phase));
        }
        s
    }

    /// Segment pulse that plays the table back at `rfmax_hz`.
    pub fn to_pulse(&self, rfmax_hz: f64) -> Result<Pulse, PulseIoError> {
        let scale = RfScale::new(rfmax_hz)?;
        let tau = scale.tau(self.dwell);
        let segments = self
            .rows
            .iter()
            .map(|r| {
                let (s, c) = r.phase.to_radians().sin_cos();
                let u = U0 * r.amplitude;
                PulseSegment::new(tau, u * c, u * s)
            })
            .collect();
        Ok(Pulse::new(segments, Some(rfmax_hz))?)
    }
}

fn phase_degrees(ux: f64, uy: f64) -> f64 {
    if ux == 0.0 && uy == 0.0 {
        return 0.0;
    }
    let d = uy.atan2(ux).to_degrees();
    let d = if d < 0.0 { d + 360.0 } else { d };
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Resamples `pulse` onto `n_samples` uniform dwells.
///
/// Each row carries the mean control over its dwell, so dwells that lie
/// inside one segment reproduce that segment exactly.
pub fn export_shape(pulse: &Pulse, n_samples: usize, rfmax_hz: f64) -> Result<ShapeFile, PulseIoError> {
    let scale = RfScale::new(rfmax_hz)?;
    let segs: Vec<&PulseSegment> = pulse.segments().iter().filter(|s| s.duration > 0.0).collect();
    if n_samples < segs.len() || n_samples == 0 {
        return Err(PulseIoError::InvalidRequest(format!(
            "{n_samples} samples for {} segments",
            segs.len()
        )));
    }
    let total = pulse.duration();
    let h = total / n_samples as f64;
    let mut starts = Vec::with_capacity(segs.len());
    let mut t = 0.0;
    for s in &segs {
        starts.push(t);
        t += s.duration;
    }
    let mut rows = Vec::with_capacity(n_samples);
    let mut k0 = 0;
    for i in 0..n_samples {
        let (a, b) = (i as f64 * h, if i + 1 == n_samples { total } else { (i + 1) as f64 * h });
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut touched = Vec::new();
        let mut k = k0;
        while k < segs.len() {
            let end = if k + 1 == segs.len() { total } else { starts[k + 1] };
            let w = end.min(b) - starts[k].max(a);
            if w > 0.0 {
                sx += w * segs[k].ux;
                sy += w * segs[k].uy;
                touched.push(k);
            }
            if end > b {
                break;
            }
            k += 1;
        }
        k0 = k.min(segs.len() - 1);
        // a dwell inside one segment is copied, not re-summed
        let (ux, uy) = match touched[..] {
            [only] => (segs[only].ux, segs[only].uy),
            _ => (sx / (b - a), sy / (b - a)),
        };
        rows.push(ShapeRow {
            amplitude: (ux.hypot(uy) / U0).min(1.0),
            phase: phase_degrees(ux, uy),
        });
    }
    let dwell = scale.seconds(h);
    Ok(ShapeFile {
        header: vec![
            "spininv shaped pulse".to_string(),
            format!("points = {n_samples}"),
            format!("rfmax_hz = {}", real(rfmax_hz)),
            format!("duration_s = {}", real(scale.seconds(total))),
        ],
        rows,
        dwell,
    })
}

fn bad(path: &Path, line: usize, message: impl Into<String>) -> PulseIoError {
    PulseIoError::Schema {
        path: path.to_path_buf(),
        field: format!("line {line}"),
        message: message.into(),
    }
}

/// Parses the text written by [`ShapeFile::to_text`]; `path` is context only.
pub fn parse_shape(text: &str, path: &Path) -> Result<ShapeFile, PulseIoError> {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    let mut dwell = None;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("dwell_s").and_then(|r| r.trim_start().strip_prefix('=')) {
                let d: f64 = v.trim().parse().map_err(|_| bad(path, n, format!("bad dwell `{}`", v.trim())))?;
                if !(d.is_finite() && d > 0.0) {
                    return Err(bad(path, n, format!("dwell must be positive, got {d}")));
                }
                dwell = Some(d);
            } else {
                header.push(c.to_string());
            }
            continue;
        }
        let mut it = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(a), Some(p), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad(path, n, "expected `amplitude, phase`"));
        };
        let amplitude: f64 = a.parse().map_err(|_| bad(path, n, format!("bad amplitude `{a}`")))?;
        let phase: f64 = p.parse().map_err(|_| bad(path, n, format!("bad phase `{p}`")))?;
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(bad(path, n, format!("amplitude {amplitude} outside [0, 1]")));
        }
        if !(0.0..360.0).contains(&phase) {
            return Err(bad(path, n, format!("phase {phase} outside [0, 360)")));
        }
        rows.push(ShapeRow { amplitude, phase });
    }
    let dwell = dwell.ok_or_else(|| PulseIoError::Schema {
        path: path.to_path_buf(),
        field: "dwell_s".into(),
        message: "missing".into(),
    })?;
    if rows.is_empty() {
        return Err(PulseIoError::Schema {
            path: path.to_path_buf(),
            field: "rows".into(),
            message: "shape has no rows".into(),
        });
    }
    Ok(ShapeFile { header, rows, dwell })
}

pub fn write_shape(shape: &ShapeFile, path: &Path) -> Result<(), PulseIoError> {
    write_file(path, &shape.to_text())
}

pub fn read_shape(path: &Path) -> Result<ShapeFile, PulseIoError> {
    parse_shape(&read_file(path)?, path)
}
