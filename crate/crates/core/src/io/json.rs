use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::bloch::{Pulse, PulseSegment, AMPLITUDE_SLACK, U0};
use crate::error::PulseIoError;

use super::{read_file, real, write_file};

/// `{"u0": …, "units_hz": …|null, "segments": [{"tau": …, "ux": …, "uy": …}]}`
pub fn pulse_to_json(pulse: &Pulse) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    let _ = writeln!(s, "  \"u0\": {},", real(U0));
    match pulse.units_hz() {
        Some(hz) => {
            let _ = writeln!(s, "  \"units_hz\": {},", real(hz));
        }
        None => s.push_str("  \"units_hz\": null,\n"),
    }
    s.push_str("  \"segments\": [\n");
    let n = pulse.segments().len();
    for (k, seg) in pulse.segments().iter().enumerate() {
        let _ = write!(
            s,
            "    {{\"tau\": {}, \"ux\": {}, \"uy\": {}}}",
            real(seg.duration),
            real(seg.ux),
            real(seg.uy)
        );
        s.push_str(if k + 1 < n { ",\n" } else { "\n" });
    }
    s.push_str("  ]\n}\n");
    s
}

pub fn write_pulse_json(pulse: &Pulse, path: &Path) -> Result<(), PulseIoError> {
    write_file(path, &pulse_to_json(pulse))
}

pub fn read_pulse_json(path: &Path) -> Result<Pulse, PulseIoError> {
    parse_pulse_json(&read_file(path)?, path)
}

fn schema(path: &Path, field: impl Into<String>, message: impl Into<String>) -> PulseIoError {
    PulseIoError::Schema {
        path: path.to_path_buf(),
        field: field.into(),
        message: message.into(),
    }
}

fn only_keys(obj: &Map<String, Value>, keys: &[&str], at: &str, path: &Path) -> Result<(), PulseIoError> {
    match obj.keys().find(|k| !keys.contains(&k.as_str())) {
        Some(k) => Err(schema(path, format!("{at}{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn number(obj: &Map<String, Value>, key: &str, at: &str, path: &Path) -> Result<f64, PulseIoError> {
    let field = format!("{at}{key}");
    match obj.get(key) {
        None => Err(schema(path, field, "missing")),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| schema(path, field, format!("expected a finite number, got {v}"))),
    }
}

/// Parses pulse JSON; `path` is only used for error context.
pub fn parse_pulse_json(text: &str, path: &Path) -> Result<Pulse, PulseIoError> {
    let root: Value = serde_json::from_str(text).map_err(|e| PulseIoError::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| schema(path, "$", "expected an object"))?;
    only_keys(obj, &["u0", "units_hz", "segments"], "", path)?;
    let u0 = number(obj, "u0", "", path)?;
    if (u0 - U0).abs() > AMPLITUDE_SLACK {
        return Err(schema(path, "u0", format!("expected 2π, got {u0}")));
    }
    let units_hz = match obj.get("units_hz") {
        None => return Err(schema(path, "units_hz", "missing")),
        Some(Value::Null) => None,
        Some(_) => {
            let hz = number(obj, "units_hz", "", path)?;
            if hz <= 0.0 {
                return Err(schema(path, "units_hz", format!("must be positive, got {hz}")));
            }
            Some(hz)
        }
    };
    let segs = obj
        .get("segments")
        .ok_or_else(|| schema(path, "segments", "missing"))?
        .as_array()
        .ok_or_else(|| schema(path, "segments", "expected an array"))?;
    if segs.is_empty() {
        return Err(schema(path, "segments", "must not be empty"));
    }
    let mut segments = Vec::with_capacity(segs.len());
    for (index, v) in segs.iter().enumerate() {
        let at = format!("segments[{index}].");
        let s = v
            .as_object()
            .ok_or_else(|| schema(path, format!("segments[{index}]"), "expected an object"))?;
        only_keys(s, &["tau", "ux", "uy"], &at, path)?;
        let tau = number(s, "tau", &at, path)?;
        if tau < 0.0 {
            return Err(schema(path, format!("{at}tau"), format!("must be non-negative, got {tau}")));
        }
        let seg = PulseSegment::new(tau, number(s, "ux", &at, path)?, number(s, "uy", &at, path)?);
        let amplitude = seg.amplitude();
        if amplitude > U0 + AMPLITUDE_SLACK {
            return Err(PulseIoError::AmplitudeBound {
                path: path.to_path_buf(),
                index,
                amplitude,
            });
        }
        segments.push(seg);
    }
    Ok(Pulse::new(segments, units_hz)?)
}
