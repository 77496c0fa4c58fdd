use std::fmt::Write as _;
use std::path::Path;

use crate::bloch::Trajectory;
use crate::error::PulseIoError;

use super::{real, write_file};

pub const CSV_HEADER: &str = "t,x_a,y_a,z_a,x_b,y_b,z_b,ux,uy";

/// CSV text for one spin (`b = None`, b-columns left empty) or a pair.
/// Controls are taken from `a`.
pub fn trajectory_csv(a: &Trajectory, b: Option<&Trajectory>) -> Result<String, PulseIoError> {
    if a.states.len() != a.len() || a.controls.len() != a.len() {
        return Err(PulseIoError::Misaligned("spin a has ragged columns".into()));
    }
    if let Some(b) = b {
        if b.len() != a.len() || b.states.len() != b.len() {
            return Err(PulseIoError::Misaligned(format!("{} vs {} samples", a.len(), b.len())));
        }
        if let Some(i) = a.times.iter().zip(&b.times).position(|(s, t)| s != t) {
            return Err(PulseIoError::Misaligned(format!("sample {i} differs in time")));
        }
    }
    let mut s = String::with_capacity(200 * (a.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for i in 0..a.len() {
        let m = a.states[i];
        let _ = write!(s, "{},{},{},{},", real(a.times[i]), real(m.x), real(m.y), real(m.z));
        match b {
            Some(b) => {
                let m = b.states[i];
                let _ = write!(s, "{},{},{},", real(m.x), real(m.y), real(m.z));
            }
            None => s.push_str(",,,"),
        }
        let (ux, uy) = a.controls[i];
        let _ = writeln!(s, "{},{}", real(ux), real(uy));
    }
    Ok(s)
}

pub fn write_trajectory_csv(a: &Trajectory, b: Option<&Trajectory>, path: &Path) -> Result<(), PulseIoError> {
    write_file(path, &trajectory_csv(a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{propagate, NormalizedOffset, Pulse, NORTH_POLE, U0};

    #[test]
    fn two_sample_run_has_three_lines() {
        let p = Pulse::constant(0.1, U0, 0.0).unwrap();
        let t = propagate(NORTH_POLE, &p, NormalizedOffset(0.0), 0.1).unwrap();
        assert_eq!(t.len(), 2);
        let text = trajectory_csv(&t, None).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 9);
        assert_eq!(lines[1].split(',').nth(4), Some(""));
    }

    #[test]
    fn rejects_misaligned_pair() {
        let p = Pulse::constant(0.1, U0, 0.0).unwrap();
        let a = propagate(NORTH_POLE, &p, NormalizedOffset(0.0), 0.1).unwrap();
        let b = propagate(NORTH_POLE, &p, NormalizedOffset(0.0), 0.05).unwrap();
        assert!(matches!(trajectory_csv(&a, Some(&b)), Err(PulseIoError::Misaligned(_))));
    }

    #[test]
    fn write_reports_path() {
        let p = Pulse::constant(0.1, U0, 0.0).unwrap();
        let a = propagate(NORTH_POLE, &p, NormalizedOffset(0.0), 0.1).unwrap();
        let path = Path::new("/nonexistent-dir/x.csv");
        match write_trajectory_csv(&a, None, path) {
            Err(PulseIoError::Io { path: got, .. }) => assert_eq!(got, path),
            other => panic!("{other:?}"),
        }
    }
}
