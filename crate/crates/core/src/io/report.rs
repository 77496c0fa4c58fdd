use std::fmt::Write as _;

use crate::twospin::{FidelityReport, SweepRow};

use super::real;

pub const SWEEP_HEADER: &str = "delta,z_final,transverse";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::with_capacity(80 * (rows.len() + 1));
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{}", real(r.delta), real(r.z_final), real(r.transverse));
    }
    s
}

/// Pretty JSON with an `inverted` flag next to the measured fields.
pub fn report_json(report: &FidelityReport) -> String {
    let mut v = serde_json::to_value(report).expect("report is plain data");
    v["inverted"] = serde_json::Value::Bool(report.inverted());
    let mut s = serde_json::to_string_pretty(&v).expect("report is plain data");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows_round_trip() {
        let rows = [
            SweepRow { delta: -0.1, z_final: -0.999_999_999_1, transverse: 1e-5 },
            SweepRow { delta: 1.0 / 3.0, z_final: 0.25, transverse: 0.0 },
        ];
        let text = sweep_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        for (line, r) in lines[1..].iter().zip(&rows) {
            let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(v, [r.delta, r.z_final, r.transverse]);
        }
    }

    #[test]
    fn report_has_all_fields() {
        let r = FidelityReport {
            z_a_final: -0.9995,
            z_b_final: -0.9991,
            mirror_residual: 1e-12,
            norm_drift: 2e-14,
            t_f: 0.774,
        };
        let v: serde_json::Value = serde_json::from_str(&report_json(&r)).unwrap();
        assert_eq!(v["z_a_final"].as_f64(), Some(-0.9995));
        assert_eq!(v["t_f"].as_f64(), Some(0.774));
        assert_eq!(v["inverted"], serde_json::Value::Bool(true));
    }
}
