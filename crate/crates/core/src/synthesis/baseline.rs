use crate::bloch::{Pulse, PulseSegment, U0};

use super::BangBangPulse;

/// Resonant π-pulse: `(2π, 0)` for `τ = 0.5`.
pub fn pi_pulse_baseline() -> Pulse {
    Pulse::constant(0.5, U0, 0.0).expect("π-pulse is valid")
}

/// Puts the bang-bang field on the line at angle `−φ_0+/2`:
/// `u_x = u cos(φ_0+/2)`, `u_y = −u sin(φ_0+/2)`.
pub fn lift_to_two_controls(pulse: &BangBangPulse, phi_plus0: f64) -> Pulse {
    let (s, c) = (0.5 * phi_plus0).sin_cos();
    let segments = pulse
        .bangs()
        .map(|(d, u)| PulseSegment::new(d, u * c, -u * s))
        .collect();
    Pulse::new(segments, None).expect("lift preserves the amplitude")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{propagate_final, rotate_pulse, NormalizedOffset, NORTH_POLE};
    use std::f64::consts::PI;

    #[test]
    fn baseline_examples() {
        let p = pi_pulse_baseline();
        assert_eq!(p.duration(), 0.5);
        let m = propagate_final(NORTH_POLE, &p, NormalizedOffset(0.0), 1e-5).unwrap();
        assert!((m.z + 1.0).abs() < 1e-9);
        let m = propagate_final(NORTH_POLE, &p, NormalizedOffset(8.0 * PI), 1e-5).unwrap();
        assert!(m.z > -0.9);
    }

    #[test]
    fn lift_examples() {
        let b = BangBangPulse::new(1.0, vec![0.1, 0.3], 0.5).unwrap();
        assert_eq!(lift_to_two_controls(&b, 0.0), b.to_pulse());
        let y = lift_to_two_controls(&b, PI);
        for (a, l) in b.to_pulse().segments().iter().zip(y.segments()) {
            assert!(l.ux.abs() < 1e-15);
            assert!((l.uy + a.ux).abs() < 1e-15);
        }
        for &phi in &[0.4, 2.0, -1.3] {
            let l = lift_to_two_controls(&b, phi);
            for s in l.segments() {
                assert!((s.amplitude() - U0).abs() < 1e-14);
                // fixed line at angle −φ/2 (mod π)
                let ang = s.uy.atan2(s.ux) + 0.5 * phi;
                assert!((ang.sin()).abs() < 1e-14);
            }
            let back = rotate_pulse(&l, 0.5 * phi);
            for (a, r) in b.to_pulse().segments().iter().zip(back.segments()) {
                assert_eq!(a.duration, r.duration);
                assert!((a.ux - r.ux).abs() < 1e-14 && r.uy.abs() < 1e-14);
            }
        }
    }
}
