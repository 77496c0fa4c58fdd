//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use spininv_core::BangBangPulse;

pub const EIGHT_PI: f64 = 8.0 * PI;

/// Converged inversion pulse at `Δ = 8π` with its costate direction.
pub fn eight_pi_pulse() -> (BangBangPulse, f64) {
    let switches = vec![
        0.0721735920738476,
        0.19813317141768316,
        0.3240927507616649,
        0.45005233010564644,
        0.5760119094492208,
        0.7019714887924925,
    ];
    let pulse = BangBangPulse::new(1.0, switches, 0.7741450808656143).expect("valid fixture");
    (pulse, -6.514505383751644)
}
