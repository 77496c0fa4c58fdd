//! Two uncoupled spins driven by one field: symmetrization of offset pairs,
//! joint simulation, mirror-symmetry and fidelity checks, offset sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::{
    propagate, propagate_final, rotate_z, Magnetization, NormalizedOffset, Pulse, PulseSegment, Trajectory,
    NORTH_POLE,
};
use crate::error::TwoSpinError;

/// `z ≤ INVERSION_THRESHOLD` counts as inverted.
pub const INVERSION_THRESHOLD: f64 = -0.999;
const SPHERE_TOL: f64 = 1e-9;

/// Normalized offsets of spins a and b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetPair {
    pub delta_a: f64,
    pub delta_b: f64,
}

impl OffsetPair {
    pub fn new(delta_a: f64, delta_b: f64) -> Result<Self, TwoSpinError> {
        if !(delta_a.is_finite() && delta_b.is_finite()) {
            return Err(TwoSpinError::NonFiniteOffset);
        }
        Ok(Self { delta_a, delta_b })
    }

    /// The pair `(Δ, −Δ)`.
    pub fn symmetric(delta: f64) -> Result<Self, TwoSpinError> {
        Self::new(delta, -delta)
    }

    pub fn swapped(self) -> Self {
        Self { delta_a: self.delta_b, delta_b: self.delta_a }
    }
}

/// Offsets seen from the frame rotating at the mean frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricReduction {
    pub delta_sym: f64,
    pub frame_shift: f64,
}

pub fn symmetrize(pair: OffsetPair) -> SymmetricReduction {
    SymmetricReduction {
        delta_sym: 0.5 * (pair.delta_a - pair.delta_b),
        frame_shift: 0.5 * (pair.delta_a + pair.delta_b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinState {
    pub spin_a: Magnetization,
    pub spin_b: Magnetization,
}

impl TwoSpinState {
    pub fn new(spin_a: Magnetization, spin_b: Magnetization) -> Result<Self, TwoSpinError> {
        for (spin, m) in [('a', spin_a), ('b', spin_b)] {
            let norm = m.norm();
            if !((norm - 1.0).abs() <= SPHERE_TOL) {
                return Err(TwoSpinError::OffSphere { spin, norm });
            }
        }
        Ok(Self { spin_a, spin_b })
    }

    /// Both spins at equilibrium.
    pub fn north() -> Self {
        Self { spin_a: NORTH_POLE, spin_b: NORTH_POLE }
    }
}

/// Trajectories of both spins on the same time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedTrajectory {
    pub a: Trajectory,
    pub b: Trajectory,
}

impl PairedTrajectory {
    pub fn final_state(&self) -> Option<TwoSpinState> {
        Some(TwoSpinState {
            spin_a: self.a.final_state()?,
            spin_b: self.b.final_state()?,
        })
    }
}

/// Simulates spin a at `+delta_sym` and spin b at `−delta_sym` under the same field.
pub fn propagate_two(
    s0: TwoSpinState,
    pulse: &Pulse,
    delta_sym: f64,
    dt: f64,
) -> Result<PairedTrajectory, TwoSpinError> {
    let (a, b) = rayon::join(
        || propagate(s0.spin_a, pulse, NormalizedOffset(delta_sym), dt),
        || propagate(s0.spin_b, pulse, NormalizedOffset(-delta_sym), dt),
    );
    Ok(PairedTrajectory { a: a?, b: b? })
}

/// Applies the time-dependent rotation `rate·t` to the control field.
///
/// Segments are cut into pieces of at most `dt`, each rotated by the phase at
/// its midpoint. A negative `rate` counter-rotates.
pub fn phase_ramp(pulse: &Pulse, rate: f64, dt: f64) -> Result<Pulse, TwoSpinError> {
    if rate == 0.0 {
        return Ok(pulse.clone());
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(crate::error::BlochError::InvalidStep(dt).into());
    }
    let mut out = Vec::new();
    let mut t0 = 0.0;
    for seg in pulse.segments() {
        let pieces = (seg.duration / dt).ceil().max(1.0) as usize;
        let h = seg.duration / pieces as f64;
        for k in 0..pieces {
            let mid = t0 + (k as f64 + 0.5) * h;
            let (s, c) = (rate * mid).sin_cos();
            out.push(PulseSegment::new(h, c * seg.ux - s * seg.uy, s * seg.ux + c * seg.uy));
        }
        t0 += seg.duration;
    }
    Ok(Pulse::new(out, pulse.units_hz())?)
}

/// Verification summary of a pulse on a spin pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReport {
    pub z_a_final: f64,
    pub z_b_final: f64,
    pub mirror_residual: f64,
    pub norm_drift: f64,
    pub t_f: f64,
}

impl FidelityReport {
    pub fn inverted(&self) -> bool {
        self.z_a_final <= INVERSION_THRESHOLD && self.z_b_final <= INVERSION_THRESHOLD
    }
}

/// Direction of the first nonzero control, the frame in which the mirror
/// relation is stated.
fn control_line(pulse: &Pulse) -> f64 {
    pulse
        .segments()
        .iter()
        .find(|s| s.amplitude() > 0.0)
        .map_or(0.0, |s| s.uy.atan2(s.ux))
}

/// Simulates `pulse` (given in the frame of the pair's offsets) on both spins
/// from the north pole.
///
/// For `frame_shift ≠ 0` the pulse is counter-rotated at `−frame_shift` and
/// the spins see `±delta_sym`.
pub fn verify_inversion(pulse: &Pulse, pair: OffsetPair, dt: f64) -> Result<FidelityReport, TwoSpinError> {
    let red = symmetrize(OffsetPair::new(pair.delta_a, pair.delta_b)?);
    let shifted = phase_ramp(pulse, -red.frame_shift, dt)?;
    let traj = propagate_two(TwoSpinState::north(), &shifted, red.delta_sym, dt)?;
    let mirror_residual = mirror_check_along(&traj.a, &traj.b, control_line(&shifted))?;
    let end = traj.final_state().expect("trajectories are never empty");
    Ok(FidelityReport {
        z_a_final: end.spin_a.z,
        z_b_final: end.spin_b.z,
        mirror_residual,
        norm_drift: traj.a.norm_drift().max(traj.b.norm_drift()),
        t_f: shifted.duration(),
    })
}

/// `max_t max(|x_a + x_b|, |y_a − y_b|, |z_a − z_b|)` in the lab axes.
pub fn mirror_check(a: &Trajectory, b: &Trajectory) -> Result<f64, TwoSpinError> {
    mirror_check_along(a, b, 0.0)
}

/// Mirror residual in the frame whose x axis lies at angle `line` (the
/// control direction).
pub fn mirror_check_along(a: &Trajectory, b: &Trajectory, line: f64) -> Result<f64, TwoSpinError> {
    if a.len() != b.len() {
        return Err(TwoSpinError::MismatchedGrids(format!("{} vs {} samples", a.len(), b.len())));
    }
    if let Some(i) = a.times.iter().zip(&b.times).position(|(s, t)| s != t) {
        return Err(TwoSpinError::MismatchedGrids(format!("sample {i} differs in time")));
    }
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(&ma, &mb)| {
            let (ma, mb) = if line == 0.0 { (ma, mb) } else { (rotate_z(ma, line), rotate_z(mb, line)) };
            (ma.x + mb.x).abs().max((ma.y - mb.y).abs()).max((ma.z - mb.z).abs())
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub z_final: f64,
    /// `sqrt(x² + y²)` at the end of the pulse.
    pub transverse: f64,
}

/// Final state of a single spin from the north pole on a uniform offset grid.
pub fn robustness_sweep(
    pulse: &Pulse,
    delta_min: f64,
    delta_max: f64,
    n: usize,
    dt: f64,
) -> Result<Vec<SweepRow>, TwoSpinError> {
    if n < 2 {
        return Err(TwoSpinError::SweepTooSmall(n));
    }
    if !(delta_min.is_finite() && delta_max.is_finite()) {
        return Err(TwoSpinError::NonFiniteOffset);
    }
    let (lo, hi) = if delta_min <= delta_max { (delta_min, delta_max) } else { (delta_max, delta_min) };
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let delta = if k == n - 1 { hi } else { lo + k as f64 * step };
            let m = propagate_final(NORTH_POLE, pulse, NormalizedOffset(delta), dt)?;
            Ok(SweepRow { delta, z_final: m.z, transverse: m.x.hypot(m.y) })
        })
        .collect()
}
