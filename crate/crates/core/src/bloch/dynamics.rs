use crate::error::BlochError;

use super::pulse::{Pulse, AMPLITUDE_SLACK, U0};
use super::vec3::{Magnetization, Vec3};

/// Normalized chemical-shift offset `Δ = 2πω/ω_max`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct NormalizedOffset(pub f64);

impl NormalizedOffset {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for NormalizedOffset {
    fn from(v: f64) -> Self {
        NormalizedOffset(v)
    }
}

/// Default integration step in normalized time.
pub const DEFAULT_DT: f64 = 1e-5;

/// Right-hand side of the normalized Bloch equation without relaxation.
///
/// Equal to `ω × m` with `ω = (u_x, u_y, Δ)`, so the result is orthogonal to `m`.
#[inline]
pub fn bloch_rhs(m: Magnetization, delta: NormalizedOffset, ux: f64, uy: f64) -> Vec3 {
    let d = delta.0;
    Vec3::new(
        -d * m.y + uy * m.z,
        d * m.x - ux * m.z,
        ux * m.y - uy * m.x,
    )
}

/// One classical RK4 step for a constant control.
#[inline]
pub fn rk4_bloch_step(m: Magnetization, delta: NormalizedOffset, ux: f64, uy: f64, h: f64) -> Vec3 {
    let k1 = bloch_rhs(m, delta, ux, uy);
    let k2 = bloch_rhs(m + k1 * (0.5 * h), delta, ux, uy);
    let k3 = bloch_rhs(m + k2 * (0.5 * h), delta, ux, uy);
    let k4 = bloch_rhs(m + k3 * h, delta, ux, uy);
    m + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// One classical RK4 step for an autonomous system on a fixed-size state.
#[inline]
pub fn rk4_step<const N: usize, F>(y: &[f64; N], h: f64, f: F) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

/// Splits `duration` into steps of at most `dt`; the last step is clipped.
pub(crate) fn step_plan(duration: f64, dt: f64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let full = (duration / dt).floor();
    let mut n = full as usize;
    let mut rem = duration - full * dt;
    // a remainder within rounding of a full step is folded into the count
    if rem > dt * (1.0 - 1e-12) {
        n += 1;
        rem = 0.0;
    }
    if rem < dt * 1e-12 {
        rem = 0.0;
    }
    (n, rem)
}

/// Time-stamped samples of a simulated magnetization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Magnetization>,
    /// Control active from each sample onward (half-open convention).
    pub controls: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<Magnetization> {
        self.states.last().copied()
    }

    /// Largest deviation of `‖m(t)‖` from one.
    pub fn norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|m| (m.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn check_inputs(pulse: &Pulse, dt: f64) -> Result<(), BlochError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(BlochError::InvalidStep(dt));
    }
    for (index, s) in pulse.segments().iter().enumerate() {
        let amplitude = s.amplitude();
        if !(amplitude <= U0 + AMPLITUDE_SLACK) {
            return Err(BlochError::AmplitudeBound { index, amplitude });
        }
    }
    Ok(())
}

/// Integrates the Bloch equation through `pulse` with fixed-step RK4.
///
/// Segment boundaries are always sample points; inside a segment the step is
/// `dt` except for a clipped final step.
pub fn propagate(
    m0: Magnetization,
    pulse: &Pulse,
    delta: NormalizedOffset,
    dt: f64,
) -> Result<Trajectory, BlochError> {
    check_inputs(pulse, dt)?;
    let estimate = (pulse.duration() / dt).ceil() as usize + pulse.segments().len() + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(estimate),
        states: Vec::with_capacity(estimate),
        controls: Vec::with_capacity(estimate),
    };
    let mut m = m0;
    let mut t0 = 0.0;
    for seg in pulse.segments() {
        let (n, rem) = step_plan(seg.duration, dt);
        for k in 0..n {
            traj.times.push(t0 + k as f64 * dt);
            traj.states.push(m);
            traj.controls.push((seg.ux, seg.uy));
            m = rk4_bloch_step(m, delta, seg.ux, seg.uy, dt);
        }
        if rem > 0.0 {
            traj.times.push(t0 + n as f64 * dt);
            traj.states.push(m);
            traj.controls.push((seg.ux, seg.uy));
            m = rk4_bloch_step(m, delta, seg.ux, seg.uy, rem);
        }
        t0 += seg.duration;
    }
    let last = pulse.segments().last().map(|s| (s.ux, s.uy)).unwrap_or((0.0, 0.0));
    traj.times.push(t0);
    traj.states.push(m);
    traj.controls.push(last);
    Ok(traj)
}

/// Same integration as [`propagate`] but only returns the final state.
pub fn propagate_final(
    m0: Magnetization,
    pulse: &Pulse,
    delta: NormalizedOffset,
    dt: f64,
) -> Result<Magnetization, BlochError> {
    check_inputs(pulse, dt)?;
    let mut m = m0;
    for seg in pulse.segments() {
        m = propagate_segment(m, delta, seg.ux, seg.uy, seg.duration, dt);
    }
    Ok(m)
}

/// Integrates one constant-control interval of length `duration`.
pub(crate) fn propagate_segment(
    mut m: Magnetization,
    delta: NormalizedOffset,
    ux: f64,
    uy: f64,
    duration: f64,
    dt: f64,
) -> Magnetization {
    let (n, rem) = step_plan(duration, dt);
    for _ in 0..n {
        m = rk4_bloch_step(m, delta, ux, uy, dt);
    }
    if rem > 0.0 {
        m = rk4_bloch_step(m, delta, ux, uy, rem);
    }
    m
}
