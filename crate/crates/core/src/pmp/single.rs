//! Single spin driven by one control along x.
//!
//! With `ω = (u, 0, Δ)` both the magnetization and its Cartesian costate obey
//! `ṁ = ω × m`, `ṗ = ω × p`. The switching function is `Φ = p · (e_x × m)`.

use crate::bloch::{rk4_bloch_step, Magnetization, NormalizedOffset, Vec3, U0};
use crate::error::PmpError;

use super::{AdjointState, Axis, SwitchingRecord};

/// Bisection stops once the bracket is narrower than this.
pub const EVENT_TIME_TOL: f64 = 1e-13;
/// Target residual of the switching function at a located zero.
pub const EVENT_PHI_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWITCHES: usize = 64;

/// State and costate of one spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePoint {
    pub m: Magnetization,
    pub p: AdjointState,
    pub delta: NormalizedOffset,
}

impl SinglePoint {
    pub fn new(m: Magnetization, p: AdjointState, delta: NormalizedOffset) -> Self {
        Self { m, p, delta }
    }

    /// North-pole start whose costate makes the maximized Hamiltonian equal
    /// to one. `angle` is the direction of `m × p` in the transverse plane;
    /// the switching function starts at `cos(angle)` up to that scale.
    pub fn north_pole_start(angle: f64, delta: NormalizedOffset) -> Result<Self, PmpError> {
        let (s, c) = angle.sin_cos();
        if c.abs() < 1e-10 {
            return Err(PmpError::DegenerateStart { time: 0.0 });
        }
        let scale = 1.0 / (U0 * c.abs());
        let p = Vec3::new(s, -c, 0.0) * scale;
        Ok(Self::new(Vec3::Z, p, delta))
    }

    /// `p · (e_axis × m)`.
    pub fn switching(&self, axis: Axis) -> f64 {
        switching_value(self.m, self.p, axis)
    }

    /// `p · F` with `F = Δ e_z × m`, i.e. `Δ p_φ`.
    pub fn drift_term(&self) -> f64 {
        self.delta.0 * (self.m.x * self.p.y - self.m.y * self.p.x)
    }

    pub fn pseudo_hamiltonian(&self, u: f64) -> f64 {
        self.drift_term() + u * self.switching(Axis::X)
    }

    /// Hamiltonian maximized over `|u| ≤ u_0`.
    pub fn max_hamiltonian(&self) -> f64 {
        self.drift_term() + U0 * self.switching(Axis::X).abs()
    }

    /// `m × p`; rotates with the same angular velocity as `m` and `p`.
    pub fn angular_momentum(&self) -> Vec3 {
        self.m.cross(self.p)
    }
}

#[inline]
pub(crate) fn switching_value(m: Vec3, p: Vec3, axis: Axis) -> f64 {
    match axis {
        Axis::X => p.z * m.y - p.y * m.z,
        Axis::Y => p.x * m.z - p.z * m.x,
    }
}

/// Hamiltonian vector field for a given control value.
pub fn single_rhs(pt: &SinglePoint, u: f64) -> (Vec3, Vec3) {
    let w = Vec3::new(u, 0.0, pt.delta.0);
    (w.cross(pt.m), w.cross(pt.p))
}

#[inline]
fn step(m: Vec3, p: Vec3, delta: NormalizedOffset, u: f64, h: f64) -> (Vec3, Vec3) {
    (
        rk4_bloch_step(m, delta, u, 0.0, h),
        rk4_bloch_step(p, delta, u, 0.0, h),
    )
}

/// Sampled single-spin extremal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremalArc {
    pub times: Vec<f64>,
    pub states: Vec<Magnetization>,
    pub costates: Vec<AdjointState>,
    /// Control from each sample onward.
    pub controls: Vec<f64>,
    pub switches: Vec<SwitchingRecord>,
}

/// End point and switching history of an integrated extremal.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalEnd {
    pub point: SinglePoint,
    pub initial_sign: f64,
    pub switches: Vec<SwitchingRecord>,
}

/// Integrates the single-spin extremal with `u = u_0 sign Φ` from `pt0` to
/// `t_max`, locating every sign change of `Φ` and flipping the control there.
///
/// `observe` is called with `(t, m, p, u)` at the start and after every
/// accepted step or switch.
pub fn integrate_extremal_with<F>(
    pt0: &SinglePoint,
    t_max: f64,
    dt: f64,
    max_switches: usize,
    mut observe: F,
) -> Result<ExtremalEnd, PmpError>
where
    F: FnMut(f64, Vec3, Vec3, f64),
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(crate::error::BlochError::InvalidStep(dt).into());
    }
    let delta = pt0.delta;
    let (mut m, mut p) = (pt0.m, pt0.p);
    let scale = p.norm().max(f64::MIN_POSITIVE);
    let phi0 = switching_value(m, p, Axis::X);
    if phi0.abs() <= 1e-10 * scale {
        return Err(PmpError::DegenerateStart { time: 0.0 });
    }
    let initial_sign = phi0.signum();
    let mut sigma = initial_sign;
    let mut t = 0.0;
    let mut switches = Vec::new();
    let singular_tol = EVENT_PHI_TOL * scale;
    observe(t, m, p, sigma * U0);

    while t_max - t > 1e-15 {
        let h = if t_max - t > dt * (1.0 + 1e-12) { dt } else { t_max - t };
        let u = sigma * U0;
        let (m1, p1) = step(m, p, delta, u, h);
        let phi1 = switching_value(m1, p1, Axis::X);

        if sigma * phi1 < 0.0 {
            let g = |s: f64| {
                let (ms, ps) = step(m, p, delta, u, s);
                switching_value(ms, ps, Axis::X)
            };
            let (mut lo, mut hi) = (0.0, h);
            let mut g_lo = switching_value(m, p, Axis::X);
            let mut g_hi = phi1;
            while hi - lo > EVENT_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if sigma * gm > 0.0 {
                    lo = mid;
                    g_lo = gm;
                } else {
                    hi = mid;
                    g_hi = gm;
                    if gm == 0.0 {
                        break;
                    }
                }
            }
            // one secant polish inside the bracket; keep the post-switch side
            if g_hi != g_lo {
                let s = lo - g_lo * (hi - lo) / (g_hi - g_lo);
                if s > lo && s < hi {
                    let gs = g(s);
                    if sigma * gs <= 0.0 && gs.abs() < g_hi.abs() {
                        hi = s;
                        g_hi = gs;
                    }
                }
            }
            let (ms, ps) = step(m, p, delta, u, hi);
            m = ms;
            p = ps;
            t += hi;
            switches.push(SwitchingRecord {
                time: t,
                sign_before: sigma,
                sign_after: -sigma,
                phi_value: g_hi.abs(),
            });
            if switches.len() > max_switches {
                return Err(PmpError::Chattering { max_switches, time: t });
            }
            sigma = -sigma;
            observe(t, m, p, sigma * U0);
            continue;
        }

        if phi1.abs() < singular_tol && switching_value(m, p, Axis::X).abs() < singular_tol {
            let (mm, pm) = step(m, p, delta, u, 0.5 * h);
            if switching_value(mm, pm, Axis::X).abs() < singular_tol {
                return Err(PmpError::SingularArc { start: t, end: t + h });
            }
        }
        m = m1;
        p = p1;
        t += h;
        observe(t, m, p, sigma * U0);
    }

    Ok(ExtremalEnd {
        point: SinglePoint::new(m, p, delta),
        initial_sign,
        switches,
    })
}

/// Integrates and samples the extremal; see [`integrate_extremal_with`].
pub fn integrate_extremal(
    pt0: &SinglePoint,
    t_max: f64,
    dt: f64,
    max_switches: usize,
) -> Result<ExtremalArc, PmpError> {
    let mut arc = ExtremalArc::default();
    let end = integrate_extremal_with(pt0, t_max, dt, max_switches, |t, m, p, u| {
        arc.times.push(t);
        arc.states.push(m);
        arc.costates.push(p);
        arc.controls.push(u);
    })?;
    arc.switches = end.switches;
    Ok(arc)
}
