//! Pontryagin extremals for the single-spin/one-control and the
//! two-spin/two-control inversion problems.
//!
//! All costates are Cartesian. Spherical costates `(p_θ, p_φ)` are derived
//! views used for diagnostics and for building initial data.

mod brackets;
mod single;
mod two;

use serde::{Deserialize, Serialize};

use crate::bloch::{tangent_frame, Magnetization, Vec3};
use crate::error::PmpError;

pub use brackets::{
    bracket_f_k, bracket_g_f, bracket_g_k, control_field, drift_field, lie_bracket_fd,
    singular_control, singular_locus_value, LOCUS_TOL,
};
pub use single::{
    integrate_extremal, integrate_extremal_with, single_rhs, ExtremalArc, ExtremalEnd,
    SinglePoint, DEFAULT_MAX_SWITCHES, EVENT_PHI_TOL, EVENT_TIME_TOL,
};
pub use two::{
    canonical_phases, integrate_two_spin_extremal, two_spin_rhs, CanonicalPhase, TwoSpinArc,
    TwoSpinPoint, Q_MIN,
};

/// Cartesian costate conjugate to one magnetization vector.
pub type AdjointState = Vec3;

/// Control axis for switching-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// A located zero of the switching function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingRecord {
    pub time: f64,
    pub sign_before: f64,
    pub sign_after: f64,
    /// `|Φ|` at the located zero.
    pub phi_value: f64,
}

/// Joint state and costate of one or two spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtremalPoint {
    Single(SinglePoint),
    Two(TwoSpinPoint),
}

impl From<SinglePoint> for ExtremalPoint {
    fn from(p: SinglePoint) -> Self {
        ExtremalPoint::Single(p)
    }
}

impl From<TwoSpinPoint> for ExtremalPoint {
    fn from(p: TwoSpinPoint) -> Self {
        ExtremalPoint::Two(p)
    }
}

/// `p · G_axis`, summed over spins in the two-spin case.
pub fn switching_function(pt: &ExtremalPoint, axis: Axis) -> f64 {
    match pt {
        ExtremalPoint::Single(s) => s.switching(axis),
        ExtremalPoint::Two(t) => t.switching(axis),
    }
}

/// `p · (F + u G)` for a single spin driven along x.
pub fn pseudo_hamiltonian_single(pt: &SinglePoint, u: f64) -> f64 {
    pt.pseudo_hamiltonian(u)
}

/// `Δ(p_φa − p_φb) + u_0 sqrt((p·G_x)² + (p·G_y)²)`.
pub fn normal_hamiltonian_two_spin(pt: &TwoSpinPoint) -> Result<f64, PmpError> {
    pt.normal_hamiltonian()
}

/// Maximizing two-spin control of norm exactly `u_0`.
pub fn optimal_controls_two_spin(pt: &TwoSpinPoint) -> Result<(f64, f64), PmpError> {
    pt.optimal_controls()
}

/// Time derivative of an extremal point under the feedback control.
///
/// Fails at `Φ = 0` (single) or on the switching surface (two); those
/// instants are handled by the event logic of the integrators.
pub fn extremal_rhs(pt: &ExtremalPoint) -> Result<ExtremalPoint, PmpError> {
    match pt {
        ExtremalPoint::Single(s) => {
            let phi = s.switching(Axis::X);
            if phi == 0.0 {
                return Err(PmpError::OnSwitchingSurface);
            }
            let (dm, dp) = single_rhs(s, crate::bloch::U0 * phi.signum());
            Ok(ExtremalPoint::Single(SinglePoint::new(dm, dp, s.delta)))
        }
        ExtremalPoint::Two(t) => {
            let u = t.optimal_controls()?;
            Ok(ExtremalPoint::Two(two_spin_rhs(t, u)))
        }
    }
}

/// `p = p_θ e_θ + (p_φ / sin θ) e_φ`.
pub fn cartesian_costate(theta: f64, phi: f64, p_theta: f64, p_phi: f64) -> Result<AdjointState, PmpError> {
    let st = theta.sin();
    if st.abs() < 1e-12 {
        return Err(PmpError::AtPole { theta });
    }
    let (e_t, e_p) = tangent_frame(theta, phi);
    Ok(e_t * p_theta + e_p * (p_phi / st))
}

/// `(p_θ, p_φ)` of a Cartesian costate; `p_φ = x p_y − y p_x`.
pub fn spherical_costate(m: Magnetization, p: AdjointState) -> Result<(f64, f64), PmpError> {
    let s = crate::bloch::to_spherical(m)?;
    if s.theta.sin().abs() < 1e-12 {
        return Err(PmpError::AtPole { theta: s.theta });
    }
    let (e_t, _) = tangent_frame(s.theta, s.phi);
    Ok((p.dot(e_t) * s.r, m.x * p.y - m.y * p.x))
}
