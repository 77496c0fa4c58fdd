use std::f64::consts::{PI, TAU};

use crate::error::BlochError;

use super::pulse::{Pulse, PulseSegment};
use super::vec3::{Magnetization, Vec3};

/// Spherical coordinates on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalState {
    pub r: f64,
    /// Polar angle in `[0, π]`.
    pub theta: f64,
    /// Azimuth in `[0, 2π)`; zero at the poles.
    pub phi: f64,
}

impl SphericalState {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { r: 1.0, theta, phi }
    }
}

/// Frame rotation `R(α)` about z: `(cos α x + sin α y, −sin α x + cos α y, z)`.
///
/// This is the passive change of coordinates; a vector at azimuth `φ` is
/// reported at `φ − α`.
#[inline]
pub fn rotate_z(m: Magnetization, alpha: f64) -> Magnetization {
    let (s, c) = alpha.sin_cos();
    Vec3::new(c * m.x + s * m.y, -s * m.x + c * m.y, m.z)
}

/// Rotates every control vector of `pulse` by `alpha` (counter-clockwise).
///
/// A pulse along x becomes `(u cos α, u sin α)`. The magnetization
/// equivalent is `rotate_z(m, -alpha)`.
pub fn rotate_pulse(pulse: &Pulse, alpha: f64) -> Pulse {
    let (s, c) = alpha.sin_cos();
    let segments = pulse
        .segments()
        .iter()
        .map(|seg| PulseSegment::new(seg.duration, c * seg.ux - s * seg.uy, s * seg.ux + c * seg.uy))
        .collect();
    Pulse::new(segments, pulse.units_hz()).expect("rotation preserves pulse validity")
}

pub fn to_spherical(m: Magnetization) -> Result<SphericalState, BlochError> {
    let r = m.norm();
    if !(r > 0.0) {
        return Err(BlochError::ZeroVector);
    }
    let rho = m.x.hypot(m.y);
    let theta = rho.atan2(m.z);
    let phi = if rho == 0.0 {
        0.0
    } else {
        let p = m.y.atan2(m.x);
        if p < 0.0 {
            // p + 2π can round up to exactly 2π for tiny negative p
            let q = p + TAU;
            if q >= TAU {
                0.0
            } else {
                q
            }
        } else {
            p
        }
    };
    Ok(SphericalState { r, theta, phi })
}

pub fn from_spherical(s: SphericalState) -> Magnetization {
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.phi.sin_cos();
    Vec3::new(s.r * st * cp, s.r * st * sp, s.r * ct)
}

/// `cot θ`, exactly zero at `θ = π/2`.
#[inline]
pub fn cot(theta: f64) -> f64 {
    (PI / 2.0 - theta).tan()
}

/// Local orthonormal frame `(e_θ, e_φ)` at a point with `sin θ ≠ 0`.
pub fn tangent_frame(theta: f64, phi: f64) -> (Vec3, Vec3) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (Vec3::new(ct * cp, ct * sp, -st), Vec3::new(-sp, cp, 0.0))
}
