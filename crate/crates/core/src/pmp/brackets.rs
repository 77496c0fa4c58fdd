//! Lie-bracket diagnostics for the single-spin system in the `(θ, φ)` chart.
//!
//! `F = (0, Δ)`, `G = (−sin φ, −cos φ cot θ)`, brackets use
//! `[A, B] = DA·B − DB·A` so that `[G, F] = (−Δ cos φ, Δ sin φ cot θ)`.

use crate::bloch::{cot, NormalizedOffset, SphericalState};
use crate::error::PmpError;

/// Distance from `θ = π/2` accepted as lying on the singular locus.
pub const LOCUS_TOL: f64 = 1e-9;

pub fn drift_field(delta: f64, _theta: f64, _phi: f64) -> [f64; 2] {
    [0.0, delta]
}

pub fn control_field(theta: f64, phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [-s, -c * cot(theta)]
}

/// `K = [G, F]`.
pub fn bracket_g_f(delta: f64, theta: f64, phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [-delta * c, delta * s * cot(theta)]
}

/// `[G, K]`.
pub fn bracket_g_k(delta: f64, _theta: f64, _phi: f64) -> [f64; 2] {
    [0.0, -delta]
}

/// `[F, K]`.
pub fn bracket_f_k(delta: f64, theta: f64, phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    let d2 = delta * delta;
    [-d2 * s, -d2 * c * cot(theta)]
}

/// Central-difference `[A, B] = DA·B − DB·A` at `x`.
pub fn lie_bracket_fd<A, B>(a: A, b: B, x: [f64; 2], h: f64) -> [f64; 2]
where
    A: Fn([f64; 2]) -> [f64; 2],
    B: Fn([f64; 2]) -> [f64; 2],
{
    let jac = |f: &dyn Fn([f64; 2]) -> [f64; 2]| {
        let mut j = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (f(xp), f(xm));
            for i in 0..2 {
                j[i][k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    };
    let (ja, jb) = (jac(&a), jac(&b));
    let (va, vb) = (a(x), b(x));
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = ja[i][0] * vb[0] + ja[i][1] * vb[1] - jb[i][0] * va[0] - jb[i][1] * va[1];
    }
    out
}

fn check_pole(theta: f64) -> Result<(), PmpError> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) || theta.sin() < 1e-12 {
        return Err(PmpError::AtPole { theta });
    }
    Ok(())
}

/// `det(G, [G, F])`, which reduces to `−Δ cot θ`.
pub fn singular_locus_value(s: SphericalState, delta: NormalizedOffset) -> Result<f64, PmpError> {
    check_pole(s.theta)?;
    let g = control_field(s.theta, s.phi);
    let k = bracket_g_f(delta.0, s.theta, s.phi);
    Ok(g[0] * k[1] - g[1] * k[0])
}

/// Singular feedback on the equator.
///
/// With `λ ⟂ G` the covector annihilating `G` and `[G, F]` on the locus,
/// solves `λ·[F, K] + u λ·[G, K] = 0`.
pub fn singular_control(s: SphericalState, delta: NormalizedOffset) -> Result<f64, PmpError> {
    check_pole(s.theta)?;
    if (s.theta - std::f64::consts::FRAC_PI_2).abs() > LOCUS_TOL {
        return Err(PmpError::OffSingularLocus { theta: s.theta });
    }
    let g = control_field(s.theta, s.phi);
    let lambda = [-g[1], g[0]];
    let fk = bracket_f_k(delta.0, s.theta, s.phi);
    let gk = bracket_g_k(delta.0, s.theta, s.phi);
    let num = lambda[0] * fk[0] + lambda[1] * fk[1];
    let den = lambda[0] * gk[0] + lambda[1] * gk[1];
    if den.abs() < 1e-12 * (1.0 + delta.0.abs()) {
        return Err(PmpError::DegenerateBrackets);
    }
    Ok(-num / den + 0.0)
}
