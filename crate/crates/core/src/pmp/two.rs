//! Two uncoupled spins with offsets `+Δ` (a) and `−Δ` (b) driven by the
//! same two-component control of norm at most `u_0`.

use crate::bloch::{rk4_step, to_spherical, Magnetization, NormalizedOffset, Vec3, U0};
use crate::error::{BlochError, PmpError};

use super::single::{switching_value, SinglePoint, EVENT_PHI_TOL, EVENT_TIME_TOL};
use super::{cartesian_costate, AdjointState, Axis, SwitchingRecord};

/// Initial costates with `Q = c_x² + c_y²` below this are rejected.
pub const Q_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinPoint {
    pub ma: Magnetization,
    pub pa: AdjointState,
    pub mb: Magnetization,
    pub pb: AdjointState,
    /// Offset of spin a; spin b sees `−Δ`.
    pub delta: NormalizedOffset,
}

impl TwoSpinPoint {
    pub fn new(ma: Vec3, pa: Vec3, mb: Vec3, pb: Vec3, delta: NormalizedOffset) -> Self {
        Self { ma, pa, mb, pb, delta }
    }

    /// Builds a point from `(θ, φ, p_θ, p_φ)` for each spin.
    pub fn from_spherical(
        a: (f64, f64, f64, f64),
        b: (f64, f64, f64, f64),
        delta: NormalizedOffset,
    ) -> Result<Self, PmpError> {
        let sph = |(th, ph, pt, pp): (f64, f64, f64, f64)| -> Result<(Vec3, Vec3), PmpError> {
            let m = crate::bloch::from_spherical(crate::bloch::SphericalState::new(th, ph));
            Ok((m, cartesian_costate(th, ph, pt, pp)?))
        };
        let (ma, pa) = sph(a)?;
        let (mb, pb) = sph(b)?;
        Ok(Self::new(ma, pa, mb, pb, delta))
    }

    /// Spin b as the x-mirror of a single-spin point: `(x, p_x) → (−x, −p_x)`.
    ///
    /// This subspace is invariant under controls along x and carries the
    /// single-spin extremal with `p_φ+ = 0` exactly.
    pub fn mirror_lift(s: &SinglePoint) -> Self {
        let flip = |v: Vec3| Vec3::new(-v.x, v.y, v.z);
        Self::new(s.m, s.p, flip(s.m), flip(s.p), s.delta)
    }

    /// `p · G_axis` summed over both spins.
    pub fn switching(&self, axis: Axis) -> f64 {
        switching_value(self.ma, self.pa, axis) + switching_value(self.mb, self.pb, axis)
    }

    pub fn control_projections(&self) -> (f64, f64) {
        (self.switching(Axis::X), self.switching(Axis::Y))
    }

    pub fn q(&self) -> f64 {
        let (cx, cy) = self.control_projections();
        cx * cx + cy * cy
    }

    pub fn p_phi_a(&self) -> f64 {
        self.ma.x * self.pa.y - self.ma.y * self.pa.x
    }

    pub fn p_phi_b(&self) -> f64 {
        self.mb.x * self.pb.y - self.mb.y * self.pb.x
    }

    /// Cartesian form of `p_φ+ = (p_φa + p_φb) / 2`.
    pub fn p_phi_plus(&self) -> f64 {
        0.5 * (self.p_phi_a() + self.p_phi_b())
    }

    /// Maximized Hamiltonian for controls of norm `u_0 = 2π`.
    pub fn normal_hamiltonian(&self) -> Result<f64, PmpError> {
        self.normal_hamiltonian_with_amplitude(U0)
    }

    /// `Δ(p_φa − p_φb) + amplitude · sqrt(Q)`; constant along extremals
    /// whose controls have norm `amplitude`.
    pub fn normal_hamiltonian_with_amplitude(&self, amplitude: f64) -> Result<f64, PmpError> {
        let (cx, cy) = self.control_projections();
        if cx == 0.0 && cy == 0.0 {
            return Err(PmpError::OnSwitchingSurface);
        }
        Ok(self.delta.0 * (self.p_phi_a() - self.p_phi_b()) + amplitude * cx.hypot(cy))
    }

    pub fn optimal_controls(&self) -> Result<(f64, f64), PmpError> {
        let (cx, cy) = self.control_projections();
        let n = cx.hypot(cy);
        if n == 0.0 {
            return Err(PmpError::OnSwitchingSurface);
        }
        Ok((U0 * cx / n, U0 * cy / n))
    }

    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, v) in [self.ma, self.pa, self.mb, self.pb].iter().enumerate() {
            out[3 * k..3 * k + 3].copy_from_slice(&v.to_array());
        }
        out
    }

    pub fn from_array(y: &[f64; 12], delta: NormalizedOffset) -> Self {
        let v = |k: usize| Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
        Self::new(v(0), v(1), v(2), v(3), delta)
    }

    fn costate_scale(&self) -> f64 {
        self.pa.norm().max(self.pb.norm()).max(f64::MIN_POSITIVE)
    }
}

/// Hamiltonian vector field for a fixed control `(u_x, u_y)`.
pub fn two_spin_rhs(pt: &TwoSpinPoint, u: (f64, f64)) -> TwoSpinPoint {
    let wa = Vec3::new(u.0, u.1, pt.delta.0);
    let wb = Vec3::new(u.0, u.1, -pt.delta.0);
    TwoSpinPoint::new(wa.cross(pt.ma), wa.cross(pt.pa), wb.cross(pt.mb), wb.cross(pt.pb), pt.delta)
}

/// `φ± = φ_a ± φ_b` and `p_φ± = (p_φa ± p_φb) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalPhase {
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub p_phi_plus: f64,
    pub p_phi_minus: f64,
}

impl CanonicalPhase {
    pub fn p_phi_a(&self) -> f64 {
        self.p_phi_plus + self.p_phi_minus
    }

    pub fn p_phi_b(&self) -> f64 {
        self.p_phi_plus - self.p_phi_minus
    }
}

/// Azimuths are zero at the poles; momenta use the Cartesian form, which
/// stays finite there.
pub fn canonical_phases(pt: &TwoSpinPoint) -> Result<CanonicalPhase, PmpError> {
    let a = to_spherical(pt.ma)?;
    let b = to_spherical(pt.mb)?;
    let (pa, pb) = (pt.p_phi_a(), pt.p_phi_b());
    Ok(CanonicalPhase {
        phi_plus: a.phi + b.phi,
        phi_minus: a.phi - b.phi,
        p_phi_plus: 0.5 * (pa + pb),
        p_phi_minus: 0.5 * (pa - pb),
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoSpinArc {
    pub times: Vec<f64>,
    pub points: Vec<TwoSpinPoint>,
    pub controls: Vec<(f64, f64)>,
    pub switches: Vec<SwitchingRecord>,
}

fn feedback(pt: &TwoSpinPoint, dir: (f64, f64)) -> (f64, f64) {
    let (cx, cy) = pt.control_projections();
    let n = cx.hypot(cy);
    if n > 0.0 && cx * dir.0 + cy * dir.1 > 0.0 {
        (U0 * cx / n, U0 * cy / n)
    } else {
        (U0 * dir.0, U0 * dir.1)
    }
}

fn step(pt: &TwoSpinPoint, dir: (f64, f64), h: f64) -> TwoSpinPoint {
    let delta = pt.delta;
    let y = rk4_step(&pt.to_array(), h, |y| {
        let q = TwoSpinPoint::from_array(y, delta);
        two_spin_rhs(&q, feedback(&q, dir)).to_array()
    });
    TwoSpinPoint::from_array(&y, delta)
}

fn along(pt: &TwoSpinPoint, dir: (f64, f64)) -> f64 {
    let (cx, cy) = pt.control_projections();
    cx * dir.0 + cy * dir.1
}

/// Integrates the two-spin extremal with the maximizing control.
///
/// The control follows `u_0 c/|c|` with `c = (p·G_x, p·G_y)`. When `c`
/// passes through zero the control direction reverses; the crossing is
/// located by bisection like the single-spin switching events.
pub fn integrate_two_spin_extremal(
    pt0: &TwoSpinPoint,
    t_max: f64,
    dt: f64,
    max_switches: usize,
) -> Result<TwoSpinArc, PmpError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(BlochError::InvalidStep(dt).into());
    }
    let scale = pt0.costate_scale();
    if pt0.q() < Q_MIN * scale * scale {
        return Err(PmpError::DegenerateStart { time: 0.0 });
    }
    let mut pt = *pt0;
    let (cx, cy) = pt.control_projections();
    let n = cx.hypot(cy);
    let mut dir = (cx / n, cy / n);
    let mut t = 0.0;
    let mut arc = TwoSpinArc::default();
    let singular_tol = EVENT_PHI_TOL * scale;
    let record = |arc: &mut TwoSpinArc, t: f64, p: TwoSpinPoint, dir| {
        arc.times.push(t);
        arc.points.push(p);
        arc.controls.push(feedback(&p, dir));
    };
    record(&mut arc, t, pt, dir);

    while t_max - t > 1e-15 {
        let (cx, cy) = pt.control_projections();
        let n = cx.hypot(cy);
        if n > singular_tol && cx * dir.0 + cy * dir.1 > 0.0 {
            dir = (cx / n, cy / n);
        }
        let h = if t_max - t > dt * (1.0 + 1e-12) { dt } else { t_max - t };
        let p1 = step(&pt, dir, h);
        let g1 = along(&p1, dir);
        if g1 < 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            let mut g_hi = g1;
            while hi - lo > EVENT_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let gm = along(&step(&pt, dir, mid), dir);
                if gm > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    g_hi = gm;
                    if gm == 0.0 {
                        break;
                    }
                }
            }
            pt = step(&pt, dir, hi);
            t += hi;
            arc.switches.push(SwitchingRecord {
                time: t,
                sign_before: 1.0,
                sign_after: -1.0,
                phi_value: g_hi.abs(),
            });
            if arc.switches.len() > max_switches {
                return Err(PmpError::Chattering { max_switches, time: t });
            }
            dir = (-dir.0, -dir.1);
            record(&mut arc, t, pt, dir);
            continue;
        }
        if p1.q().sqrt() < singular_tol && pt.q().sqrt() < singular_tol {
            let mid = step(&pt, dir, 0.5 * h);
            if mid.q().sqrt() < singular_tol {
                return Err(PmpError::SingularArc { start: t, end: t + h });
            }
        }
        pt = p1;
        t += h;
        record(&mut arc, t, pt, dir);
    }
    Ok(arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmp::integrate_extremal;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn normal_hamiltonian_examples() {
        let d = NormalizedOffset(1.0);
        let pt = TwoSpinPoint::from_spherical((FRAC_PI_2, 0.7, 1.0, 0.0), (FRAC_PI_2, 0.7, 1.0, 0.0), d).unwrap();
        assert!((pt.q() - 4.0).abs() < 1e-14);
        assert!((pt.normal_hamiltonian_with_amplitude(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((pt.normal_hamiltonian().unwrap() - 2.0 * TAU).abs() < 1e-13);
        let pt = TwoSpinPoint::from_spherical((FRAC_PI_2, 0.7, 1.0, 0.5), (FRAC_PI_2, 0.7, 0.0, -0.5), d).unwrap();
        assert!((pt.normal_hamiltonian_with_amplitude(1.0).unwrap() - 2.0).abs() < 1e-14);
        let z = TwoSpinPoint::new(Vec3::Z, Vec3::Z, Vec3::Z, Vec3::Z, d);
        assert_eq!(z.normal_hamiltonian(), Err(PmpError::OnSwitchingSurface));
        assert_eq!(z.optimal_controls(), Err(PmpError::OnSwitchingSurface));
    }

    #[test]
    fn control_normalization() {
        // spin a alone contributes c = (3, 4)
        let ma = Vec3::Z;
        let pa = Vec3::new(4.0, -3.0, 0.0);
        let pt = TwoSpinPoint::new(ma, pa, Vec3::Z, Vec3::ZERO, NormalizedOffset(0.0));
        assert_eq!(pt.control_projections(), (3.0, 4.0));
        let (ux, uy) = pt.optimal_controls().unwrap();
        assert!((ux - TAU * 0.6).abs() < 1e-15 && (uy - TAU * 0.8).abs() < 1e-15);
        assert!((ux.hypot(uy) - TAU).abs() < 1e-15);
        let pt = TwoSpinPoint::new(ma, Vec3::new(0.0, -2.0, 0.0), Vec3::Z, Vec3::ZERO, NormalizedOffset(0.0));
        assert_eq!(pt.optimal_controls().unwrap(), (TAU, 0.0));
    }

    #[test]
    fn canonical_phase_examples() {
        let d = NormalizedOffset(1.0);
        let pt = TwoSpinPoint::from_spherical((1.0, 0.4, 0.3, 0.2), (2.0, 0.4, -0.1, 0.5), d).unwrap();
        let c = canonical_phases(&pt).unwrap();
        assert!((c.phi_plus - 0.8).abs() < 1e-15);
        assert!(c.phi_minus.abs() < 1e-15);
        assert!((c.p_phi_a() - pt.p_phi_a()).abs() < 1e-15);
        assert!((c.p_phi_b() - pt.p_phi_b()).abs() < 1e-15);
        let s = SinglePoint::north_pole_start(2.0, d).unwrap();
        let c = canonical_phases(&TwoSpinPoint::mirror_lift(&s)).unwrap();
        assert_eq!((c.p_phi_plus, c.p_phi_minus), (0.0, 0.0));
    }

    #[test]
    fn lifted_extremal_matches_single_spin() {
        let d = NormalizedOffset(8.0 * PI);
        let s = SinglePoint::north_pole_start(2.9, d).unwrap();
        let single = integrate_extremal(&s, 0.8, 1e-4, 64).unwrap();
        let two = integrate_two_spin_extremal(&TwoSpinPoint::mirror_lift(&s), 0.8, 1e-4, 64).unwrap();
        assert_eq!(single.switches.len(), two.switches.len());
        for (a, b) in single.switches.iter().zip(&two.switches) {
            assert!((a.time - b.time).abs() < 1e-10);
        }
        let end = two.points.last().unwrap();
        assert!(end.ma.max_abs_diff(*single.states.last().unwrap()) < 1e-8);
        let h0 = two.points[0].normal_hamiltonian().unwrap();
        assert!((h0 - 2.0).abs() < 1e-14);
        for (p, &u) in two.points.iter().zip(&two.controls) {
            assert_eq!(p.p_phi_plus(), 0.0);
            assert_eq!(u.1, 0.0);
            assert!((p.normal_hamiltonian().unwrap() - h0).abs() < 1e-6);
        }
    }

    #[test]
    fn symmetry_subspace_is_invariant() {
        // θ_a = θ_b, p_θa = p_θb, φ_b = −φ_a, p_φb = −p_φa
        let d = NormalizedOffset(3.0);
        let pt = TwoSpinPoint::from_spherical((0.6, 0.5, 0.8, 0.3), (0.6, TAU - 0.5, 0.8, -0.3), d).unwrap();
        let arc = integrate_two_spin_extremal(&pt, 1.0, 1e-4, 64).unwrap();
        let worst = arc
            .points
            .iter()
            .map(|p| {
                let (a, b) = (p.ma, p.mb);
                let (qa, qb) = (p.pa, p.pb);
                [a.x - b.x, a.y + b.y, a.z - b.z, qa.x - qb.x, qa.y + qb.y, qa.z - qb.z]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "violation {worst}");
    }

    #[test]
    fn generic_extremal_conserves_invariants() {
        let d = NormalizedOffset(2.0);
        let pt = TwoSpinPoint::from_spherical((0.7, 0.2, 0.5, 0.3), (1.9, 2.5, -0.4, 0.6), d).unwrap();
        let arc = integrate_two_spin_extremal(&pt, 1.0, 1e-4, 64).unwrap();
        let h0 = pt.normal_hamiltonian().unwrap();
        let pp0 = pt.p_phi_plus();
        for p in &arc.points {
            assert!((p.normal_hamiltonian().unwrap() - h0).abs() < 1e-8);
            assert!((p.p_phi_plus() - pp0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_small_q() {
        let pt = TwoSpinPoint::new(Vec3::Z, Vec3::Z, Vec3::Z, Vec3::Z, NormalizedOffset(1.0));
        assert!(matches!(
            integrate_two_spin_extremal(&pt, 1.0, 1e-4, 64),
            Err(PmpError::DegenerateStart { .. })
        ));
    }
}
