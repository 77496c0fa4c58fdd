//! Time-optimal inversion of a single spin by a bang-bang x-axis field.
//!
//! The indirect solver shoots over the initial costate direction and the
//! final time; a direct refinement over switching times covers extremals
//! whose switches are tangential zeros of `Φ`. A grid oracle with exact
//! rotations provides independent ground truth for small switch counts.

mod baseline;
mod linalg;
mod oracle;
mod refine;
mod shooting;

use serde::{Deserialize, Serialize};

use crate::bloch::{
    propagate_segment, Magnetization, NormalizedOffset, Pulse, PulseSegment, Vec3, DEFAULT_DT,
    NORTH_POLE, SOUTH_POLE, U0,
};
use crate::error::SynthesisError;
use crate::pmp::{AdjointState, DEFAULT_MAX_SWITCHES};

pub use baseline::{lift_to_two_controls, pi_pulse_baseline};
pub use oracle::{brute_force_oracle, oracle_search, OracleResult, ORACLE_THRESHOLD};
pub use refine::{refine_switching_times, RefineDiagnostic, Refinement};
pub use shooting::{
    costate_angle, costate_from_angle, shoot, solve_inversion_single, ShotResidual, SolveMethod,
    Solution,
};

/// Alternating `±u_0` bangs along x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BangBangPulse {
    amplitude: f64,
    initial_sign: f64,
    switch_times: Vec<f64>,
    t_f: f64,
}

impl BangBangPulse {
    pub fn new(initial_sign: f64, switch_times: Vec<f64>, t_f: f64) -> Result<Self, SynthesisError> {
        if initial_sign != 1.0 && initial_sign != -1.0 {
            return Err(SynthesisError::InvalidConfig(format!(
                "initial sign must be ±1, got {initial_sign}"
            )));
        }
        if !(t_f.is_finite() && t_f > 0.0) {
            return Err(SynthesisError::InvalidConfig(format!("final time must be positive, got {t_f}")));
        }
        if !ordered(&switch_times, t_f) {
            return Err(SynthesisError::Ordering);
        }
        Ok(Self {
            amplitude: U0,
            initial_sign,
            switch_times,
            t_f,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn initial_sign(&self) -> f64 {
        self.initial_sign
    }

    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn n_switches(&self) -> usize {
        self.switch_times.len()
    }

    pub fn n_bangs(&self) -> usize {
        self.switch_times.len() + 1
    }

    /// `(duration, signed amplitude)` of every bang.
    pub fn bangs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.switch_times.len();
        (0..=n).map(move |k| {
            let start = if k == 0 { 0.0 } else { self.switch_times[k - 1] };
            let end = if k == n { self.t_f } else { self.switch_times[k] };
            let sign = if k % 2 == 0 { self.initial_sign } else { -self.initial_sign };
            (end - start, sign * self.amplitude)
        })
    }

    pub fn to_pulse(&self) -> Pulse {
        let segments = self
            .bangs()
            .map(|(d, u)| PulseSegment::new(d, u, 0.0))
            .collect();
        Pulse::new(segments, None).expect("bang-bang pulse is a valid pulse")
    }

    /// Unknowns `(t_1, ..., t_n, t_f)`.
    pub(crate) fn unknowns(&self) -> Vec<f64> {
        let mut v = self.switch_times.clone();
        v.push(self.t_f);
        v
    }

    pub(crate) fn with_unknowns(&self, v: &[f64]) -> Self {
        let (s, tf) = v.split_at(v.len() - 1);
        Self {
            amplitude: self.amplitude,
            initial_sign: self.initial_sign,
            switch_times: s.to_vec(),
            t_f: tf[0],
        }
    }

    /// Final state from `m0` under fixed-step RK4.
    pub fn final_state(&self, m0: Magnetization, delta: NormalizedOffset, dt: f64) -> Magnetization {
        self.bangs()
            .fold(m0, |m, (d, u)| propagate_segment(m, delta, u, 0.0, d, dt))
    }
}

pub(crate) fn ordered(switch_times: &[f64], t_f: f64) -> bool {
    let mut prev = 0.0;
    for &t in switch_times {
        if !(t > prev) {
            return false;
        }
        prev = t;
    }
    t_f > prev
}

/// Solver tolerances and budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Bound on the terminal residual norm `‖m(t_f) − m_target‖`.
    pub newton_tol: f64,
    pub max_iter: usize,
    pub multistart_count: usize,
    pub dt: f64,
    pub max_switches: usize,
    /// Seeds the azimuthal offset of the multistart grid.
    pub seed: u64,
    /// Step of the coarse scan and of the first Newton pass.
    pub scan_dt: f64,
    /// Scan horizon; defaults to `0.5(1 + |Δ|/2π)` clamped to `[1.25, 2]`.
    pub horizon: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_iter: 100,
            multistart_count: 64,
            dt: DEFAULT_DT,
            max_switches: DEFAULT_MAX_SWITCHES,
            seed: 0,
            scan_dt: 1e-4,
            horizon: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SynthesisError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        pos("newton_tol", self.newton_tol)?;
        pos("dt", self.dt)?;
        pos("scan_dt", self.scan_dt)?;
        if let Some(h) = self.horizon {
            pos("horizon", h)?;
        }
        for (name, v) in [
            ("max_iter", self.max_iter),
            ("multistart_count", self.multistart_count),
            ("max_switches", self.max_switches),
        ] {
            if v == 0 {
                return Err(SynthesisError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn horizon_for(&self, delta: NormalizedOffset) -> f64 {
        self.horizon
            .unwrap_or_else(|| (0.5 * (1.0 + delta.0.abs() / std::f64::consts::TAU)).clamp(1.25, 2.0))
    }
}

/// Boundary-value problem solved by [`shoot`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingProblem {
    pub delta: NormalizedOffset,
    pub start: Magnetization,
    pub target: Magnetization,
    pub costate_guess: AdjointState,
    pub config: SolverConfig,
}

impl ShootingProblem {
    /// North pole to south pole.
    pub fn inversion(delta: NormalizedOffset, config: SolverConfig) -> Self {
        Self {
            delta,
            start: NORTH_POLE,
            target: SOUTH_POLE,
            costate_guess: Vec3::new(0.0, -1.0 / U0, 0.0),
            config,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn bang_bang_validation() {
        assert!(BangBangPulse::new(1.0, vec![0.1, 0.2], 0.3).is_ok());
        assert_eq!(BangBangPulse::new(1.0, vec![0.2, 0.1], 0.3), Err(SynthesisError::Ordering));
        assert_eq!(BangBangPulse::new(1.0, vec![0.1, 0.3], 0.3), Err(SynthesisError::Ordering));
        assert_eq!(BangBangPulse::new(1.0, vec![0.0], 0.3), Err(SynthesisError::Ordering));
        assert!(BangBangPulse::new(0.5, vec![], 0.3).is_err());
        assert!(BangBangPulse::new(1.0, vec![], 0.0).is_err());
    }

    #[test]
    fn to_pulse_alternates() {
        let b = BangBangPulse::new(-1.0, vec![0.1, 0.25], 0.4).unwrap();
        let p = b.to_pulse();
        let segs = p.segments();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].ux, -TAU);
        assert_eq!(segs[1].ux, TAU);
        assert_eq!(segs[2].ux, -TAU);
        assert!((segs[1].duration - 0.15).abs() < 1e-16);
        assert!(segs.iter().all(|s| s.uy == 0.0));
        assert!((p.duration() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn final_state_matches_propagate() {
        let b = BangBangPulse::new(1.0, vec![0.13, 0.29], 0.61).unwrap();
        let d = NormalizedOffset(5.0);
        let a = b.final_state(NORTH_POLE, d, 1e-4);
        let c = crate::bloch::propagate_final(NORTH_POLE, &b.to_pulse(), d, 1e-4).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { dt: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { multistart_count: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let c = SolverConfig::default();
        assert_eq!(c.horizon_for(NormalizedOffset(0.0)), 1.25);
        assert_eq!(c.horizon_for(NormalizedOffset(8.0 * std::f64::consts::PI)), 2.0);
    }
}
