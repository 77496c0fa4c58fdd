use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{Magnetization, NormalizedOffset, Vec3, NORTH_POLE, SOUTH_POLE};
use crate::error::SynthesisError;
use crate::pmp::{integrate_extremal_with, AdjointState, SinglePoint};

use super::linalg::damped_normal_solve;
use super::refine::refine_switching_times;
use super::{BangBangPulse, ShootingProblem, SolverConfig};

const FD_STEP: f64 = 1e-7;
/// Local minima of `1 + z` below this seed a Newton run.
const SEED_GAP: f64 = 0.5;
/// Seeds for direct refinement must come this close to the south pole.
const DIRECT_GAP: f64 = 0.1;
const DIRECT_LIMIT: usize = 8;
const COARSE_TOL: f64 = 1e-8;
const TIE_TOL: f64 = 1e-9;

/// Normalized costate at the north pole for direction angle `a`.
pub fn costate_from_angle(a: f64, delta: NormalizedOffset) -> Result<AdjointState, SynthesisError> {
    Ok(SinglePoint::north_pole_start(a, delta)?.p)
}

/// Inverse of [`costate_from_angle`] up to scale.
pub fn costate_angle(p: AdjointState) -> f64 {
    p.x.atan2(-p.y)
}

/// Outcome of one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotResidual {
    pub final_state: Magnetization,
    /// `m(t_f) − m_target`; on the sphere only two components are
    /// independent near the target.
    pub residual: [f64; 3],
    pub initial_sign: f64,
    pub switch_times: Vec<f64>,
}

impl ShotResidual {
    pub fn norm(&self) -> f64 {
        self.residual.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    pub fn transverse(&self) -> [f64; 2] {
        [self.residual[0], self.residual[1]]
    }
}

/// Integrates the extremal from `problem.start` with costate `p0` up to `tf`.
pub fn shoot(problem: &ShootingProblem, p0: AdjointState, tf: f64) -> Result<ShotResidual, SynthesisError> {
    let pt = SinglePoint::new(problem.start, p0, problem.delta);
    shot(&pt, problem.target, tf, problem.config.dt, problem.config.max_switches)
}

fn shot(pt: &SinglePoint, target: Vec3, tf: f64, dt: f64, max_switches: usize) -> Result<ShotResidual, SynthesisError> {
    if !(tf.is_finite() && tf > 0.0) {
        return Err(SynthesisError::InvalidConfig(format!("final time must be positive, got {tf}")));
    }
    let end = integrate_extremal_with(pt, tf, dt, max_switches, |_, _, _, _| {})?;
    let m = end.point.m;
    let r = m - target;
    Ok(ShotResidual {
        final_state: m,
        residual: [r.x, r.y, r.z],
        initial_sign: end.initial_sign,
        switch_times: end.switches.iter().map(|s| s.time).collect(),
    })
}

fn shot_angle(d: NormalizedOffset, a: f64, t: f64, dt: f64, max_sw: usize) -> Result<ShotResidual, SynthesisError> {
    let pt = SinglePoint::north_pole_start(a, d)?;
    shot(&pt, SOUTH_POLE, t, dt, max_sw)
}

/// How the returned pulse was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    /// Newton shooting on the initial costate and final time.
    Indirect,
    /// Switching-time refinement seeded from a near-miss extremal.
    Direct,
}

/// Result of [`solve_inversion_single`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub pulse: BangBangPulse,
    pub residual_norm: f64,
    /// Forward-simulated final state at the configured step.
    pub final_state: Magnetization,
    /// Distinct solutions whose `t_f` lies within `1e-9` of the optimum.
    pub multiplicity: usize,
    pub method: SolveMethod,
    /// Costate direction angle of the winning extremal.
    pub costate_angle: Option<f64>,
    pub start_index: usize,
    pub attempts: usize,
    pub converged: usize,
}

#[derive(Debug, Clone)]
struct Seed {
    start: usize,
    angle: f64,
    time: f64,
    gap: f64,
    initial_sign: f64,
    switches: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Candidate {
    start: usize,
    angle: Option<f64>,
    pulse: BangBangPulse,
    residual_norm: f64,
    final_state: Vec3,
    method: SolveMethod,
}

fn start_angles(config: &SolverConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let offset: f64 = rng.random();
    let n = config.multistart_count as f64;
    (0..config.multistart_count)
        .map(|k| std::f64::consts::TAU * (k as f64 + offset) / n)
        .collect()
}

fn scan(delta: NormalizedOffset, start: usize, angle: f64, horizon: f64, config: &SolverConfig) -> Vec<Seed> {
    let Ok(pt) = SinglePoint::north_pole_start(angle, delta) else {
        return Vec::new();
    };
    let mut seeds = Vec::new();
    let mut switches = Vec::new();
    let mut initial_sign = 0.0;
    let mut last_u = 0.0;
    let mut hist: [(f64, f64); 2] = [(f64::NAN, f64::INFINITY); 2];
    let _ = integrate_extremal_with(&pt, horizon, config.scan_dt, config.max_switches, |t, m, _, u| {
        if initial_sign == 0.0 {
            initial_sign = u.signum();
        } else if u != last_u {
            switches.push(t);
        }
        last_u = u;
        let gap = 1.0 + m.z;
        let (t1, g1) = hist[1];
        if g1 < hist[0].1 && g1 <= gap && g1 < SEED_GAP {
            seeds.push(Seed {
                start,
                angle,
                time: t1,
                gap: g1,
                initial_sign,
                switches: switches.iter().copied().filter(|&s| s < t1).collect(),
            });
        }
        hist = [hist[1], (t, gap)];
    });
    seeds
}

#[derive(Debug, Clone)]
struct NewtonOutcome {
    angle: f64,
    time: f64,
    shot: Option<ShotResidual>,
    norm: f64,
}

fn newton(delta: NormalizedOffset, a0: f64, t0: f64, dt: f64, tol: f64, max_iter: usize, max_sw: usize) -> NewtonOutcome {
    let mut a = a0;
    let mut t = t0;
    let mut cur = match shot_angle(delta, a, t, dt, max_sw) {
        Ok(s) => s,
        Err(_) => return NewtonOutcome { angle: a, time: t, shot: None, norm: f64::INFINITY },
    };
    let mut norm = cur.norm();
    let mut mu = 1e-3;
    for _ in 0..max_iter {
        if norm < tol {
            break;
        }
        let (Ok(ra), Ok(rt)) = (
            shot_angle(delta, a + FD_STEP, t, dt, max_sw),
            shot_angle(delta, a, t + FD_STEP, dt, max_sw),
        ) else {
            break;
        };
        let j = DMatrix::from_fn(3, 2, |i, c| {
            let r = if c == 0 { &ra } else { &rt };
            (r.residual[i] - cur.residual[i]) / FD_STEP
        });
        let r = DVector::from_column_slice(&cur.residual);
        let rhs = -(j.transpose() * &r);
        let mut accepted = false;
        while mu < 1e10 {
            let Some(s) = damped_normal_solve(&j, &rhs, 1.0, mu, 1e-12) else {
                mu *= 4.0;
                continue;
            };
            // trust region in (angle, time)
            let scale = (s[0].abs() / 0.2).max(s[1].abs() / 0.05).max(1.0);
            let (na, nt) = (a + s[0] / scale, t + s[1] / scale);
            if nt > 0.0 {
                if let Ok(trial) = shot_angle(delta, na, nt, dt, max_sw) {
                    let tn = trial.norm();
                    if tn < norm {
                        a = na;
                        t = nt;
                        cur = trial;
                        norm = tn;
                        mu = (mu / 3.0).max(1e-12);
                        accepted = true;
                        break;
                    }
                }
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome { angle: a, time: t, shot: Some(cur), norm }
}

fn same_pulse(a: &BangBangPulse, b: &BangBangPulse, tol: f64) -> bool {
    a.initial_sign() == b.initial_sign()
        && a.n_switches() == b.n_switches()
        && (a.t_f() - b.t_f()).abs() < tol
        && a.switch_times().iter().zip(b.switch_times()).all(|(x, y)| (x - y).abs() < tol)
}

fn to_candidate(
    delta: NormalizedOffset,
    start: usize,
    angle: Option<f64>,
    pulse: BangBangPulse,
    method: SolveMethod,
    config: &SolverConfig,
) -> Candidate {
    let final_state = pulse.final_state(NORTH_POLE, delta, config.dt);
    Candidate {
        start,
        angle,
        residual_norm: (final_state - SOUTH_POLE).norm(),
        final_state,
        pulse,
        method,
    }
}

/// Multistart indirect shooting with direct refinement of near misses.
///
/// Returns the feasible pulse of smallest `t_f`; ties within `1e-9` are broken
/// by start index and counted in `multiplicity`.
pub fn solve_inversion_single(delta: NormalizedOffset, config: &SolverConfig) -> Result<Solution, SynthesisError> {
    if !delta.0.is_finite() {
        return Err(SynthesisError::InvalidOffset(delta.0));
    }
    config.validate()?;
    let horizon = config.horizon_for(delta);
    let angles = start_angles(config);
    let seeds: Vec<Seed> = angles
        .par_iter()
        .enumerate()
        .map(|(k, &a)| scan(delta, k, a, horizon, config))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let attempts = seeds.len();
    if seeds.is_empty() {
        return Err(SynthesisError::NoConvergence { best_residual: f64::INFINITY, attempts: 0 });
    }

    let coarse_tol = COARSE_TOL.max(config.newton_tol);
    let coarse: Vec<NewtonOutcome> = seeds
        .par_iter()
        .map(|s| newton(delta, s.angle, s.time, config.scan_dt, coarse_tol, config.max_iter, config.max_switches))
        .collect();
    let mut best_residual = coarse.iter().map(|o| o.norm).fold(f64::INFINITY, f64::min);

    // keep one coarse solution per distinct bang structure
    let mut unique: Vec<(usize, &NewtonOutcome, BangBangPulse)> = Vec::new();
    for (seed, out) in seeds.iter().zip(&coarse) {
        let Some(shot) = out.shot.as_ref().filter(|_| out.norm < 1e-6) else {
            continue;
        };
        let Ok(p) = BangBangPulse::new(shot.initial_sign, shot.switch_times.clone(), out.time) else {
            continue;
        };
        if !unique.iter().any(|(_, _, q)| same_pulse(q, &p, 1e-6)) {
            unique.push((seed.start, out, p));
        }
    }

    let polished: Vec<Option<Candidate>> = unique
        .par_iter()
        .map(|(start, out, _)| {
            let fine = newton(delta, out.angle, out.time, config.dt, config.newton_tol, config.max_iter, config.max_switches);
            let shot = fine.shot.as_ref()?;
            if !(fine.norm <= config.newton_tol) {
                return None;
            }
            let pulse = BangBangPulse::new(shot.initial_sign, shot.switch_times.clone(), fine.time).ok()?;
            Some(to_candidate(delta, *start, Some(fine.angle), pulse, SolveMethod::Indirect, config))
        })
        .collect();
    let mut candidates: Vec<Candidate> = polished.into_iter().flatten().collect();
    for c in &candidates {
        best_residual = best_residual.min(c.residual_norm);
    }

    let best_indirect = candidates.iter().map(|c| c.pulse.t_f()).fold(f64::INFINITY, f64::min);
    let mut direct_seeds: Vec<&Seed> = seeds
        .iter()
        .filter(|s| s.gap < DIRECT_GAP && s.time < best_indirect - 1e-6)
        .collect();
    direct_seeds.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.start.cmp(&b.start)));
    let mut picked: Vec<(&Seed, BangBangPulse)> = Vec::new();
    for s in direct_seeds {
        let Ok(p) = BangBangPulse::new(s.initial_sign, s.switches.clone(), s.time) else {
            continue;
        };
        if !picked.iter().any(|(_, q)| same_pulse(q, &p, 1e-3)) {
            picked.push((s, p));
        }
        if picked.len() >= DIRECT_LIMIT {
            break;
        }
    }
    let coarse_cfg = SolverConfig { dt: config.scan_dt, ..config.clone() };
    let direct: Vec<Option<Candidate>> = picked
        .par_iter()
        .map(|(s, p)| {
            let r1 = refine_switching_times(p, delta, &coarse_cfg).ok()?;
            if r1.diagnostic.is_some() || r1.pulse.t_f() >= best_indirect - 1e-6 {
                return None;
            }
            let r2 = refine_switching_times(&r1.pulse, delta, config).ok()?;
            let c = to_candidate(delta, s.start, None, r2.pulse, SolveMethod::Direct, config);
            (c.residual_norm <= config.newton_tol).then_some(c)
        })
        .collect();
    candidates.extend(direct.into_iter().flatten());

    let converged = candidates.len();
    let best_tf = candidates.iter().map(|c| c.pulse.t_f()).fold(f64::INFINITY, f64::min);
    let mut ties: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| c.pulse.t_f() <= best_tf + TIE_TOL)
        .collect();
    if ties.is_empty() {
        return Err(SynthesisError::NoConvergence { best_residual, attempts });
    }
    ties.sort_by_key(|c| c.start);
    let mut distinct: Vec<&Candidate> = Vec::new();
    for c in &ties {
        if !distinct.iter().any(|d| same_pulse(&d.pulse, &c.pulse, 1e-7)) {
            distinct.push(c);
        }
    }
    let win = ties[0];
    Ok(Solution {
        pulse: win.pulse.clone(),
        residual_norm: win.residual_norm,
        final_state: win.final_state,
        multiplicity: distinct.len(),
        method: win.method,
        costate_angle: win.angle,
        start_index: win.start,
        attempts,
        converged,
    })
}
