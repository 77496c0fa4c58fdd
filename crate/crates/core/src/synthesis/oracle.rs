//! Exhaustive grid search over bang-bang structures with exact rotations.
//!
//! Independent of the RK4 integrator and of the extremal equations: every
//! bang is applied as the closed-form rotation about `(±u_0, 0, Δ)`.

use crate::bloch::{NormalizedOffset, Vec3, NORTH_POLE, U0};
use crate::error::SynthesisError;

use super::BangBangPulse;

/// Grid feasibility threshold on `1 + z`.
pub const ORACLE_THRESHOLD: f64 = 1e-3;
pub const ORACLE_MAX_SWITCHES: usize = 3;
pub const ORACLE_MAX_GRID: usize = 400;
const T_MAX: f64 = 2.0;
const ZOOM_FLOOR: f64 = 1e-13;
const ZOOM_LEVELS: usize = 60;

type Mat3 = [[f64; 3]; 3];

fn rotation(delta: f64, u: f64, t: f64) -> Mat3 {
    let w = Vec3::new(u, 0.0, delta);
    let wn = w.norm();
    if wn == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let k = w * (1.0 / wn);
    let (s, c) = (wn * t).sin_cos();
    let v = 1.0 - c;
    let k = [k.x, k.y, k.z];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = v * k[i] * k[j] + if i == j { c } else { 0.0 };
        }
    }
    r[0][1] -= s * k[2];
    r[0][2] += s * k[1];
    r[1][0] += s * k[2];
    r[1][2] -= s * k[0];
    r[2][0] -= s * k[1];
    r[2][1] += s * k[0];
    r
}

#[inline]
fn apply(r: &Mat3, m: Vec3) -> Vec3 {
    Vec3::new(
        r[0][0] * m.x + r[0][1] * m.y + r[0][2] * m.z,
        r[1][0] * m.x + r[1][1] * m.y + r[1][2] * m.z,
        r[2][0] * m.x + r[2][1] * m.y + r[2][2] * m.z,
    )
}

/// Exact final state of a bang-bang pulse from the north pole.
fn exact_final(delta: f64, sign: f64, switches: &[f64], t_f: f64) -> Vec3 {
    let mut m = NORTH_POLE;
    let mut prev = 0.0;
    let mut u = sign * U0;
    for &t in switches.iter().chain(std::iter::once(&t_f)) {
        m = apply(&rotation(delta, u, t - prev), m);
        prev = t;
        u = -u;
    }
    m
}

/// Grid optimum and its zoomed refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best grid point with `1 + z ≤ 1e-3`.
    pub grid_pulse: BangBangPulse,
    pub grid_z: f64,
    /// Local zoom around the grid optimum with the threshold tightened to `1e-13`.
    pub pulse: BangBangPulse,
    pub z_final: f64,
    pub evaluations: u64,
}

struct Grid {
    steps: [Mat3; 2],
    n: usize,
    g: usize,
    best_k: usize,
    best: Option<(f64, Vec<usize>, Vec3)>,
    best_z: f64,
    evaluations: u64,
}

impl Grid {
    fn search(&mut self, sign: f64) {
        let mut idx = Vec::with_capacity(self.n);
        self.descend(NORTH_POLE, 0, sign, &mut idx, sign);
    }

    fn descend(&mut self, m0: Vec3, k0: usize, sign: f64, idx: &mut Vec<usize>, first: f64) {
        let step = self.steps[usize::from(sign < 0.0)];
        let last = idx.len() == self.n;
        let mut m = m0;
        for k in k0 + 1..=self.g {
            if k >= self.best_k {
                return;
            }
            m = apply(&step, m);
            if last {
                self.evaluations += 1;
                self.best_z = self.best_z.min(m.z);
                if 1.0 + m.z <= ORACLE_THRESHOLD {
                    self.best_k = k;
                    self.best = Some((first, idx.clone(), m));
                    return;
                }
            } else if k < self.g {
                idx.push(k);
                self.descend(m, k, -sign, idx, first);
                idx.pop();
            }
        }
    }
}

fn check_limits(n_switches: usize, grid_points: usize) -> Result<(), SynthesisError> {
    if n_switches > ORACLE_MAX_SWITCHES {
        return Err(SynthesisError::OracleLimits(format!(
            "at most {ORACLE_MAX_SWITCHES} switches, got {n_switches}"
        )));
    }
    if !(2..=ORACLE_MAX_GRID).contains(&grid_points) {
        return Err(SynthesisError::OracleLimits(format!(
            "grid must have between 2 and {ORACLE_MAX_GRID} points, got {grid_points}"
        )));
    }
    Ok(())
}

/// Minimal-`t_f` bang-bang pulse with exactly `n_switches` switches on a
/// uniform grid of `grid_points` intervals over `[0, 2]`.
pub fn brute_force_oracle(
    delta: NormalizedOffset,
    n_switches: usize,
    grid_points: usize,
) -> Result<OracleResult, SynthesisError> {
    check_limits(n_switches, grid_points)?;
    if !delta.0.is_finite() {
        return Err(SynthesisError::InvalidOffset(delta.0));
    }
    let h = T_MAX / grid_points as f64;
    let mut grid = Grid {
        steps: [rotation(delta.0, U0, h), rotation(delta.0, -U0, h)],
        n: n_switches,
        g: grid_points,
        best_k: usize::MAX,
        best: None,
        best_z: 1.0,
        evaluations: 0,
    };
    grid.search(1.0);
    grid.search(-1.0);
    let Some((sign, idx, m)) = grid.best.take() else {
        return Err(SynthesisError::OracleInfeasible {
            threshold: -1.0 + ORACLE_THRESHOLD,
            best_z: grid.best_z,
        });
    };
    let switches: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
    let t_f = grid.best_k as f64 * h;
    let grid_pulse = BangBangPulse::new(sign, switches.clone(), t_f)?;
    let (pulse, z_final, zoom_evals) = zoom(delta.0, sign, switches, t_f, h);
    Ok(OracleResult {
        grid_pulse,
        grid_z: m.z,
        pulse,
        z_final,
        evaluations: grid.evaluations + zoom_evals,
    })
}

/// Repeated local grids: the box halves and the feasibility threshold drops
/// ×4 per level, so both track the `√ε` size of the feasible set.
fn zoom(delta: f64, sign: f64, switches: Vec<f64>, t_f: f64, h: f64) -> (BangBangPulse, f64, u64) {
    let mut center: Vec<f64> = switches;
    center.push(t_f);
    let dim = center.len();
    let per = if dim >= 4 { 21 } else { 41 };
    let half = (per / 2) as f64;
    let mut width = 4.0 * h;
    let mut eps = ORACLE_THRESHOLD;
    let mut evals = 0u64;
    let mut best_z = exact_final(delta, sign, &center[..dim - 1], center[dim - 1]).z;
    let mut idx = vec![0usize; dim];
    let mut trial = vec![0.0; dim];
    for _ in 0..ZOOM_LEVELS {
        let target = (eps / 4.0).max(ZOOM_FLOOR);
        let mut feasible: Option<(f64, f64, Vec<f64>)> = None;
        let mut closest: Option<(f64, Vec<f64>)> = None;
        idx.iter_mut().for_each(|i| *i = 0);
        'grid: loop {
            for d in 0..dim {
                trial[d] = center[d] + width * (idx[d] as f64 - half) / half;
            }
            let (s, tf) = trial.split_at(dim - 1);
            if super::ordered(s, tf[0]) {
                evals += 1;
                let z = exact_final(delta, sign, s, tf[0]).z;
                let gap = 1.0 + z;
                if gap <= target && feasible.as_ref().map_or(true, |(t, g, _)| (tf[0], gap) < (*t, *g)) {
                    feasible = Some((tf[0], gap, trial.clone()));
                }
                if closest.as_ref().map_or(true, |(g, _)| gap < *g) {
                    closest = Some((gap, trial.clone()));
                }
            }
            for d in 0..dim {
                idx[d] += 1;
                if idx[d] < per {
                    continue 'grid;
                }
                idx[d] = 0;
            }
            break;
        }
        match feasible {
            Some((_, gap, c)) => {
                center = c;
                best_z = gap - 1.0;
                eps = target;
            }
            // keep the threshold and recentre on the closest approach
            None => {
                if let Some((gap, c)) = closest {
                    if gap - 1.0 < best_z {
                        center = c;
                        best_z = gap - 1.0;
                    }
                }
            }
        }
        width /= 2.0;
        if eps <= ZOOM_FLOOR {
            break;
        }
    }
    let (s, tf) = center.split_at(dim - 1);
    let pulse = BangBangPulse::new(sign, s.to_vec(), tf[0]).expect("zoom keeps the ordering");
    (pulse, best_z, evals)
}

/// Runs the oracle for `0..=max_switches` switches and returns the switch
/// count and result with the smallest refined `t_f`; counts within `1e-6`
/// resolve to the fewest switches.
pub fn oracle_search(
    delta: NormalizedOffset,
    max_switches: usize,
    grid_points: usize,
) -> Result<(usize, OracleResult), SynthesisError> {
    check_limits(max_switches, grid_points)?;
    let mut results = Vec::new();
    let mut worst = None;
    for n in 0..=max_switches {
        match brute_force_oracle(delta, n, grid_points) {
            Ok(r) => results.push((n, r)),
            Err(e @ SynthesisError::OracleInfeasible { .. }) => worst = Some(e),
            Err(e) => return Err(e),
        }
    }
    let best = results
        .iter()
        .map(|(_, r)| r.pulse.t_f())
        .fold(f64::INFINITY, f64::min);
    match results.into_iter().find(|(_, r)| r.pulse.t_f() <= best + 1e-6) {
        Some(r) => Ok(r),
        None => Err(worst.unwrap_or(SynthesisError::OracleInfeasible {
            threshold: -1.0 + ORACLE_THRESHOLD,
            best_z: 1.0,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_is_orthogonal() {
        let r = rotation(3.0, U0, 0.37);
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_final_matches_rk4() {
        let b = BangBangPulse::new(1.0, vec![0.21, 0.5], 0.83).unwrap();
        let d = NormalizedOffset(4.0);
        let a = exact_final(d.0, 1.0, b.switch_times(), b.t_f());
        let r = b.final_state(NORTH_POLE, d, 1e-4);
        assert!(a.max_abs_diff(r) < 1e-10);
    }

    #[test]
    fn resonant_single_bang() {
        let r = brute_force_oracle(NormalizedOffset(0.0), 0, 400).unwrap();
        assert!((r.grid_pulse.t_f() - 0.5).abs() <= 2.5 * 2.0 / 400.0);
        assert!((r.pulse.t_f() - 0.5).abs() < 1e-6, "{}", r.pulse.t_f());
    }

    #[test]
    fn single_bang_cannot_invert_off_resonance() {
        match brute_force_oracle(NormalizedOffset(PI), 0, 400) {
            Err(SynthesisError::OracleInfeasible { best_z, .. }) => {
                assert!((best_z + 0.6).abs() < 1e-3, "{best_z}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_bang_optimum() {
        let r = brute_force_oracle(NormalizedOffset(PI), 1, 400).unwrap();
        assert!((r.pulse.t_f() - 2.0 / 5f64.sqrt()).abs() < 1e-6, "{:?}", r.pulse);
        assert!(1.0 + r.z_final < 1e-12);
    }

    #[test]
    fn limits() {
        assert!(matches!(
            brute_force_oracle(NormalizedOffset(0.0), 4, 100),
            Err(SynthesisError::OracleLimits(_))
        ));
        assert!(matches!(
            brute_force_oracle(NormalizedOffset(0.0), 1, 401),
            Err(SynthesisError::OracleLimits(_))
        ));
    }
}
