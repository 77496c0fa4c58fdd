use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use spininv_core::bloch::{propagate_final, NORTH_POLE};
use spininv_core::synthesis::{oracle_search, refine_switching_times, solve_inversion_single};
use spininv_core::{BangBangPulse, NormalizedOffset, Solution, SolverConfig};

fn solved(k: usize) -> &'static Solution {
    static SOLS: [OnceLock<Solution>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    SOLS[k].get_or_init(|| {
        let d = [0.5 * PI, PI, 1.5 * PI][k];
        solve_inversion_single(NormalizedOffset(d), &SolverConfig::default()).unwrap()
    })
}

fn z_final(p: &BangBangPulse, delta: f64) -> f64 {
    propagate_final(NORTH_POLE, &p.to_pulse(), NormalizedOffset(delta), 1e-5).unwrap().z
}

#[test]
fn below_two_pi_at_most_one_switch() {
    for k in 0..3 {
        let s = solved(k);
        assert!(s.pulse.n_switches() <= 1, "{:?}", s.pulse);
        assert!(z_final(&s.pulse, [0.5 * PI, PI, 1.5 * PI][k]) <= -1.0 + 1e-6);
    }
}

#[test]
fn resonant_offset_is_the_pi_pulse() {
    let s = solve_inversion_single(NormalizedOffset(0.0), &SolverConfig::default()).unwrap();
    assert_eq!(s.pulse.n_switches(), 0);
    assert!((s.pulse.t_f() - 0.5).abs() < 1e-9);
}

#[test]
fn shooting_agrees_with_exact_grid_oracle() {
    for k in 0..3 {
        let d = [0.5 * PI, PI, 1.5 * PI][k];
        let s = solved(k);
        let (n, o) = oracle_search(NormalizedOffset(d), 3, 200).unwrap();
        assert_eq!(n, s.pulse.n_switches(), "Δ = {d}");
        assert!((o.pulse.t_f() - s.pulse.t_f()).abs() <= 1e-3, "Δ = {d}: {:?} vs {:?}", o.pulse, s.pulse);
        assert!(o.grid_pulse.t_f() <= o.pulse.t_f() + 2.0 * 2.0 / 200.0);
    }
}

#[test]
fn two_bang_optimum_at_pi() {
    // both bangs together sweep one full turn about (u_0, 0, π)
    let tf = 2.0 / 5f64.sqrt();
    assert!((solved(1).pulse.t_f() - tf).abs() < 1e-6);
}

#[test]
fn reflected_pulses_are_solutions_at_pi() {
    let s = solved(1);
    let p = &s.pulse;
    // reflection y → −y: the negated field inverts the −Δ spin
    let neg = BangBangPulse::new(-p.initial_sign(), p.switch_times().to_vec(), p.t_f()).unwrap();
    assert!(z_final(&neg, -PI) <= -1.0 + 1e-9);
    // R_x(π) with time reversal maps solutions of +Δ to solutions of +Δ
    let rev: Vec<f64> = p.switch_times().iter().rev().map(|t| p.t_f() - t).collect();
    let last = p.initial_sign() * if p.n_switches() % 2 == 0 { 1.0 } else { -1.0 };
    let twin = BangBangPulse::new(-last, rev, p.t_f()).unwrap();
    assert!(z_final(&twin, PI) <= -1.0 + 1e-9);
    assert!(s.multiplicity >= 2);
}

#[test]
fn refinement_keeps_a_converged_pulse() {
    let s = solved(1);
    let r = refine_switching_times(&s.pulse, NormalizedOffset(PI), &SolverConfig::default()).unwrap();
    assert!(r.pulse.t_f() <= s.pulse.t_f() + 1e-10);
    assert!(r.residual_norm <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn refinement_never_lengthens_a_feasible_pulse(dt1 in -3e-3..3e-3f64, dtf in -3e-3..3e-3f64) {
        let cfg = SolverConfig { dt: 1e-4, ..Default::default() };
        let s = solved(1);
        let t1 = s.pulse.switch_times()[0] + dt1;
        let start = BangBangPulse::new(s.pulse.initial_sign(), vec![t1], s.pulse.t_f() + dtf).unwrap();
        let first = refine_switching_times(&start, NormalizedOffset(PI), &cfg).unwrap();
        prop_assume!(first.diagnostic.is_none());
        let again = refine_switching_times(&first.pulse, NormalizedOffset(PI), &cfg).unwrap();
        prop_assert!(again.pulse.t_f() <= first.pulse.t_f() + cfg.newton_tol);
        prop_assert!(again.residual_norm <= cfg.newton_tol);
    }
}
