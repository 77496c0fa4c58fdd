use std::f64::consts::{PI, TAU};
use std::path::Path;

use proptest::prelude::*;
use spininv_core::bloch::{
    from_spherical, propagate, propagate_final, rotate_pulse, rotate_z, to_spherical, SphericalState, NORTH_POLE,
};
use spininv_core::io::{parse_pulse_json, parse_shape, pulse_to_json, trajectory_csv, ShapeFile, ShapeRow};
use spininv_core::pmp::{
    bracket_f_k, bracket_g_f, bracket_g_k, cartesian_costate, control_field, drift_field, integrate_extremal,
    lie_bracket_fd, singular_locus_value, spherical_costate, SinglePoint,
};
use spininv_core::synthesis::lift_to_two_controls;
use spininv_core::twospin::{mirror_check, propagate_two, symmetrize, verify_inversion, TwoSpinState};
use spininv_core::{BangBangPulse, NormalizedOffset, OffsetPair, Pulse, PulseSegment, U0};

fn any_pulse() -> impl Strategy<Value = Pulse> {
    prop::collection::vec((0.01..0.3f64, 0.0..1.0f64, 0.0..TAU), 1..6).prop_map(|v| {
        let segs = v
            .into_iter()
            .map(|(d, a, ph)| PulseSegment::new(d, U0 * a * ph.cos(), U0 * a * ph.sin()))
            .collect();
        Pulse::new(segs, None).unwrap()
    })
}

fn x_pulse() -> impl Strategy<Value = BangBangPulse> {
    (prop::bool::ANY, prop::collection::vec(0.02..0.2f64, 0..5), 0.02..0.2f64).prop_map(|(s, gaps, last)| {
        let mut t = 0.0;
        let sw: Vec<f64> = gaps
            .iter()
            .map(|g| {
                t += g;
                t
            })
            .collect();
        BangBangPulse::new(if s { 1.0 } else { -1.0 }, sw, t + last).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn norm_is_preserved(p in any_pulse(), d in -30.0..30.0f64) {
        let t = propagate(NORTH_POLE, &p, NormalizedOffset(d), 1e-4).unwrap();
        prop_assert!(t.norm_drift() < 1e-9 * p.duration().max(1.0), "{}", t.norm_drift());
    }

    #[test]
    fn rotating_the_field_rotates_the_state(p in any_pulse(), d in -30.0..30.0f64, a in -PI..PI) {
        let m = propagate_final(NORTH_POLE, &p, NormalizedOffset(d), 1e-3).unwrap();
        let r = propagate_final(NORTH_POLE, &rotate_pulse(&p, -a), NormalizedOffset(d), 1e-3).unwrap();
        prop_assert!(r.max_abs_diff(rotate_z(m, a)) < 1e-12);
    }

    #[test]
    fn json_round_trip_is_identity(p in any_pulse(), hz in prop::option::of(1.0..1e4f64)) {
        let p = p.with_units(hz);
        let back = parse_pulse_json(&pulse_to_json(&p), Path::new("x.json")).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn shape_text_round_trip(rows in prop::collection::vec((0.0..=1.0f64, 0.0..360.0f64), 1..20), dwell in 1e-7..1e-3f64) {
        let s = ShapeFile {
            header: vec!["h".into()],
            rows: rows.into_iter().map(|(amplitude, phase)| ShapeRow { amplitude, phase }).collect(),
            dwell,
        };
        prop_assert_eq!(parse_shape(&s.to_text(), Path::new("x.shape")).unwrap(), s);
    }

    #[test]
    fn csv_values_survive_a_standard_reader(p in any_pulse(), d in -30.0..30.0f64) {
        let a = propagate(NORTH_POLE, &p, NormalizedOffset(d), 0.02).unwrap();
        let b = propagate(NORTH_POLE, &p, NormalizedOffset(-d), 0.02).unwrap();
        let text = trajectory_csv(&a, Some(&b)).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        prop_assert_eq!(rows.len(), a.len());
        for (i, r) in rows.iter().enumerate() {
            let v: Vec<f64> = r.iter().map(|c| c.parse().unwrap()).collect();
            let want = [a.times[i], a.states[i].x, a.states[i].y, a.states[i].z,
                        b.states[i].x, b.states[i].y, b.states[i].z, a.controls[i].0, a.controls[i].1];
            for (x, y) in v.iter().zip(want) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn symmetrize_reconstructs_offsets(a in -1e3..1e3f64, b in -1e3..1e3f64) {
        let r = symmetrize(OffsetPair::new(a, b).unwrap());
        prop_assert!((r.frame_shift + r.delta_sym - a).abs() <= 1e-15 * a.abs().max(b.abs()).max(1.0));
        prop_assert!((r.frame_shift - r.delta_sym - b).abs() <= 1e-15 * a.abs().max(b.abs()).max(1.0));
    }

    #[test]
    fn x_pulses_mirror_the_pair(p in x_pulse(), d in -30.0..30.0f64) {
        let t = propagate_two(TwoSpinState::north(), &p.to_pulse(), d, 1e-3).unwrap();
        prop_assert!(mirror_check(&t.a, &t.b).unwrap() < 1e-12);
    }

    #[test]
    fn swapping_labels_swaps_results(p in x_pulse(), a in -30.0..30.0f64, b in -30.0..30.0f64) {
        let pair = OffsetPair::new(a, b).unwrap();
        let r = verify_inversion(&p.to_pulse(), pair, 1e-3).unwrap();
        let s = verify_inversion(&p.to_pulse(), pair.swapped(), 1e-3).unwrap();
        prop_assert_eq!((r.z_a_final, r.z_b_final), (s.z_b_final, s.z_a_final));
    }

    #[test]
    fn lift_then_rotate_recovers_the_x_pulse(p in x_pulse(), phi in -PI..PI, d in -30.0..30.0f64) {
        let x = p.to_pulse();
        let lifted = lift_to_two_controls(&p, phi);
        let back = rotate_pulse(&lifted, 0.5 * phi);
        for (a, b) in x.segments().iter().zip(back.segments()) {
            prop_assert_eq!(a.duration, b.duration);
            prop_assert!((a.ux - b.ux).abs() <= 4.0 * f64::EPSILON * U0 && b.uy.abs() <= 4.0 * f64::EPSILON * U0);
        }
        let m = propagate_final(NORTH_POLE, &x, NormalizedOffset(d), 1e-3).unwrap();
        let l = propagate_final(NORTH_POLE, &lifted, NormalizedOffset(d), 1e-3).unwrap();
        prop_assert!(l.max_abs_diff(rotate_z(m, 0.5 * phi)) < 1e-9);
    }

    #[test]
    fn analytic_brackets_match_finite_differences(d in -30.0..30.0f64, th in 0.2..2.9f64, ph in 0.0..TAU) {
        let h = 1e-5;
        let x = [th, ph];
        let f = |y: [f64; 2]| drift_field(d, y[0], y[1]);
        let g = |y: [f64; 2]| control_field(y[0], y[1]);
        let k = |y: [f64; 2]| bracket_g_f(d, y[0], y[1]);
        let close = |a: [f64; 2], b: [f64; 2], scale: f64| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) <= 1e-6 * scale;
        let s = 1.0 + d.abs() * d.abs() * 40.0;
        prop_assert!(close(lie_bracket_fd(g, f, x, h), bracket_g_f(d, th, ph), s));
        prop_assert!(close(lie_bracket_fd(g, k, x, h), bracket_g_k(d, th, ph), s));
        prop_assert!(close(lie_bracket_fd(f, k, x, h), bracket_f_k(d, th, ph), s));
        let v = singular_locus_value(SphericalState::new(th, ph), NormalizedOffset(d)).unwrap();
        prop_assert!((v + d / th.tan()).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn spherical_charts_round_trip(th in 0.05..3.09f64, ph in 0.0..TAU, pt in -3.0..3.0f64, pp in -3.0..3.0f64) {
        let m = from_spherical(SphericalState::new(th, ph));
        let s = to_spherical(m).unwrap();
        prop_assert!((s.theta - th).abs() < 1e-12);
        let p = cartesian_costate(th, ph, pt, pp).unwrap();
        let (a, b) = spherical_costate(m, p).unwrap();
        prop_assert!((a - pt).abs() < 1e-11 && (b - pp).abs() < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn extremals_conserve_the_hamiltonian(a in 0.0..TAU, d in -30.0..30.0f64) {
        prop_assume!(a.cos().abs() > 0.05);
        let pt = SinglePoint::north_pole_start(a, NormalizedOffset(d)).unwrap();
        if let Ok(arc) = integrate_extremal(&pt, 0.6, 1e-4, 64) {
            let h0 = 1.0;
            for (m, p) in arc.states.iter().zip(&arc.costates) {
                let q = SinglePoint::new(*m, *p, NormalizedOffset(d));
                prop_assert!((q.max_hamiltonian() - h0).abs() < 1e-6);
            }
        }
    }
}
