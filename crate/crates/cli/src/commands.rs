use std::f64::consts::PI;
use std::path::Path;

use spininv_core::bloch::{propagate, propagate_final, RfScale, NORTH_POLE};
use spininv_core::io::{
    export_shape, pulse_to_json, read_pulse_json, report_json, sweep_csv, trajectory_csv,
};
use spininv_core::synthesis::{oracle_search, pi_pulse_baseline, solve_inversion_single, SolverConfig};
use spininv_core::twospin::{robustness_sweep, verify_inversion};
use spininv_core::{NormalizedOffset, OffsetPair, Pulse, PulseIoError};

use crate::args::{self, BaselineArgs, Format, OracleArgs, SimulateArgs, SweepArgs, SynthArgs, VerifyArgs};
use crate::error::CliError;

/// Writes the artifact and the summary. With `--out` the summary goes to
/// standard output, otherwise the artifact does and the summary goes to
/// standard error.
fn emit(out: Option<&Path>, text: &str, summary: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write(path, text)?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| PulseIoError::Io { path: path.to_path_buf(), source })?;
    Ok(())
}

fn only(format: Format, allowed: &[Format], command: &str) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::Args(format!("{command} cannot write {} output", format.name())))
    }
}

/// Pulse text in JSON or shape form.
fn pulse_text(pulse: &Pulse, format: Format, scale: Option<RfScale>, samples: usize) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(pulse_to_json(pulse)),
        Format::Shape => {
            let s = scale.ok_or_else(|| CliError::Args("shape output needs --rfmax-hz".into()))?;
            Ok(export_shape(pulse, samples, s.rfmax_hz())?.to_text())
        }
        Format::Csv => Err(CliError::Args("pulses are written as json or shape".into())),
    }
}

fn duration(tau: f64, scale: Option<RfScale>) -> String {
    match scale {
        Some(s) => format!("t_f = {tau:.9} ({:.6} ms)", s.seconds(tau) * 1e3),
        None => format!("t_f = {tau:.9}"),
    }
}

fn offset_label(delta: f64, scale: Option<RfScale>) -> String {
    match scale {
        Some(s) => format!("Δ = {:.6}π ({:.3} Hz)", delta / PI, s.offset_hz(NormalizedOffset(delta))),
        None => format!("Δ = {:.6}π", delta / PI),
    }
}

fn load(path: &Path, rfmax_hz: Option<f64>) -> Result<(Pulse, Option<RfScale>), CliError> {
    let pulse = read_pulse_json(path)?;
    let scale = args::scale(rfmax_hz.or(pulse.units_hz()))?;
    Ok((pulse, scale))
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    a.common.check()?;
    only(a.format, &[Format::Json, Format::Shape], "synth")?;
    let scale = args::scale(a.common.rfmax_hz)?;
    let delta = a.offset.normalized(scale)?;
    let config = a.solver.config(a.common.dt)?;
    let sol = solve_inversion_single(NormalizedOffset(delta), &config)?;
    let pulse = sol.pulse.to_pulse().with_units(a.common.rfmax_hz);
    let text = pulse_text(&pulse, a.format, scale, a.samples)?;
    if let Some(path) = &a.shape_out {
        write(path, &pulse_text(&pulse, Format::Shape, scale, a.samples)?)?;
    }
    let switches: Vec<String> = sol.pulse.switch_times().iter().map(|t| format!("{t:.9}")).collect();
    let summary = format!(
        "{}: {}, {} switches [{}], initial sign {:+}, residual {:.3e}, {:?} solution (multiplicity {})",
        offset_label(delta, scale),
        duration(sol.pulse.t_f(), scale),
        sol.pulse.n_switches(),
        switches.join(", "),
        sol.pulse.initial_sign(),
        sol.residual_norm,
        sol.method,
        sol.multiplicity,
    );
    emit(a.common.out.as_deref(), &text, &summary)
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    a.common.check()?;
    only(a.format, &[Format::Csv], "simulate")?;
    let (pulse, scale) = load(&a.pulse, a.common.rfmax_hz)?;
    let da = a.offset.normalized(scale)?;
    let db = match a.offset_b.normalized(scale)? {
        Some(d) => Some(d),
        None if a.pair => Some(-da),
        None => None,
    };
    let ta = propagate(NORTH_POLE, &pulse, NormalizedOffset(da), a.common.dt)?;
    let tb = db.map(|d| propagate(NORTH_POLE, &pulse, NormalizedOffset(d), a.common.dt)).transpose()?;
    let text = trajectory_csv(&ta, tb.as_ref())?;
    let za = ta.final_state().map_or(f64::NAN, |m| m.z);
    let mut summary = format!("{} samples, {}, spin a z = {za:.9}", ta.len(), duration(pulse.duration(), scale));
    if let Some(m) = tb.as_ref().and_then(|t| t.final_state()) {
        summary.push_str(&format!(", spin b z = {:.9}", m.z));
    }
    emit(a.common.out.as_deref(), &text, &summary)
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    a.common.check()?;
    only(a.format, &[Format::Json], "verify")?;
    let (pulse, scale) = load(&a.pulse, a.common.rfmax_hz)?;
    let da = a.offset.normalized(scale)?;
    let db = a.offset_b.normalized(scale)?.unwrap_or(-da);
    let report = verify_inversion(&pulse, OffsetPair::new(da, db)?, a.common.dt)?;
    let summary = format!(
        "z_a = {:.9}, z_b = {:.9}, mirror residual {:.3e}, norm drift {:.3e}, {}: {}",
        report.z_a_final,
        report.z_b_final,
        report.mirror_residual,
        report.norm_drift,
        duration(report.t_f, scale),
        if report.inverted() { "inverted" } else { "not inverted" },
    );
    emit(a.common.out.as_deref(), &report_json(&report), &summary)
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    a.common.check()?;
    only(a.format, &[Format::Csv], "sweep")?;
    let (pulse, scale) = load(&a.pulse, a.common.rfmax_hz)?;
    let (lo, hi) = a.range.normalized(scale)?;
    let rows = robustness_sweep(&pulse, lo, hi, a.points, a.common.dt)?;
    let worst = rows.iter().map(|r| r.z_final).fold(f64::NEG_INFINITY, f64::max);
    let summary = format!("{} offsets from {} to {}, largest final z {worst:.6}", rows.len(), offset_label(lo.min(hi), scale), offset_label(lo.max(hi), scale));
    emit(a.common.out.as_deref(), &sweep_csv(&rows), &summary)
}

pub fn oracle(a: &OracleArgs) -> Result<(), CliError> {
    a.common.check()?;
    only(a.format, &[Format::Json, Format::Shape], "oracle")?;
    let scale = args::scale(a.common.rfmax_hz)?;
    let delta = a.offset.normalized(scale)?;
    let (n, found) = oracle_search(NormalizedOffset(delta), a.max_switches, a.grid)?;
    let config = SolverConfig { dt: a.common.dt, ..SolverConfig::default() };
    let comparison = match solve_inversion_single(NormalizedOffset(delta), &config) {
        Ok(s) => format!(
            "shooting {} with {} switches, difference {:.3e}",
            duration(s.pulse.t_f(), scale),
            s.pulse.n_switches(),
            (s.pulse.t_f() - found.pulse.t_f()).abs()
        ),
        Err(e) => format!("shooting failed: {e}"),
    };
    let pulse = found.pulse.to_pulse().with_units(a.common.rfmax_hz);
    let text = pulse_text(&pulse, a.format, scale, a.samples)?;
    let summary = format!(
        "{}: oracle {} with {n} switches (grid {}, z = {:.9}, {} evaluations); {comparison}",
        offset_label(delta, scale),
        duration(found.pulse.t_f(), scale),
        duration(found.grid_pulse.t_f(), scale),
        found.z_final,
        found.evaluations,
    );
    emit(a.common.out.as_deref(), &text, &summary)
}

pub fn baseline(a: &BaselineArgs) -> Result<(), CliError> {
    a.common.check()?;
    only(a.format, &[Format::Json, Format::Shape], "baseline")?;
    let scale = args::scale(a.common.rfmax_hz)?;
    let pulse = pi_pulse_baseline().with_units(a.common.rfmax_hz);
    let text = pulse_text(&pulse, a.format, scale, a.samples)?;
    let mut summary = format!("π-pulse, {}", duration(pulse.duration(), scale));
    if let Some(d) = args::resolve(a.offset_hz, a.delta, scale)? {
        let z = |d: f64| propagate_final(NORTH_POLE, &pulse, NormalizedOffset(d), a.common.dt).map(|m| m.z);
        summary.push_str(&format!(
            "; at {}: z(+Δ) = {:.9}, z(−Δ) = {:.9}",
            offset_label(d, scale),
            z(d)?,
            z(-d)?
        ));
    }
    emit(a.common.out.as_deref(), &text, &summary)
}
