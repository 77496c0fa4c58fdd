use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spininv_core::bloch::{RfScale, DEFAULT_DT};
use spininv_core::SolverConfig;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spininv", version, about = "Time-optimal inversion pulses for two spins with opposite offsets")]
pub struct Cli {
    /// Worker threads for multistarts and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the minimum-time bang-bang inversion pulse.
    Synth(SynthArgs),
    /// Forward-simulate a pulse and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Check that a pulse inverts both spins of a pair.
    Verify(VerifyArgs),
    /// Final state of a single spin over a range of offsets.
    Sweep(SweepArgs),
    /// Exhaustive grid search over switching times.
    Oracle(OracleArgs),
    /// Resonant π-pulse for comparison.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Shape,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Shape => "shape",
            Format::Csv => "csv",
        }
    }
}

/// Offset of spin a, either in Hz or normalized.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct OffsetArg {
    /// Offset of spin a in Hz (needs --rfmax-hz or units in the pulse file).
    #[arg(long, allow_hyphen_values = true)]
    pub offset_hz: Option<f64>,
    /// Normalized offset Δ of spin a.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
}

/// Optional offset of spin b; defaults to the mirror of spin a.
#[derive(Debug, Clone, Args)]
#[group(required = false, multiple = false)]
pub struct OffsetBArg {
    #[arg(long, allow_hyphen_values = true)]
    pub offset_b_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_b: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Maximum rf amplitude ω_max/2π in Hz.
    #[arg(long)]
    pub rfmax_hz: Option<f64>,
    /// Integration step in normalized time.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Terminal residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_switches: Option<usize>,
    #[arg(long)]
    pub multistarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub offset: OffsetArg,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Rows of the shape file.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Also write a shape file here.
    #[arg(long)]
    pub shape_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Pulse JSON file.
    #[arg(long)]
    pub pulse: PathBuf,
    #[command(flatten)]
    pub offset: OffsetArg,
    #[command(flatten)]
    pub offset_b: OffsetBArg,
    /// Simulate spin b at the mirrored offset when no explicit b offset is given.
    #[arg(long)]
    pub pair: bool,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub pulse: PathBuf,
    #[command(flatten)]
    pub offset: OffsetArg,
    #[command(flatten)]
    pub offset_b: OffsetBArg,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
#[group(id = "range", required = true, multiple = true)]
pub struct RangeArg {
    #[arg(long, allow_hyphen_values = true, requires = "max_hz", conflicts_with_all = ["min_delta", "max_delta"])]
    pub min_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "min_hz")]
    pub max_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "max_delta")]
    pub min_delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "min_delta")]
    pub max_delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub pulse: PathBuf,
    #[command(flatten)]
    pub range: RangeArg,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub offset: OffsetArg,
    #[command(flatten)]
    pub common: Common,
    /// Largest number of interior switches searched (at most 3).
    #[arg(long, default_value_t = 3)]
    pub max_switches: usize,
    /// Grid points across [0, 2] per switching time.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    /// Offset at which to report the π-pulse fidelity.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delta")]
    pub offset_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
}

pub fn scale(rfmax_hz: Option<f64>) -> Result<Option<RfScale>, CliError> {
    rfmax_hz
        .map(|hz| RfScale::new(hz).map_err(|e| CliError::Args(e.to_string())))
        .transpose()
}

/// Normalized offset from either flag; Hz needs a scale.
pub fn resolve(offset_hz: Option<f64>, delta: Option<f64>, scale: Option<RfScale>) -> Result<Option<f64>, CliError> {
    let d = match (offset_hz, delta) {
        (Some(hz), None) => {
            let s = scale.ok_or_else(|| CliError::Args("offsets in Hz need --rfmax-hz".into()))?;
            s.offset(hz).0
        }
        (None, Some(d)) => d,
        (None, None) => return Ok(None),
        (Some(_), Some(_)) => return Err(CliError::Args("give either an offset in Hz or --delta, not both".into())),
    };
    if !d.is_finite() {
        return Err(CliError::Args(format!("offset must be finite, got {d}")));
    }
    Ok(Some(d))
}

impl OffsetArg {
    pub fn normalized(&self, scale: Option<RfScale>) -> Result<f64, CliError> {
        resolve(self.offset_hz, self.delta, scale)?.ok_or_else(|| CliError::Args("an offset is required".into()))
    }
}

impl OffsetBArg {
    pub fn normalized(&self, scale: Option<RfScale>) -> Result<Option<f64>, CliError> {
        resolve(self.offset_b_hz, self.delta_b, scale)
    }
}

impl RangeArg {
    pub fn normalized(&self, scale: Option<RfScale>) -> Result<(f64, f64), CliError> {
        let lo = resolve(self.min_hz, self.min_delta, scale)?;
        let hi = resolve(self.max_hz, self.max_delta, scale)?;
        lo.zip(hi).ok_or_else(|| CliError::Args("a sweep needs both ends of the range".into()))
    }
}

impl Common {
    pub fn check(&self) -> Result<(), CliError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CliError::Args(format!("--dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

impl SolverArgs {
    pub fn config(&self, dt: f64) -> Result<SolverConfig, CliError> {
        let mut c = SolverConfig { dt, seed: self.seed, ..SolverConfig::default() };
        if let Some(t) = self.tol {
            c.newton_tol = t;
        }
        if let Some(n) = self.max_switches {
            c.max_switches = n;
        }
        if let Some(n) = self.multistarts {
            c.multistart_count = n;
        }
        c.validate().map_err(|e| CliError::Args(e.to_string()))?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn hz_offsets_need_a_scale() {
        let s = scale(Some(120.75)).unwrap();
        assert_eq!(resolve(Some(483.0), None, s).unwrap(), Some(8.0 * std::f64::consts::PI));
        assert!(matches!(resolve(Some(483.0), None, None), Err(CliError::Args(_))));
        assert_eq!(resolve(None, Some(-2.0), None).unwrap(), Some(-2.0));
        assert_eq!(resolve(None, None, s).unwrap(), None);
        assert!(resolve(None, Some(f64::NAN), None).is_err());
        assert!(scale(Some(0.0)).is_err());
    }

    #[test]
    fn solver_flags_map_onto_the_config() {
        let a = SolverArgs { tol: Some(1e-8), max_switches: Some(12), multistarts: Some(8), seed: 3 };
        let c = a.config(1e-4).unwrap();
        assert_eq!((c.newton_tol, c.max_switches, c.multistart_count, c.seed, c.dt), (1e-8, 12, 8, 3, 1e-4));
        let bad = SolverArgs { multistarts: Some(0), ..a };
        assert!(bad.config(1e-4).is_err());
    }
}
