use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the Bloch dynamics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("segment {index}: control amplitude {amplitude} exceeds the bound 2π")]
    AmplitudeBound { index: usize, amplitude: f64 },
    #[error("segment {index}: duration {duration} is negative or not finite")]
    InvalidDuration { index: usize, duration: f64 },
    #[error("pulse has zero total duration")]
    EmptyPulse,
    #[error("cannot convert the zero vector to spherical coordinates")]
    ZeroVector,
    #[error("maximum rf amplitude must be positive, got {0} Hz")]
    InvalidRfMax(f64),
}

/// Errors raised while evaluating or integrating Pontryagin extremals.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PmpError {
    #[error("point lies on the switching surface: both control projections vanish")]
    OnSwitchingSurface,
    #[error("switching function vanishes at t = {time}; initial costate is abnormal or singular")]
    DegenerateStart { time: f64 },
    #[error("more than {max_switches} switches before t = {time} (chattering)")]
    Chattering { max_switches: usize, time: f64 },
    #[error("switching function vanishes identically on [{start}, {end}] (singular arc suspected)")]
    SingularArc { start: f64, end: f64 },
    #[error("spherical coordinates are singular at the poles (theta = {theta})")]
    AtPole { theta: f64 },
    #[error("point is off the singular locus (theta = {theta}, expected pi/2)")]
    OffSingularLocus { theta: f64 },
    #[error("bracket relation is degenerate at this point (G or the drift vanishes)")]
    DegenerateBrackets,
    #[error(transparent)]
    Bloch(#[from] BlochError),
}

/// Errors raised by pulse synthesis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error("no multistart converged; best residual norm {best_residual:e} over {attempts} attempts")]
    NoConvergence { best_residual: f64, attempts: usize },
    #[error("oracle found no grid point with z <= {threshold}; best z reached {best_z}")]
    OracleInfeasible { threshold: f64, best_z: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("oracle limits exceeded: {0}")]
    OracleLimits(String),
    #[error("offset must be finite, got {0}")]
    InvalidOffset(f64),
    #[error("switching times are not strictly increasing inside (0, t_f)")]
    Ordering,
    #[error(transparent)]
    Pmp(#[from] PmpError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
}

/// Errors raised while reading or writing pulse, shape and trajectory files.
#[derive(Debug, Error)]
pub enum PulseIoError {
    #[error("{path}: malformed JSON at line {line}, column {column}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: schema violation at `{field}`: {message}")]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("{path}: segment {index} has amplitude {amplitude} above the bound 2π")]
    AmplitudeBound {
        path: PathBuf,
        index: usize,
        amplitude: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid export request: {0}")]
    InvalidRequest(String),
    #[error("trajectories are not aligned: {0}")]
    Misaligned(String),
    #[error(transparent)]
    Bloch(#[from] BlochError),
}

/// Errors raised by the two-spin layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoSpinError {
    #[error("trajectories have mismatched time grids ({0})")]
    MismatchedGrids(String),
    #[error("sweep needs at least two grid points, got {0}")]
    SweepTooSmall(usize),
    #[error("offsets must be finite")]
    NonFiniteOffset,
    #[error("spin {spin} has norm {norm}; both spins must start on the unit sphere")]
    OffSphere { spin: char, norm: f64 },
    #[error(transparent)]
    Bloch(#[from] BlochError),
}
