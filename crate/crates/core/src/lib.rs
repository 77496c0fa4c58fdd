//! Time-optimal bang-bang inversion of two spins with opposite offsets.
//!
//! Layers, bottom up: [`bloch`] (dynamics and frames), [`pmp`] (extremals and
//! brackets), [`synthesis`] (shooting, refinement, grid oracle), [`twospin`]
//! (pair verification) and [`io`] (JSON, shape and CSV files).

pub mod bloch;
pub mod error;
pub mod io;
pub mod pmp;
pub mod synthesis;
pub mod twospin;

pub use bloch::{Magnetization, NormalizedOffset, Pulse, PulseSegment, RfScale, Trajectory, Vec3, U0};
pub use error::{BlochError, PmpError, PulseIoError, SynthesisError, TwoSpinError};
pub use synthesis::{BangBangPulse, Solution, SolverConfig};
pub use twospin::{FidelityReport, OffsetPair};
