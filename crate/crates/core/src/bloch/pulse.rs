use serde::{Deserialize, Serialize};

use crate::error::BlochError;

/// Control amplitude bound `u_0` in normalized units.
pub const U0: f64 = std::f64::consts::TAU;

/// Slack allowed on the amplitude bound for values that went through rounding.
pub const AMPLITUDE_SLACK: f64 = 1e-12;

/// A constant-control piece of a pulse, in normalized time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub duration: f64,
    pub ux: f64,
    pub uy: f64,
}

impl PulseSegment {
    pub fn new(duration: f64, ux: f64, uy: f64) -> Self {
        Self { duration, ux, uy }
    }

    pub fn amplitude(&self) -> f64 {
        self.ux.hypot(self.uy)
    }
}

/// Piecewise-constant two-component control schedule.
///
/// Segments are half-open in time: at a boundary the control takes the value
/// of the following segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    segments: Vec<PulseSegment>,
    units_hz: Option<f64>,
}

impl Pulse {
    /// Builds a pulse after checking durations and the amplitude bound.
    pub fn new(segments: Vec<PulseSegment>, units_hz: Option<f64>) -> Result<Self, BlochError> {
        for (index, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration >= 0.0) {
                return Err(BlochError::InvalidDuration {
                    index,
                    duration: s.duration,
                });
            }
            let amplitude = s.amplitude();
            if !(amplitude <= U0 + AMPLITUDE_SLACK) {
                return Err(BlochError::AmplitudeBound { index, amplitude });
            }
        }
        let total: f64 = segments.iter().map(|s| s.duration).sum();
        if !(total > 0.0) {
            return Err(BlochError::EmptyPulse);
        }
        if let Some(hz) = units_hz {
            if !(hz.is_finite() && hz > 0.0) {
                return Err(BlochError::InvalidRfMax(hz));
            }
        }
        Ok(Self { segments, units_hz })
    }

    /// A single constant segment.
    pub fn constant(duration: f64, ux: f64, uy: f64) -> Result<Self, BlochError> {
        Self::new(vec![PulseSegment::new(duration, ux, uy)], None)
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    /// Physical scale `ω_max / 2π` in Hz, when the pulse carries one.
    pub fn units_hz(&self) -> Option<f64> {
        self.units_hz
    }

    pub fn with_units(mut self, units_hz: Option<f64>) -> Self {
        self.units_hz = units_hz;
        self
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start times of every segment plus the final time.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.segments {
            t += s.duration;
            out.push(t);
        }
        out
    }

    /// Control active at time `t` under the half-open convention.
    /// Times at or past the end return the last segment's control.
    pub fn control_at(&self, t: f64) -> (f64, f64) {
        let mut start = 0.0;
        for s in &self.segments {
            let end = start + s.duration;
            if t < end {
                return (s.ux, s.uy);
            }
            start = end;
        }
        self.segments
            .last()
            .map(|s| (s.ux, s.uy))
            .unwrap_or((0.0, 0.0))
    }

    pub fn max_amplitude(&self) -> f64 {
        self.segments
            .iter()
            .map(PulseSegment::amplitude)
            .fold(0.0, f64::max)
    }
}
