//! Conversion between physical units (seconds, Hz) and the normalized
//! quantities used everywhere else in the crate.
//!
//! With `ν_max = ω_max / 2π` the maximum rf amplitude in Hz:
//! `τ = ν_max t`, `u = 2π ν / ν_max`, `Δ = 2π ν_offset / ν_max`.

use std::f64::consts::TAU;

use crate::error::BlochError;

use super::dynamics::NormalizedOffset;

/// Normalized triple produced by [`normalize_units`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedQuantities {
    pub tau: f64,
    pub u: f64,
    pub delta: NormalizedOffset,
}

/// Physical triple produced by [`denormalize_units`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalQuantities {
    pub time_s: f64,
    pub field_hz: f64,
    pub offset_hz: f64,
}

/// Physical scale fixed by the maximum rf amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfScale {
    rfmax_hz: f64,
}

impl RfScale {
    pub fn new(rfmax_hz: f64) -> Result<Self, BlochError> {
        if !(rfmax_hz.is_finite() && rfmax_hz > 0.0) {
            return Err(BlochError::InvalidRfMax(rfmax_hz));
        }
        Ok(Self { rfmax_hz })
    }

    pub fn rfmax_hz(&self) -> f64 {
        self.rfmax_hz
    }

    pub fn tau(&self, time_s: f64) -> f64 {
        self.rfmax_hz * time_s
    }

    pub fn seconds(&self, tau: f64) -> f64 {
        tau / self.rfmax_hz
    }

    pub fn control(&self, field_hz: f64) -> f64 {
        TAU * field_hz / self.rfmax_hz
    }

    pub fn field_hz(&self, u: f64) -> f64 {
        u * self.rfmax_hz / TAU
    }

    pub fn offset(&self, offset_hz: f64) -> NormalizedOffset {
        NormalizedOffset(TAU * offset_hz / self.rfmax_hz)
    }

    pub fn offset_hz(&self, delta: NormalizedOffset) -> f64 {
        delta.0 * self.rfmax_hz / TAU
    }
}

pub fn normalize_units(
    time_s: f64,
    field_hz: f64,
    offset_hz: f64,
    rfmax_hz: f64,
) -> Result<NormalizedQuantities, BlochError> {
    let s = RfScale::new(rfmax_hz)?;
    Ok(NormalizedQuantities {
        tau: s.tau(time_s),
        u: s.control(field_hz),
        delta: s.offset(offset_hz),
    })
}

pub fn denormalize_units(
    q: NormalizedQuantities,
    rfmax_hz: f64,
) -> Result<PhysicalQuantities, BlochError> {
    let s = RfScale::new(rfmax_hz)?;
    Ok(PhysicalQuantities {
        time_s: s.seconds(q.tau),
        field_hz: s.field_hz(q.u),
        offset_hz: s.offset_hz(q.delta),
    })
}
