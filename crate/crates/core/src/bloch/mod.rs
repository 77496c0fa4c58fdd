//! Normalized Bloch-equation dynamics, frame transforms and the fixed-step
//! RK4 integrator used by every other layer.

mod dynamics;
mod frames;
mod pulse;
mod units;
mod vec3;

pub use dynamics::{
    bloch_rhs, propagate, propagate_final, rk4_bloch_step, rk4_step, NormalizedOffset, Trajectory,
    DEFAULT_DT,
};
pub(crate) use dynamics::propagate_segment;
#[allow(unused_imports)]
pub(crate) use dynamics::step_plan;
pub use frames::{
    cot, from_spherical, rotate_pulse, rotate_z, tangent_frame, to_spherical, SphericalState,
};
pub use pulse::{Pulse, PulseSegment, AMPLITUDE_SLACK, U0};
pub use units::{
    denormalize_units, normalize_units, NormalizedQuantities, PhysicalQuantities, RfScale,
};
pub use vec3::{Magnetization, Vec3, NORTH_POLE, SOUTH_POLE};
