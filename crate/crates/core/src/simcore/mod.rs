//! Deterministic discrete-event engine: integer clock, event queue, radio
//! channel with collision semantics, topology and energy accounting.

use thiserror::Error;

mod channel;
mod energy;
mod engine;
mod event;
mod topology;
pub mod trace;

pub use channel::{Channel, Outcome, TxId};
pub use energy::{EnergyLedger, EnergyModel};
pub use engine::{run, run_traced, Simulation};
pub use event::{EventQueue, Scheduled};
pub use topology::{Topology, TopologySpec};

/// Simulation time in integer ticks. One tick is one microsecond.
pub type Tick = u64;

pub const TICKS_PER_SECOND: Tick = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeError {
    #[error("duration {0} s is negative or not finite")]
    Invalid(f64),
    #[error("duration {0} s is not a whole number of microsecond ticks")]
    Rounding(f64),
}

/// Converts seconds to ticks, refusing values that would lose precision.
pub fn secs_to_ticks(secs: f64) -> Result<Tick, TimeError> {
    if !secs.is_finite() || secs < 0.0 {
        return Err(TimeError::Invalid(secs));
    }
    let scaled = secs * TICKS_PER_SECOND as f64;
    let rounded = scaled.round();
    if (scaled - rounded).abs() > 1e-6 * scaled.max(1.0) {
        return Err(TimeError::Rounding(secs));
    }
    Ok(rounded as Tick)
}

pub fn ticks_to_secs(ticks: Tick) -> f64 {
    ticks as f64 / TICKS_PER_SECOND as f64
}
