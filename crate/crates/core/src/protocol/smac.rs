//! S-MAC baseline without adaptive listening.
//!
//! Contention happens once, at the start of each frame. A node with queued
//! traffic draws a backoff; if the channel is still idle when it expires the
//! node sends a run of packets to the next hop of its head-of-line packet.
//! Two equal draws both fire and collide.

use rand::Rng;

use super::{FrameConfig, NodeId, NodeState};
use crate::simcore::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmacAction {
    /// Nothing queued: listen through the active window, then sleep.
    Listen,
    /// Contend for `peer` after `backoff` backoff slots.
    Contend { peer: NodeId, backoff: u32 },
}

impl SmacAction {
    pub fn backoff_ticks(&self, cfg: &FrameConfig) -> Option<Tick> {
        match *self {
            SmacAction::Contend { backoff, .. } => Some(Tick::from(backoff) * cfg.backoff_slot),
            SmacAction::Listen => None,
        }
    }
}

pub fn smac_frame_step<R: Rng + ?Sized>(node: &NodeState, rng: &mut R, cfg: &FrameConfig) -> SmacAction {
    match node.head_peer() {
        Some(peer) => SmacAction::Contend {
            peer,
            backoff: rng.random_range(0..cfg.backoff_window),
        },
        None => SmacAction::Listen,
    }
}

/// Packets that fit between `offset` (ticks into the frame) and the end of
/// the frame, leaving the guard time free.
pub fn exchange_capacity(offset: Tick, cfg: &FrameConfig) -> u32 {
    let end = cfg.cycle_len().saturating_sub(cfg.guard);
    let room = end.saturating_sub(offset);
    (room / (cfg.data_tx + cfg.ack_tx)) as u32
}
