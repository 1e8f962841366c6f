//! H-MAC slot negotiation.
//!
//! A sender announces buffered traffic with an ATIM listing the slots it
//! would like, the receiver answers with an ATIM_ACK carrying the slots it
//! grants (its own free list wins over the proposal), and the sender closes
//! with an ATIM_RES naming the slots it actually takes. Nodes that overhear
//! an ATIM_ACK or ATIM_RES mark those slots busy for the rest of the frame.

use rand::Rng;

use super::{Direction, FrameConfig, FrameKind, NodeId, NodeState, ProtocolError, Reservation, SlotIndex, WireFrame};

/// ATIM proposing the `want` lowest free slots, ascending.
///
/// Fewer than `want` slots are proposed when fewer are free; an empty free
/// set is [`ProtocolError::NoFreeSlot`].
pub fn compose_atim(node: &NodeState, peer: NodeId, want: usize, cfg: &FrameConfig) -> Result<WireFrame, ProtocolError> {
    compose_atim_after(node, peer, want, None, cfg)
}

/// Like [`compose_atim`], restricted to slots strictly after `after`.
pub fn compose_atim_after(
    node: &NodeState,
    peer: NodeId,
    want: usize,
    after: Option<SlotIndex>,
    cfg: &FrameConfig,
) -> Result<WireFrame, ProtocolError> {
    let slots: Vec<SlotIndex> = node
        .ledger
        .free_slots()
        .filter(|&s| after.is_none_or(|a| s > a))
        .take(want.max(1))
        .collect();
    if slots.is_empty() {
        return Err(ProtocolError::NoFreeSlot);
    }
    let mut atim = WireFrame::control(FrameKind::Atim, node.id, peer, slots, cfg);
    let head = node.tx_queue.iter().find(|p| node.next_hop(p.sink) == Some(peer));
    atim.payload_id = head.map(|p| p.id);
    atim.flow_dst = head.map(|p| p.sink);
    Ok(atim)
}

/// Receiver's answer to an ATIM.
///
/// Grants the proposed slots that are also free here. If none are, the
/// receiver offers its own lowest free slot instead. An empty grant is a
/// rejection.
pub fn grant_slots(receiver: &NodeState, atim: &WireFrame, cfg: &FrameConfig) -> Result<WireFrame, ProtocolError> {
    if atim.kind != FrameKind::Atim {
        return Err(ProtocolError::WrongKind {
            expected: FrameKind::Atim,
            got: atim.kind,
        });
    }
    let overlap: Vec<SlotIndex> = atim
        .slot_list
        .iter()
        .copied()
        .filter(|&s| receiver.ledger.is_free(s))
        .collect();
    let grant = if overlap.is_empty() {
        receiver.ledger.free_slots().take(1).collect()
    } else {
        overlap
    };
    let mut ack = WireFrame::control(FrameKind::AtimAck, receiver.id, atim.src, grant, cfg);
    ack.payload_id = atim.payload_id;
    ack.flow_dst = atim.flow_dst;
    Ok(ack)
}

/// How the sender filters a grant before confirming it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfirmPolicy {
    /// Never confirm more than this many slots.
    pub want: usize,
    /// Only slots strictly after this one (forwarding chains).
    pub after: Option<SlotIndex>,
    /// Abort unless all `want` slots can be confirmed.
    pub all_or_nothing: bool,
}

impl ConfirmPolicy {
    pub fn any(want: usize) -> Self {
        ConfirmPolicy {
            want,
            after: None,
            all_or_nothing: false,
        }
    }
}

/// Sender side of the handshake: re-checks the grant against its own
/// ledger, commits what is still free and returns the ATIM_RES.
pub fn confirm_reservation(
    sender: &mut NodeState,
    ack: &WireFrame,
    policy: ConfirmPolicy,
    cfg: &FrameConfig,
) -> Result<WireFrame, ProtocolError> {
    if ack.kind != FrameKind::AtimAck {
        return Err(ProtocolError::WrongKind {
            expected: FrameKind::AtimAck,
            got: ack.kind,
        });
    }
    if ack.slot_list.is_empty() {
        return Err(ProtocolError::Rejected);
    }
    let peer = ack.src;
    let confirmed: Vec<SlotIndex> = ack
        .slot_list
        .iter()
        .copied()
        .filter(|&s| sender.ledger.is_free(s) && policy.after.is_none_or(|a| s > a))
        .take(policy.want.max(1))
        .collect();
    if confirmed.is_empty() {
        return Err(ProtocolError::EmptyConfirmation);
    }
    if policy.all_or_nothing && confirmed.len() < policy.want {
        return Err(ProtocolError::PartialGrant);
    }
    for &s in &confirmed {
        sender.ledger.commit(
            s,
            Reservation {
                peer,
                direction: Direction::Send,
            },
        )?;
    }
    let mut res = WireFrame::control(FrameKind::AtimRes, sender.id, peer, confirmed, cfg);
    res.payload_id = ack.payload_id;
    res.flow_dst = ack.flow_dst;
    Ok(res)
}

/// Receiver commits the slots named in an ATIM_RES addressed to it.
pub fn accept_reservation(receiver: &mut NodeState, res: &WireFrame) -> Result<(), ProtocolError> {
    if res.kind != FrameKind::AtimRes {
        return Err(ProtocolError::WrongKind {
            expected: FrameKind::AtimRes,
            got: res.kind,
        });
    }
    for &s in &res.slot_list {
        receiver.ledger.commit(
            s,
            Reservation {
                peer: res.src,
                direction: Direction::Receive,
            },
        )?;
    }
    Ok(())
}

/// Bookkeeping for a frame heard but not addressed to `node`.
pub fn overhear(node: &mut NodeState, frame: &WireFrame) {
    if matches!(frame.kind, FrameKind::AtimAck | FrameKind::AtimRes) && !frame.dst.is(node.id) {
        node.ledger.mark_busy(&frame.slot_list);
    }
}

/// Minislot for this frame's request, uniform over the active window.
pub fn atim_window_access<R: Rng + ?Sized>(rng: &mut R, cfg: &FrameConfig) -> u32 {
    rng.random_range(0..cfg.atim_minislots)
}

/// Outbound negotiation an intermediate hop starts right after committing
/// an inbound reservation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPlan {
    pub peer: NodeId,
    pub flow_dst: NodeId,
    pub want: usize,
    /// Outbound slots must come strictly after this inbound slot.
    pub after: SlotIndex,
    pub minislot: u32,
}

impl ChainPlan {
    pub fn policy(&self) -> ConfirmPolicy {
        ConfirmPolicy {
            want: self.want,
            after: Some(self.after),
            all_or_nothing: true,
        }
    }
}

/// Plans the next hop of a forwarding chain.
///
/// The outbound handshake goes in the first minislot after `current` that
/// `node` has not already used. It fails with
/// [`ProtocolError::WindowExhausted`] when the window has no such minislot
/// and with [`ProtocolError::NoFreeSlot`] when fewer than `inbound.len()`
/// free slots remain after the last inbound slot; either way the packets
/// wait for the next frame.
pub fn forward_chain_reserve(
    node: &NodeState,
    inbound: &[SlotIndex],
    flow_dst: NodeId,
    current: u32,
    used_minislots: &[u32],
    cfg: &FrameConfig,
) -> Result<ChainPlan, ProtocolError> {
    let after = *inbound.iter().max().ok_or(ProtocolError::NoFreeSlot)?;
    if flow_dst == node.id {
        return Err(ProtocolError::NoFreeSlot);
    }
    let peer = node.next_hop(flow_dst).ok_or(ProtocolError::NoFreeSlot)?;
    let want = inbound.len();
    let room = node.ledger.free_slots().filter(|&s| s > after).count();
    if room < want {
        return Err(ProtocolError::NoFreeSlot);
    }
    let minislot = (current + 1..cfg.atim_minislots)
        .find(|m| !used_minislots.contains(m))
        .ok_or(ProtocolError::WindowExhausted)?;
    Ok(ChainPlan {
        peer,
        flow_dst,
        want,
        after,
        minislot,
    })
}
