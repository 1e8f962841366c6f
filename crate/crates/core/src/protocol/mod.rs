//! Per-node MAC logic: frame layout, wire frames, slot bookkeeping, the
//! H-MAC three-way slot negotiation and the S-MAC frame-start contention
//! baseline.
//!
//! Nothing in here touches the clock or the channel. The simulator feeds
//! decoded frames in and transmits whatever comes back out.

use std::fmt;

use thiserror::Error;

use crate::simcore::Tick;

pub mod hmac;
mod ledger;
mod node;
pub mod smac;

pub use ledger::{Direction, Reservation, SlotLedger};
pub use node::{Exchange, InFlight, NodeState, Packet, RadioMode, Stage};

/// Index of a data slot inside the sleep period.
pub type SlotIndex = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Addr {
    Node(NodeId),
    Broadcast,
}

impl Addr {
    pub fn is(self, id: NodeId) -> bool {
        matches!(self, Addr::Node(n) if n == id)
    }
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Addr::Node(n) => write!(f, "{n}"),
            Addr::Broadcast => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Atim,
    AtimAck,
    AtimRes,
    Data,
    DataAck,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Atim => "ATIM",
            FrameKind::AtimAck => "ATIM_ACK",
            FrameKind::AtimRes => "ATIM_RES",
            FrameKind::Data => "DATA",
            FrameKind::DataAck => "DATA_ACK",
        }
    }

    pub fn is_control(self) -> bool {
        matches!(self, FrameKind::Atim | FrameKind::AtimAck | FrameKind::AtimRes)
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A frame on the air.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireFrame {
    pub kind: FrameKind,
    pub src: NodeId,
    pub dst: Addr,
    /// Proposed (ATIM), granted (ATIM_ACK) or confirmed (ATIM_RES) slots,
    /// ascending. Empty for DATA/DATA_ACK; an empty ATIM_ACK is a rejection.
    pub slot_list: Vec<SlotIndex>,
    pub payload_id: Option<u64>,
    pub tx_time: Tick,
    /// Final destination of the packets a negotiation is about, so the
    /// receiver can chain the next hop.
    pub flow_dst: Option<NodeId>,
    /// Remaining exchange time after this frame (S-MAC DATA only).
    pub nav: Tick,
    /// The application packet a DATA frame carries.
    pub packet: Option<Packet>,
}

impl WireFrame {
    pub fn control(kind: FrameKind, src: NodeId, dst: NodeId, slots: Vec<SlotIndex>, cfg: &FrameConfig) -> Self {
        WireFrame {
            kind,
            src,
            dst: Addr::Node(dst),
            slot_list: slots,
            payload_id: None,
            tx_time: cfg.ctrl_tx,
            flow_dst: None,
            nav: 0,
            packet: None,
        }
    }

    pub fn data(src: NodeId, dst: NodeId, packet: &Packet, cfg: &FrameConfig) -> Self {
        WireFrame {
            kind: FrameKind::Data,
            src,
            dst: Addr::Node(dst),
            slot_list: Vec::new(),
            payload_id: Some(packet.id),
            tx_time: cfg.data_tx,
            flow_dst: Some(packet.sink),
            nav: 0,
            packet: Some(packet.clone()),
        }
    }

    pub fn data_ack(src: NodeId, dst: NodeId, payload_id: Option<u64>, cfg: &FrameConfig) -> Self {
        WireFrame {
            kind: FrameKind::DataAck,
            src,
            dst: Addr::Node(dst),
            slot_list: Vec::new(),
            payload_id,
            tx_time: cfg.ack_tx,
            flow_dst: None,
            nav: 0,
            packet: None,
        }
    }

    /// Checks the slot-list rules against a frame layout.
    pub fn validate(&self, cfg: &FrameConfig) -> Result<(), ProtocolError> {
        if let Some(&s) = self.slot_list.iter().find(|&&s| s >= cfg.data_slots) {
            return Err(ProtocolError::SlotOutOfRange {
                slot: s,
                data_slots: cfg.data_slots,
            });
        }
        let needs_slots = matches!(self.kind, FrameKind::Atim | FrameKind::AtimRes);
        if needs_slots && self.slot_list.is_empty() {
            return Err(ProtocolError::EmptySlotList(self.kind));
        }
        if !self.kind.is_control() && !self.slot_list.is_empty() {
            return Err(ProtocolError::UnexpectedSlots(self.kind));
        }
        if self.slot_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProtocolError::UnsortedSlots);
        }
        Ok(())
    }
}

/// Frame layout shared by both protocols, in simulator ticks.
///
/// The cycle is `active_len` of listening (the ATIM window) followed by
/// `data_slots` slots of `slot_len`. S-MAC uses the same cycle and treats
/// the whole sleep part as one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    pub active_len: Tick,
    pub data_slots: SlotIndex,
    pub slot_len: Tick,
    /// Contention opportunities inside the active window.
    pub atim_minislots: u32,
    pub guard: Tick,
    pub data_tx: Tick,
    pub ack_tx: Tick,
    pub ctrl_tx: Tick,
    /// S-MAC backoff granularity.
    pub backoff_slot: Tick,
    /// S-MAC backoff draws are uniform over `0..backoff_window`.
    pub backoff_window: u32,
}

impl Default for FrameConfig {
    /// 20 slot-lengths per cycle: 18 data slots plus a two-slot active
    /// window that holds two handshake minislots (10% duty cycle, 1 s cycle).
    fn default() -> Self {
        FrameConfig {
            active_len: 100_000,
            data_slots: 18,
            slot_len: 50_000,
            atim_minislots: 2,
            guard: 5_000,
            data_tx: 40_000,
            ack_tx: 5_000,
            ctrl_tx: 500,
            backoff_slot: 1_000,
            backoff_window: 32,
        }
    }
}

impl FrameConfig {
    pub fn cycle_len(&self) -> Tick {
        self.active_len + Tick::from(self.data_slots) * self.slot_len
    }

    pub fn sleep_len(&self) -> Tick {
        Tick::from(self.data_slots) * self.slot_len
    }

    pub fn minislot_len(&self) -> Tick {
        self.active_len / Tick::from(self.atim_minislots.max(1))
    }

    /// Offset of data slot `slot` from the start of its frame.
    pub fn slot_offset(&self, slot: SlotIndex) -> Tick {
        self.active_len + Tick::from(slot) * self.slot_len
    }

    pub fn duty_cycle(&self) -> f64 {
        self.active_len as f64 / self.cycle_len() as f64
    }

    /// Airtime of a full ATIM / ATIM_ACK / ATIM_RES exchange.
    pub fn handshake_len(&self) -> Tick {
        3 * self.ctrl_tx
    }

    /// Mean S-MAC backoff.
    pub fn mean_backoff(&self) -> Tick {
        self.backoff_slot * Tick::from(self.backoff_window.saturating_sub(1)) / 2
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |field: &'static str, reason: String| Err(ProtocolError::Config { field, reason });
        if self.data_slots == 0 {
            return bad("data_slots", "need at least one data slot".into());
        }
        if self.active_len == 0 {
            return bad("active_len", "must be > 0".into());
        }
        if self.atim_minislots == 0 {
            return bad("atim_minislots", "must be >= 1".into());
        }
        for (field, v) in [
            ("data_tx", self.data_tx),
            ("ack_tx", self.ack_tx),
            ("ctrl_tx", self.ctrl_tx),
            ("backoff_slot", self.backoff_slot),
        ] {
            if v == 0 {
                return bad(field, "must be > 0".into());
            }
        }
        if self.backoff_window == 0 {
            return bad("backoff_window", "must be >= 1".into());
        }
        // the ack timeout fires one tick after DATA_ACK, inside the guard
        if self.guard == 0 {
            return bad("guard", "must be at least one tick".into());
        }
        if self.data_tx + self.ack_tx + self.guard > self.slot_len {
            return bad(
                "slot_len",
                format!(
                    "{} ticks cannot hold DATA {} + DATA_ACK {} + guard {}",
                    self.slot_len, self.data_tx, self.ack_tx, self.guard
                ),
            );
        }
        if self.handshake_len() > self.minislot_len() {
            return bad(
                "atim_minislots",
                format!(
                    "{} minislots of {} ticks cannot hold a {}-tick handshake",
                    self.atim_minislots,
                    self.minislot_len(),
                    self.handshake_len()
                ),
            );
        }
        let contention = self.backoff_slot * Tick::from(self.backoff_window);
        if contention + self.data_tx + self.ack_tx > self.cycle_len() {
            return bad("backoff_window", "contention plus one exchange exceeds the cycle".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid frame configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("no free data slot this frame")]
    NoFreeSlot,
    #[error("every granted slot is now busy at the sender")]
    EmptyConfirmation,
    #[error("reservation rejected by the receiver")]
    Rejected,
    #[error("grant covers fewer slots than the chain needs")]
    PartialGrant,
    #[error("the active window has no minislot left for forwarding")]
    WindowExhausted,
    #[error("slot {slot} outside 0..{data_slots}")]
    SlotOutOfRange { slot: SlotIndex, data_slots: SlotIndex },
    #[error("slot {0} already reserved")]
    SlotTaken(SlotIndex),
    #[error("{0} frame needs a nonempty slot list")]
    EmptySlotList(FrameKind),
    #[error("{0} frame must not carry slots")]
    UnexpectedSlots(FrameKind),
    #[error("slot list not strictly ascending")]
    UnsortedSlots,
    #[error("expected {expected}, got {got}")]
    WrongKind { expected: FrameKind, got: FrameKind },
}
