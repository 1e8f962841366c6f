use std::collections::{BTreeMap, HashSet, VecDeque};

use super::{NodeId, SlotIndex, SlotLedger};
use crate::simcore::Tick;

/// An application packet travelling from `source` to `sink`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub source: NodeId,
    pub sink: NodeId,
    pub created: Tick,
    pub hops: u32,
    /// Index of the traffic flow that generated it.
    pub flow: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RadioMode {
    Sleep,
    IdleListen,
    Rx,
    Tx,
}

impl RadioMode {
    pub const ALL: [RadioMode; 4] = [RadioMode::Sleep, RadioMode::IdleListen, RadioMode::Rx, RadioMode::Tx];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RadioMode::Sleep => "sleep",
            RadioMode::IdleListen => "idle",
            RadioMode::Rx => "rx",
            RadioMode::Tx => "tx",
        }
    }
}

/// Where a negotiation with one peer stands this frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// ATIM scheduled for the given minislot.
    Planned { minislot: u32 },
    AwaitingAck,
    Confirmed,
    Failed,
}

/// A DATA frame waiting for its DATA_ACK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InFlight {
    pub packet: Packet,
    pub peer: NodeId,
}

/// An S-MAC transfer this node won the channel for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exchange {
    pub peer: NodeId,
    pub remaining: u32,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub tx_queue: VecDeque<Packet>,
    pub queue_capacity: usize,
    pub ledger: SlotLedger,
    pub radio_mode: RadioMode,
    pub pending_handshakes: BTreeMap<NodeId, Stage>,
    pub in_flight: Option<InFlight>,
    /// S-MAC only.
    pub exchange: Option<Exchange>,
    /// S-MAC receivers stay awake until here after the listen window.
    pub listen_until: Tick,
    /// Next hop per destination, indexed by destination id.
    next_hop: Vec<Option<NodeId>>,
    seen: HashSet<u64>,
    pub dropped: u64,
}

impl NodeState {
    pub fn new(id: NodeId, data_slots: SlotIndex, queue_capacity: usize, next_hop: Vec<Option<NodeId>>) -> Self {
        NodeState {
            id,
            tx_queue: VecDeque::new(),
            queue_capacity,
            ledger: SlotLedger::new(data_slots),
            radio_mode: RadioMode::IdleListen,
            pending_handshakes: BTreeMap::new(),
            in_flight: None,
            exchange: None,
            listen_until: 0,
            next_hop,
            seen: HashSet::new(),
            dropped: 0,
        }
    }

    pub fn next_hop(&self, dest: NodeId) -> Option<NodeId> {
        self.next_hop.get(dest.index()).copied().flatten()
    }

    /// Drop-tail enqueue. Returns false when the packet was dropped.
    pub fn enqueue(&mut self, packet: Packet) -> bool {
        if self.tx_queue.len() >= self.queue_capacity {
            self.dropped += 1;
            return false;
        }
        self.tx_queue.push_back(packet);
        true
    }

    /// Puts an unacknowledged packet back at the head of the queue.
    pub fn requeue_front(&mut self, packet: Packet) {
        self.tx_queue.push_front(packet);
    }

    /// Peer of the head-of-line packet.
    pub fn head_peer(&self) -> Option<NodeId> {
        self.tx_queue.front().and_then(|p| self.next_hop(p.sink))
    }

    pub fn queued_for(&self, peer: NodeId) -> usize {
        self.tx_queue
            .iter()
            .filter(|p| self.next_hop(p.sink) == Some(peer))
            .count()
    }

    /// Removes the oldest packet routed through `peer`.
    pub fn take_for(&mut self, peer: NodeId) -> Option<Packet> {
        let pos = self
            .tx_queue
            .iter()
            .position(|p| self.next_hop(p.sink) == Some(peer))?;
        self.tx_queue.remove(pos)
    }

    /// Records a packet id; false if it was already received once.
    pub fn first_sighting(&mut self, id: u64) -> bool {
        self.seen.insert(id)
    }

    /// Frame-boundary housekeeping shared by both protocols.
    pub fn start_frame(&mut self, epoch: u64) {
        self.ledger.reset(epoch);
        self.pending_handshakes.clear();
        self.exchange = None;
    }
}
