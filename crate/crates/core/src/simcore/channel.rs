use super::{Tick, Topology};
use crate::protocol::{NodeId, RadioMode};

/// Handle for one transmission on the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxId(pub u64);

/// What one link-neighbour made of a finished transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Received(NodeId),
    Lost(NodeId),
}

impl Outcome {
    pub fn node(self) -> NodeId {
        match self {
            Outcome::Received(n) | Outcome::Lost(n) => n,
        }
    }

    pub fn is_received(self) -> bool {
        matches!(self, Outcome::Received(_))
    }
}

#[derive(Debug, Clone)]
struct Incoming {
    tx: TxId,
    start: Tick,
    end: Tick,
    corrupted: bool,
}

#[derive(Debug, Clone, Default)]
struct Radio {
    awake: bool,
    transmitting: Option<TxId>,
    incoming: Vec<Incoming>,
}

#[derive(Debug, Clone)]
struct OnAir {
    src: NodeId,
    end: Tick,
}

/// Shared medium with all-or-nothing collisions at each receiver.
///
/// A frame reaches every interference-neighbour of its sender; a
/// link-neighbour decodes it only if the radio was awake and not
/// transmitting for the whole frame and nothing else overlapped it there.
/// Transmissions occupy `[start, end)`, so back-to-back frames do not
/// collide.
#[derive(Debug, Clone)]
pub struct Channel {
    topology: Topology,
    radios: Vec<Radio>,
    on_air: Vec<(TxId, OnAir)>,
    next_id: u64,
}

impl Channel {
    pub fn new(topology: Topology) -> Self {
        let n = topology.node_count();
        Channel {
            topology,
            radios: vec![Radio::default(); n],
            on_air: Vec::new(),
            next_id: 0,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn is_awake(&self, node: NodeId) -> bool {
        self.radios[node.index()].awake
    }

    pub fn is_transmitting(&self, node: NodeId) -> bool {
        self.radios[node.index()].transmitting.is_some()
    }

    /// Waking up does not rescue a frame that is already half over;
    /// falling asleep destroys whatever was being received.
    pub fn set_awake(&mut self, node: NodeId, awake: bool, now: Tick) {
        let radio = &mut self.radios[node.index()];
        if radio.awake == awake {
            return;
        }
        radio.awake = awake;
        for inc in radio.incoming.iter_mut().filter(|i| i.end > now) {
            inc.corrupted = true;
        }
    }

    /// Puts a frame on the air from `now` to `end`.
    pub fn start_tx(&mut self, src: NodeId, now: Tick, end: Tick) -> TxId {
        assert!(end > now, "zero-length transmission");
        let id = TxId(self.next_id);
        self.next_id += 1;
        let me = &mut self.radios[src.index()];
        assert!(me.transmitting.is_none(), "node {src} already transmitting");
        assert!(me.awake, "node {src} transmits while asleep");
        me.transmitting = Some(id);
        for inc in me.incoming.iter_mut().filter(|i| i.end > now) {
            inc.corrupted = true;
        }
        for &r in self.topology.interferers(src) {
            let radio = &mut self.radios[r.index()];
            let mut corrupted = !radio.awake || radio.transmitting.is_some();
            for other in radio.incoming.iter_mut().filter(|i| i.end > now) {
                other.corrupted = true;
                corrupted = true;
            }
            radio.incoming.push(Incoming {
                tx: id,
                start: now,
                end,
                corrupted,
            });
        }
        self.on_air.push((id, OnAir { src, end }));
        id
    }

    /// Takes a finished frame off the air. Returns one outcome per
    /// link-neighbour of the sender, ascending by id.
    pub fn finish_tx(&mut self, id: TxId, now: Tick) -> (NodeId, Vec<Outcome>) {
        let pos = self
            .on_air
            .iter()
            .position(|(t, _)| *t == id)
            .expect("finishing a transmission that is not on the air");
        let (_, air) = self.on_air.swap_remove(pos);
        debug_assert_eq!(air.end, now);
        let src = air.src;
        self.radios[src.index()].transmitting = None;
        let mut outcomes = Vec::new();
        for &r in self.topology.interferers(src) {
            let radio = &mut self.radios[r.index()];
            let Some(i) = radio.incoming.iter().position(|inc| inc.tx == id) else {
                continue;
            };
            let inc = radio.incoming.swap_remove(i);
            if self.topology.linked(src, r) {
                let ok = !inc.corrupted && radio.awake;
                outcomes.push(if ok { Outcome::Received(r) } else { Outcome::Lost(r) });
            }
        }
        outcomes.sort_by_key(|o| o.node());
        (src, outcomes)
    }

    /// Energy on the air that started before `now` (carrier sense).
    pub fn carrier_busy(&self, node: NodeId, now: Tick) -> bool {
        self.radios[node.index()]
            .incoming
            .iter()
            .any(|i| i.start < now && i.end > now)
    }

    pub fn mode(&self, node: NodeId, now: Tick) -> RadioMode {
        let radio = &self.radios[node.index()];
        if radio.transmitting.is_some() {
            RadioMode::Tx
        } else if !radio.awake {
            RadioMode::Sleep
        } else if radio.incoming.iter().any(|i| i.start <= now && i.end > now) {
            RadioMode::Rx
        } else {
            RadioMode::IdleListen
        }
    }
}
