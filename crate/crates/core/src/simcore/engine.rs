use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::{debug, trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trace::{TraceKind, TraceLine};
use super::{Channel, EnergyLedger, EventQueue, Tick, TxId};
use crate::metrics::{Delivery, MetricsLedger};
use crate::protocol::hmac::{
    accept_reservation, atim_window_access, compose_atim, compose_atim_after, confirm_reservation, forward_chain_reserve,
    grant_slots, overhear, ConfirmPolicy,
};
use crate::protocol::smac::{exchange_capacity, smac_frame_step, SmacAction};
use crate::protocol::{
    Addr, Direction, Exchange, FrameConfig, FrameKind, InFlight, NodeId, NodeState, Packet, RadioMode, SlotIndex, Stage, WireFrame,
};
use crate::scenario::{Pattern, Protocol, Scenario, ScenarioError};

#[derive(Debug, Clone)]
enum Event {
    FrameStart(u64),
    ActiveEnd,
    SlotStart(SlotIndex),
    Arrival(usize),
    Handshake { node: NodeId, idx: usize },
    TxEnd(TxId),
    Backoff(NodeId),
    AckTimeout { node: NodeId, packet: u64 },
    Doze(NodeId),
}

#[derive(Debug, Clone)]
struct Negotiation {
    peer: NodeId,
    minislot: u32,
    policy: ConfirmPolicy,
    /// Set for forwarding-chain requests.
    chain: Option<(SlotIndex, NodeId)>,
}

#[derive(Debug, Clone)]
struct Flow {
    src: NodeId,
    dst: NodeId,
    outstanding: u64,
}

/// One replication of a scenario.
pub struct Simulation {
    sc: Scenario,
    cfg: FrameConfig,
    queue: EventQueue<Event>,
    channel: Channel,
    nodes: Vec<NodeState>,
    rngs: Vec<ChaCha8Rng>,
    traffic_rng: ChaCha8Rng,
    modes: Vec<RadioMode>,
    on_air: BTreeMap<TxId, WireFrame>,
    negotiations: Vec<Vec<Negotiation>>,
    active_negotiation: Vec<Option<usize>>,
    used_minislots: Vec<Vec<u32>>,
    flows: Vec<Flow>,
    next_packet: u64,
    frame: u64,
    frame_start: Tick,
    horizon: Tick,
    metrics: MetricsLedger,
    trace: Option<String>,
    seq: u64,
}

impl Simulation {
    pub fn new(scenario: &Scenario, seed: u64) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let topo = scenario.build_topology();
        let n = topo.node_count();
        let nodes = topo
            .nodes()
            .map(|id| NodeState::new(id, scenario.frame.data_slots, scenario.queue_capacity, topo.routing_table(id)))
            .collect();
        let rngs = (0..n as u64)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i + 1);
                r
            })
            .collect();
        let flows = scenario
            .flows()
            .into_iter()
            .map(|(src, dst)| Flow { src, dst, outstanding: 0 })
            .collect();
        let metrics = MetricsLedger::new(
            EnergyLedger::new(n),
            scenario.energy,
            scenario.horizon_ticks(),
            scenario.warmup_ticks(),
            scenario.frame.cycle_len(),
            scenario.fingerprint(),
        );
        Ok(Simulation {
            cfg: scenario.frame,
            queue: EventQueue::new(),
            channel: Channel::new(topo),
            nodes,
            rngs,
            traffic_rng: ChaCha8Rng::seed_from_u64(seed),
            modes: vec![RadioMode::Sleep; n],
            on_air: BTreeMap::new(),
            negotiations: vec![Vec::new(); n],
            active_negotiation: vec![None; n],
            used_minislots: vec![Vec::new(); n],
            flows,
            next_packet: 0,
            frame: 0,
            frame_start: 0,
            horizon: scenario.horizon_ticks(),
            metrics,
            trace: None,
            seq: 0,
            sc: scenario.clone(),
        })
    }

    /// Records an event trace while running.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(String::new());
        self
    }

    /// Runs to the horizon and returns the ledger plus the trace (empty
    /// unless enabled).
    pub fn run(mut self) -> (MetricsLedger, String) {
        self.queue.schedule(0, Event::FrameStart(0));
        self.schedule_traffic();
        while let Some(t) = self.queue.peek_time() {
            if t >= self.horizon {
                break;
            }
            let ev = self.queue.pop().expect("peeked");
            self.seq = ev.seq;
            self.dispatch(ev.event);
            self.refresh_modes(ev.time);
        }
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let from = self.metrics.energy.accounted_until(id);
            self.metrics.energy.account(id, self.modes[i], from, self.horizon);
        }
        self.metrics.dropped = self.nodes.iter().map(|n| n.dropped).sum();
        (self.metrics, self.trace.unwrap_or_default())
    }

    fn now(&self) -> Tick {
        self.queue.now()
    }

    fn emit(&mut self, line: TraceLine) {
        if let Some(buf) = self.trace.as_mut() {
            writeln!(buf, "{line}").expect("writing to a String");
        }
    }

    fn line(&self, kind: TraceKind) -> TraceLine {
        TraceLine::new(self.now(), self.seq, kind)
    }

    fn frame_line(&self, kind: TraceKind, subject: NodeId, f: &WireFrame) -> TraceLine {
        let mut l = self.line(kind);
        l.subject = Some(subject);
        l.frame_kind = Some(f.kind);
        l.src = Some(f.src);
        l.dst = Some(f.dst);
        l.slots = f.slot_list.clone();
        l.payload = f.payload_id;
        l
    }

    fn refresh_modes(&mut self, now: Tick) {
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let mode = self.channel.mode(id, now);
            if mode != self.modes[i] {
                let from = self.metrics.energy.accounted_until(id);
                self.metrics.energy.account(id, self.modes[i], from, now);
                self.modes[i] = mode;
                self.nodes[i].radio_mode = mode;
            }
        }
    }

    fn dispatch(&mut self, ev: Event) {
        trace!("t={} {:?}", self.now(), ev);
        match ev {
            Event::FrameStart(f) => self.on_frame_start(f),
            Event::ActiveEnd => self.on_active_end(),
            Event::SlotStart(s) => self.on_slot_start(s),
            Event::Arrival(flow) => self.on_arrival(flow),
            Event::Handshake { node, idx } => self.on_handshake(node, idx),
            Event::TxEnd(id) => self.on_tx_end(id),
            Event::Backoff(node) => self.on_backoff(node),
            Event::AckTimeout { node, packet } => self.on_ack_timeout(node, packet),
            Event::Doze(node) => self.on_doze(node),
        }
    }

    // ---- traffic ----

    fn schedule_traffic(&mut self) {
        let start = self.sc.warmup_ticks();
        let cycle = self.cfg.cycle_len();
        for i in 0..self.flows.len() {
            let at = match self.sc.traffic.pattern {
                Pattern::None => continue,
                Pattern::Single { offset: Some(o) } => start + o,
                Pattern::Single { offset: None } => start + self.traffic_rng.random_range(0..cycle),
                Pattern::Rate { per_frame } => start + self.traffic_rng.random_range(0..self.rate_interval(per_frame)),
                Pattern::Burst { .. } => start,
            };
            if at < self.horizon {
                self.queue.schedule(at, Event::Arrival(i));
            }
        }
    }

    fn rate_interval(&self, per_frame: f64) -> Tick {
        ((self.cfg.cycle_len() as f64 / per_frame).round() as Tick).max(1)
    }

    fn on_arrival(&mut self, flow: usize) {
        match self.sc.traffic.pattern {
            Pattern::None => {}
            Pattern::Single { .. } => self.spawn(flow),
            Pattern::Rate { per_frame } => {
                self.spawn(flow);
                let next = self.now() + self.rate_interval(per_frame);
                if next < self.horizon {
                    self.queue.schedule(next, Event::Arrival(flow));
                }
            }
            Pattern::Burst { size, .. } => {
                for _ in 0..size {
                    self.spawn(flow);
                }
            }
        }
    }

    fn spawn(&mut self, flow: usize) {
        let (src, dst) = (self.flows[flow].src, self.flows[flow].dst);
        let packet = Packet {
            id: self.next_packet,
            source: src,
            sink: dst,
            created: self.now(),
            hops: 0,
            flow,
        };
        self.next_packet += 1;
        self.metrics.generated += 1;
        self.flows[flow].outstanding += 1;
        let mut l = self.line(TraceKind::PacketArrival);
        l.subject = Some(src);
        l.dst = Some(Addr::Node(dst));
        l.payload = Some(packet.id);
        self.emit(l);
        let node = &mut self.nodes[src.index()];
        node.first_sighting(packet.id);
        if !node.enqueue(packet) {
            self.flows[flow].outstanding -= 1;
        }
    }

    // ---- frame schedule ----

    fn on_frame_start(&mut self, f: u64) {
        let now = self.now();
        self.frame = f;
        self.frame_start = now;
        let mut l = self.line(TraceKind::FrameBoundary);
        l.payload = Some(f);
        self.emit(l);
        for i in 0..self.nodes.len() {
            self.nodes[i].start_frame(f);
            self.nodes[i].listen_until = 0;
            self.negotiations[i].clear();
            self.active_negotiation[i] = None;
            self.used_minislots[i].clear();
            self.channel.set_awake(NodeId(i as u32), true, now);
        }
        match self.sc.protocol {
            Protocol::Hmac => self.plan_requests(),
            Protocol::Smac => self.plan_contention(),
        }
        self.queue.schedule(now + self.cfg.active_len, Event::ActiveEnd);
        if self.sc.protocol == Protocol::Hmac {
            for s in 0..self.cfg.data_slots {
                self.queue
                    .schedule(now + self.cfg.slot_offset(s), Event::SlotStart(s));
            }
        }
        let next = now + self.cfg.cycle_len();
        if next < self.horizon {
            self.queue.schedule(next, Event::FrameStart(f + 1));
        }
    }

    /// H-MAC: every node with traffic picks one minislot for its request.
    fn plan_requests(&mut self) {
        for i in 0..self.nodes.len() {
            let Some(peer) = self.nodes[i].head_peer() else {
                continue;
            };
            let minislot = atim_window_access(&mut self.rngs[i], &self.cfg);
            let want = self.nodes[i]
                .queued_for(peer)
                .min(usize::from(self.cfg.data_slots));
            self.schedule_negotiation(
                NodeId(i as u32),
                Negotiation {
                    peer,
                    minislot,
                    policy: ConfirmPolicy::any(want),
                    chain: None,
                },
            );
        }
    }

    fn schedule_negotiation(&mut self, node: NodeId, neg: Negotiation) {
        let i = node.index();
        let at = self.frame_start + Tick::from(neg.minislot) * self.cfg.minislot_len();
        self.used_minislots[i].push(neg.minislot);
        self.nodes[i]
            .pending_handshakes
            .insert(neg.peer, Stage::Planned { minislot: neg.minislot });
        self.negotiations[i].push(neg);
        let idx = self.negotiations[i].len() - 1;
        self.queue.schedule(at, Event::Handshake { node, idx });
    }

    /// S-MAC: every node with traffic draws a backoff.
    fn plan_contention(&mut self) {
        for i in 0..self.nodes.len() {
            let action = smac_frame_step(&self.nodes[i], &mut self.rngs[i], &self.cfg);
            if let Some(b) = action.backoff_ticks(&self.cfg) {
                let node = NodeId(i as u32);
                if let SmacAction::Contend { peer, .. } = action {
                    debug!("frame {} node {node} contends for {peer} after {b} ticks", self.frame);
                }
                self.queue.schedule(self.now() + b, Event::Backoff(node));
            }
        }
    }

    fn active_end(&self) -> Tick {
        self.frame_start + self.cfg.active_len
    }

    fn on_active_end(&mut self) {
        let now = self.now();
        self.emit(self.line(TraceKind::WindowEdge));
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let n = &self.nodes[i];
            let busy = self.channel.is_transmitting(id)
                || n.exchange.is_some()
                || n.in_flight.is_some()
                || n.listen_until > now;
            if !busy {
                self.channel.set_awake(id, false, now);
            }
        }
    }

    fn on_slot_start(&mut self, slot: SlotIndex) {
        let now = self.now();
        let mut l = self.line(TraceKind::SlotEdge);
        l.slots = vec![slot];
        self.emit(l);
        let done = now + self.cfg.data_tx + self.cfg.ack_tx + 1;
        // receivers first so they are awake when DATA starts
        for i in 0..self.nodes.len() {
            if let Some(r) = self.nodes[i].ledger.reservation(slot) {
                if r.direction == Direction::Receive {
                    let id = NodeId(i as u32);
                    self.channel.set_awake(id, true, now);
                    self.queue.schedule(done, Event::Doze(id));
                }
            }
        }
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let Some(r) = self.nodes[i].ledger.reservation(slot) else {
                continue;
            };
            if r.direction != Direction::Send {
                continue;
            }
            if let Some(packet) = self.nodes[i].take_for(r.peer) {
                self.channel.set_awake(id, true, now);
                self.send_data(id, r.peer, packet, 0);
            }
        }
    }

    fn send_data(&mut self, node: NodeId, peer: NodeId, packet: Packet, nav: Tick) {
        let mut frame = WireFrame::data(node, peer, &packet, &self.cfg);
        frame.nav = nav;
        let timeout = self.now() + self.cfg.data_tx + self.cfg.ack_tx + 1;
        self.queue.schedule(timeout, Event::AckTimeout { node, packet: packet.id });
        self.nodes[node.index()].in_flight = Some(InFlight { packet, peer });
        self.metrics.data_sent += 1;
        self.transmit(node, frame);
    }

    fn transmit(&mut self, src: NodeId, frame: WireFrame) {
        debug_assert!(frame.validate(&self.cfg).is_ok(), "{frame:?}");
        let now = self.now();
        let id = self.channel.start_tx(src, now, now + frame.tx_time);
        self.emit(self.frame_line(TraceKind::TxStart, src, &frame));
        self.queue.schedule(now + frame.tx_time, Event::TxEnd(id));
        self.on_air.insert(id, frame);
    }

    // ---- H-MAC handshake ----

    fn on_handshake(&mut self, node: NodeId, idx: usize) {
        let i = node.index();
        let neg = self.negotiations[i][idx].clone();
        if self.channel.is_transmitting(node) || !self.channel.is_awake(node) {
            self.nodes[i].pending_handshakes.insert(neg.peer, Stage::Failed);
            return;
        }
        let composed = match neg.chain {
            None => compose_atim(&self.nodes[i], neg.peer, neg.policy.want, &self.cfg),
            Some((after, _)) => compose_atim_after(&self.nodes[i], neg.peer, neg.policy.want, Some(after), &self.cfg),
        };
        match composed {
            Ok(mut atim) => {
                if let Some((_, flow_dst)) = neg.chain {
                    atim.flow_dst = Some(flow_dst);
                    atim.payload_id = None;
                }
                self.metrics.atim.sent += 1;
                self.active_negotiation[i] = Some(idx);
                self.nodes[i].pending_handshakes.insert(neg.peer, Stage::AwaitingAck);
                self.transmit(node, atim);
            }
            Err(e) => {
                debug!("node {node} skips request to {}: {e}", neg.peer);
                self.nodes[i].pending_handshakes.insert(neg.peer, Stage::Failed);
            }
        }
    }

    fn current_minislot(&self) -> u32 {
        ((self.now() - self.frame_start) / self.cfg.minislot_len()) as u32
    }

    // ---- reception ----

    fn on_tx_end(&mut self, id: TxId) {
        let now = self.now();
        let frame = self.on_air.remove(&id).expect("frame on air");
        let (src, outcomes) = self.channel.finish_tx(id, now);
        self.emit(self.frame_line(TraceKind::TxEnd, src, &frame));
        for o in &outcomes {
            let kind = if o.is_received() { TraceKind::RxOk } else { TraceKind::RxLost };
            self.emit(self.frame_line(kind, o.node(), &frame));
        }
        if frame.kind == FrameKind::Data {
            if let Addr::Node(dst) = frame.dst {
                if outcomes.iter().any(|o| o.node() == dst && !o.is_received()) {
                    self.metrics.data_lost += 1;
                }
            }
        }
        // sender-side wrap-up
        match (self.sc.protocol, frame.kind) {
            (Protocol::Hmac, FrameKind::DataAck) => self.channel.set_awake(src, false, now),
            (Protocol::Hmac, FrameKind::AtimRes) => self.active_negotiation[src.index()] = None,
            _ => {}
        }
        for o in outcomes.iter().filter(|o| o.is_received()) {
            self.receive(o.node(), &frame);
        }
    }

    fn receive(&mut self, node: NodeId, frame: &WireFrame) {
        let addressed = frame.dst.is(node);
        let i = node.index();
        match frame.kind {
            FrameKind::Atim if addressed => {
                self.metrics.atim.decoded += 1;
                match grant_slots(&self.nodes[i], frame, &self.cfg) {
                    Ok(ack) => self.transmit(node, ack),
                    Err(e) => debug!("node {node} cannot answer ATIM: {e}"),
                }
            }
            FrameKind::AtimAck if addressed => self.on_grant(node, frame),
            FrameKind::AtimRes if addressed => self.on_confirmation(node, frame),
            FrameKind::AtimAck | FrameKind::AtimRes => overhear(&mut self.nodes[i], frame),
            FrameKind::Data if addressed => self.on_data(node, frame),
            FrameKind::DataAck if addressed => self.on_data_ack(node, frame),
            _ => {}
        }
    }

    fn on_grant(&mut self, node: NodeId, ack: &WireFrame) {
        let i = node.index();
        let Some(idx) = self.active_negotiation[i].take() else {
            return;
        };
        let neg = self.negotiations[i][idx].clone();
        if neg.peer != ack.src {
            return;
        }
        match confirm_reservation(&mut self.nodes[i], ack, neg.policy, &self.cfg) {
            Ok(res) => {
                self.nodes[i].pending_handshakes.insert(neg.peer, Stage::Confirmed);
                self.active_negotiation[i] = Some(idx);
                self.transmit(node, res);
            }
            Err(e) => {
                debug!("node {node} abandons reservation with {}: {e}", neg.peer);
                self.nodes[i].pending_handshakes.insert(neg.peer, Stage::Failed);
            }
        }
    }

    fn on_confirmation(&mut self, node: NodeId, res: &WireFrame) {
        let i = node.index();
        if let Err(e) = accept_reservation(&mut self.nodes[i], res) {
            debug!("node {node} cannot commit {:?}: {e}", res.slot_list);
            return;
        }
        if !self.sc.forward_chain {
            return;
        }
        let Some(flow_dst) = res.flow_dst else {
            return;
        };
        let current = self.current_minislot();
        match forward_chain_reserve(&self.nodes[i], &res.slot_list, flow_dst, current, &self.used_minislots[i], &self.cfg) {
            Ok(plan) => {
                let neg = Negotiation {
                    peer: plan.peer,
                    minislot: plan.minislot,
                    policy: plan.policy(),
                    chain: Some((plan.after, plan.flow_dst)),
                };
                self.schedule_negotiation(node, neg);
            }
            Err(e) => debug!("node {node} defers forwarding to next frame: {e}"),
        }
    }

    fn on_data(&mut self, node: NodeId, frame: &WireFrame) {
        let now = self.now();
        let i = node.index();
        let id = frame.payload_id.expect("DATA carries a packet id");
        if self.sc.protocol == Protocol::Smac {
            let until = now + frame.nav;
            let n = &mut self.nodes[i];
            n.listen_until = n.listen_until.max(until);
            self.queue.schedule(until, Event::Doze(node));
        }
        if self.nodes[i].first_sighting(id) {
            let mut packet = frame.packet.clone().expect("DATA carries its packet");
            packet.hops += 1;
            self.metrics.hop_advances.push((id, self.frame));
            if packet.sink == node {
                self.deliver(packet, now);
            } else {
                let flow = packet.flow;
                if !self.nodes[i].enqueue(packet) {
                    self.retire(flow);
                }
            }
        }
        let ack = WireFrame::data_ack(node, frame.src, Some(id), &self.cfg);
        self.transmit(node, ack);
    }

    fn deliver(&mut self, packet: Packet, now: Tick) {
        self.metrics.deliveries.push(Delivery {
            packet: packet.id,
            source: packet.source,
            sink: packet.sink,
            created: packet.created,
            delivered: now,
            hops: packet.hops,
        });
        self.retire(packet.flow);
    }

    /// A packet of `flow` left the network (delivered or dropped by a
    /// relay). Closed bursts re-arm once none are left in flight.
    fn retire(&mut self, flow: usize) {
        self.flows[flow].outstanding -= 1;
        if let Pattern::Burst { size, closed: true } = self.sc.traffic.pattern {
            if self.flows[flow].outstanding == 0 {
                for _ in 0..size {
                    self.spawn(flow);
                }
            }
        }
    }

    fn on_data_ack(&mut self, node: NodeId, ack: &WireFrame) {
        let now = self.now();
        let i = node.index();
        let matches = self.nodes[i]
            .in_flight
            .as_ref()
            .is_some_and(|f| Some(f.packet.id) == ack.payload_id && f.peer == ack.src);
        if !matches {
            return;
        }
        self.nodes[i].in_flight = None;
        match self.sc.protocol {
            Protocol::Hmac => self.channel.set_awake(node, false, now),
            Protocol::Smac => self.continue_exchange(node),
        }
    }

    fn on_ack_timeout(&mut self, node: NodeId, packet: u64) {
        let now = self.now();
        let i = node.index();
        let expired = self.nodes[i]
            .in_flight
            .as_ref()
            .is_some_and(|f| f.packet.id == packet);
        if !expired {
            return;
        }
        let f = self.nodes[i].in_flight.take().expect("checked");
        let mut l = self.line(TraceKind::Timer);
        l.subject = Some(node);
        l.dst = Some(Addr::Node(f.peer));
        l.payload = Some(packet);
        self.emit(l);
        self.nodes[i].requeue_front(f.packet);
        self.nodes[i].exchange = None;
        if self.sc.protocol == Protocol::Hmac || now >= self.active_end() {
            self.channel.set_awake(node, false, now);
        }
    }

    fn on_doze(&mut self, node: NodeId) {
        let now = self.now();
        let n = &self.nodes[node.index()];
        let idle = !self.channel.is_transmitting(node) && n.in_flight.is_none() && n.exchange.is_none();
        let sleepy = match self.sc.protocol {
            Protocol::Hmac => true,
            Protocol::Smac => now >= self.active_end() && n.listen_until <= now,
        };
        if idle && sleepy {
            self.channel.set_awake(node, false, now);
        }
    }

    // ---- S-MAC exchange ----

    fn on_backoff(&mut self, node: NodeId) {
        let now = self.now();
        let i = node.index();
        let n = &self.nodes[i];
        let lost = !self.channel.is_awake(node)
            || self.channel.is_transmitting(node)
            || self.channel.carrier_busy(node, now)
            || n.listen_until > now
            || n.in_flight.is_some();
        if lost {
            return;
        }
        let Some(peer) = n.head_peer() else {
            return;
        };
        let room = exchange_capacity(now - self.frame_start, &self.cfg);
        let count = (n.queued_for(peer) as u32).min(room);
        if count == 0 {
            return;
        }
        self.nodes[i].exchange = Some(Exchange { peer, remaining: count });
        self.continue_exchange(node);
    }

    /// Sends the next DATA of a won exchange, or closes it.
    fn continue_exchange(&mut self, node: NodeId) {
        let now = self.now();
        let i = node.index();
        let Some(mut ex) = self.nodes[i].exchange else {
            return;
        };
        let next = if ex.remaining > 0 { self.nodes[i].take_for(ex.peer) } else { None };
        match next {
            Some(packet) => {
                ex.remaining -= 1;
                self.nodes[i].exchange = Some(ex);
                let nav = Tick::from(ex.remaining) * (self.cfg.data_tx + self.cfg.ack_tx) + self.cfg.ack_tx;
                self.send_data(node, ex.peer, packet, nav);
            }
            None => {
                self.nodes[i].exchange = None;
                if now >= self.active_end() {
                    self.channel.set_awake(node, false, now);
                }
            }
        }
    }
}

/// Runs one replication.
pub fn run(scenario: &Scenario, seed: u64) -> Result<MetricsLedger, ScenarioError> {
    Ok(Simulation::new(scenario, seed)?.run().0)
}

/// Runs one replication and returns its event trace as well.
pub fn run_traced(scenario: &Scenario, seed: u64) -> Result<(MetricsLedger, String), ScenarioError> {
    Ok(Simulation::new(scenario, seed)?.with_trace().run())
}
