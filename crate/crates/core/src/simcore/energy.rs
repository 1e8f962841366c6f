use thiserror::Error;

use super::{ticks_to_secs, Tick};
use crate::protocol::{NodeId, RadioMode};

/// Radio power draw per mode, in milliwatts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub p_tx: f64,
    pub p_rx: f64,
    pub p_idle: f64,
    pub p_sleep: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid energy model: {0}")]
pub struct EnergyModelError(pub String);

impl Default for EnergyModel {
    /// Typical low-power transceiver figures. The absolute values only
    /// scale results; comparisons use ratios.
    fn default() -> Self {
        EnergyModel {
            p_tx: 60.0,
            p_rx: 45.0,
            p_idle: 40.0,
            p_sleep: 0.09,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), EnergyModelError> {
        let all = [self.p_tx, self.p_rx, self.p_idle, self.p_sleep];
        if all.iter().any(|p| !p.is_finite()) {
            return Err(EnergyModelError("power values must be finite".into()));
        }
        if !(self.p_tx >= self.p_rx && self.p_rx >= self.p_idle && self.p_idle > self.p_sleep && self.p_sleep >= 0.0) {
            return Err(EnergyModelError(format!(
                "need p_tx >= p_rx >= p_idle > p_sleep >= 0, got {} {} {} {}",
                self.p_tx, self.p_rx, self.p_idle, self.p_sleep
            )));
        }
        Ok(())
    }

    pub fn power_mw(&self, mode: RadioMode) -> f64 {
        match mode {
            RadioMode::Tx => self.p_tx,
            RadioMode::Rx => self.p_rx,
            RadioMode::IdleListen => self.p_idle,
            RadioMode::Sleep => self.p_sleep,
        }
    }
}

/// Time each node spent in each radio mode.
///
/// Every node has a cursor; [`EnergyLedger::account`] must start exactly at
/// it, so the accounted spans tile the timeline with no gaps or overlaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyLedger {
    durations: Vec<[Tick; 4]>,
    cursor: Vec<Tick>,
}

impl EnergyLedger {
    pub fn new(nodes: usize) -> Self {
        EnergyLedger {
            durations: vec![[0; 4]; nodes],
            cursor: vec![0; nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.durations.len()
    }

    /// Panics on a span that does not start at the node's cursor or runs
    /// backwards.
    pub fn account(&mut self, node: NodeId, mode: RadioMode, from: Tick, to: Tick) {
        let i = node.index();
        assert!(from <= to, "energy span for node {node} runs backwards: {from} > {to}");
        assert_eq!(self.cursor[i], from, "energy span for node {node} leaves a gap or overlaps");
        self.durations[i][mode.index()] += to - from;
        self.cursor[i] = to;
    }

    pub fn accounted_until(&self, node: NodeId) -> Tick {
        self.cursor[node.index()]
    }

    pub fn duration(&self, node: NodeId, mode: RadioMode) -> Tick {
        self.durations[node.index()][mode.index()]
    }

    pub fn total_duration(&self, node: NodeId) -> Tick {
        self.durations[node.index()].iter().sum()
    }

    /// Awake time (everything but sleep).
    pub fn awake(&self, node: NodeId) -> Tick {
        self.total_duration(node) - self.duration(node, RadioMode::Sleep)
    }

    /// Joules spent by one node.
    pub fn node_energy(&self, node: NodeId, model: &EnergyModel) -> f64 {
        RadioMode::ALL
            .iter()
            .map(|&m| ticks_to_secs(self.duration(node, m)) * model.power_mw(m) / 1000.0)
            .sum()
    }

    pub fn total_energy(&self, model: &EnergyModel) -> f64 {
        (0..self.node_count() as u32)
            .map(|n| self.node_energy(NodeId(n), model))
            .sum()
    }
}
