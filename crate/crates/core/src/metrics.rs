//! Per-run counters and cross-replication summaries.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::protocol::NodeId;
use crate::simcore::{ticks_to_secs, EnergyLedger, EnergyModel, Tick};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub packet: u64,
    pub source: NodeId,
    pub sink: NodeId,
    pub created: Tick,
    pub delivered: Tick,
    pub hops: u32,
}

impl Delivery {
    pub fn latency(&self) -> Tick {
        self.delivered - self.created
    }
}

/// ATIM requests put on the air and how many the addressee decoded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AtimAttempts {
    pub sent: u64,
    pub decoded: u64,
}

/// Everything one replication measured.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLedger {
    pub deliveries: Vec<Delivery>,
    pub atim: AtimAttempts,
    pub energy: EnergyLedger,
    pub energy_model: EnergyModel,
    /// Total simulated ticks.
    pub horizon: Tick,
    /// Ticks before traffic starts; excluded from rates and latency.
    pub warmup: Tick,
    pub frame_len: Tick,
    pub generated: u64,
    pub dropped: u64,
    pub data_sent: u64,
    pub data_lost: u64,
    /// `(packet, frame)` each time a packet reached a new node.
    pub hop_advances: Vec<(u64, u64)>,
    pub scenario: String,
}

impl MetricsLedger {
    pub fn new(energy: EnergyLedger, energy_model: EnergyModel, horizon: Tick, warmup: Tick, frame_len: Tick, scenario: String) -> Self {
        MetricsLedger {
            deliveries: Vec::new(),
            atim: AtimAttempts::default(),
            energy,
            energy_model,
            horizon,
            warmup,
            frame_len,
            generated: 0,
            dropped: 0,
            data_sent: 0,
            data_lost: 0,
            hop_advances: Vec::new(),
            scenario,
        }
    }

    /// Ticks over which rates are measured.
    pub fn measured_span(&self) -> Tick {
        self.horizon - self.warmup
    }

    pub fn throughput_per_s(&self) -> f64 {
        self.deliveries.len() as f64 / ticks_to_secs(self.measured_span())
    }

    pub fn throughput_per_frame(&self) -> f64 {
        self.deliveries.len() as f64 * self.frame_len as f64 / self.measured_span() as f64
    }

    /// Deliveries of packets created after the warm-up.
    pub fn steady_deliveries(&self) -> impl Iterator<Item = &Delivery> {
        self.deliveries.iter().filter(move |d| d.created >= self.warmup)
    }

    pub fn mean_latency(&self) -> Option<f64> {
        mean(self.steady_deliveries().map(|d| ticks_to_secs(d.latency())))
    }

    pub fn mean_latency_per_hop(&self) -> Option<f64> {
        mean(
            self.steady_deliveries()
                .filter(|d| d.hops > 0)
                .map(|d| ticks_to_secs(d.latency()) / f64::from(d.hops)),
        )
    }

    /// Mean hops a packet advanced per frame, over frames in which it
    /// advanced at all.
    pub fn hops_per_frame(&self) -> Option<f64> {
        let mut groups: BTreeMap<(u64, u64), u32> = BTreeMap::new();
        for &(p, f) in &self.hop_advances {
            *groups.entry((p, f)).or_default() += 1;
        }
        mean(groups.values().map(|&c| f64::from(c)))
    }

    pub fn delivery_rate(&self) -> Option<f64> {
        (self.generated > 0).then(|| self.deliveries.len() as f64 / self.generated as f64)
    }

    pub fn total_energy_j(&self) -> f64 {
        self.energy.total_energy(&self.energy_model)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no ledgers to summarize")]
    Empty,
    #[error("ledgers come from different scenarios")]
    MixedScenarios,
    #[error("no ATIM requests were sent")]
    NoRequests,
}

/// Decoded over sent ATIM requests.
pub fn measured_success_ratio(ledger: &MetricsLedger) -> Result<f64, MetricsError> {
    if ledger.atim.sent == 0 {
        return Err(MetricsError::NoRequests);
    }
    Ok(ledger.atim.decoded as f64 / ledger.atim.sent as f64)
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Stat {
    /// Order-independent: values are sorted before summing so the result
    /// does not depend on how the replications were ordered.
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, stderr, n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub replications: usize,
    pub latency: Option<Stat>,
    pub latency_per_hop: Option<Stat>,
    pub throughput_per_s: Stat,
    pub throughput_per_frame: Stat,
    pub energy_total_j: Stat,
    pub energy_per_node_j: Stat,
    pub success_ratio: Option<Stat>,
    pub delivery_rate: Option<Stat>,
    pub hops_per_frame: Option<Stat>,
}

/// Pools replications of one scenario. Latency is averaged over delivered
/// packets per replication, then across replications.
pub fn summarize(ledgers: &[MetricsLedger]) -> Result<Summary, MetricsError> {
    let first = ledgers.first().ok_or(MetricsError::Empty)?;
    if ledgers.iter().any(|l| l.scenario != first.scenario) {
        return Err(MetricsError::MixedScenarios);
    }
    let collect = |f: &dyn Fn(&MetricsLedger) -> Option<f64>| -> Option<Stat> {
        let v: Vec<f64> = ledgers.iter().filter_map(f).collect();
        Stat::from_values(&v)
    };
    let always = |f: &dyn Fn(&MetricsLedger) -> f64| -> Stat {
        let v: Vec<f64> = ledgers.iter().map(f).collect();
        Stat::from_values(&v).expect("at least one ledger")
    };
    Ok(Summary {
        replications: ledgers.len(),
        latency: collect(&|l| l.mean_latency()),
        latency_per_hop: collect(&|l| l.mean_latency_per_hop()),
        throughput_per_s: always(&|l| l.throughput_per_s()),
        throughput_per_frame: always(&|l| l.throughput_per_frame()),
        energy_total_j: always(&|l| l.total_energy_j()),
        energy_per_node_j: always(&|l| l.total_energy_j() / l.energy.node_count() as f64),
        success_ratio: collect(&|l| measured_success_ratio(l).ok()),
        delivery_rate: collect(&|l| l.delivery_rate()),
        hops_per_frame: collect(&|l| l.hops_per_frame()),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn ledger(deliveries: &[(Tick, Tick)], sent: u64, decoded: u64) -> MetricsLedger {
        let mut l = MetricsLedger::new(
            EnergyLedger::new(2),
            EnergyModel::default(),
            10_000_000,
            0,
            1_000_000,
            "s".into(),
        );
        for (i, &(c, d)) in deliveries.iter().enumerate() {
            l.deliveries.push(Delivery {
                packet: i as u64,
                source: NodeId(0),
                sink: NodeId(1),
                created: c,
                delivered: d,
                hops: 1,
            });
        }
        l.generated = deliveries.len() as u64;
        l.atim = AtimAttempts { sent, decoded };
        l
    }

    #[test]
    fn one_delivery_one_second() {
        let s = summarize(&[ledger(&[(0, 1_000_000)], 1, 1)]).unwrap();
        assert_eq!(s.latency.unwrap().mean, 1.0);
        assert_eq!(s.latency.unwrap().stderr, 0.0);
        assert_eq!(s.replications, 1);
    }

    #[test]
    fn success_ratio_is_decoded_over_sent() {
        assert_eq!(measured_success_ratio(&ledger(&[], 100, 81)).unwrap(), 0.81);
        assert_eq!(measured_success_ratio(&ledger(&[], 0, 0)), Err(MetricsError::NoRequests));
    }

    #[test]
    fn empty_and_mixed_inputs_are_errors() {
        assert_eq!(summarize(&[]), Err(MetricsError::Empty));
        let mut b = ledger(&[], 1, 1);
        b.scenario = "other".into();
        assert_eq!(summarize(&[ledger(&[], 1, 1), b]), Err(MetricsError::MixedScenarios));
    }

    #[test]
    fn warmup_packets_are_excluded_from_latency() {
        let mut l = ledger(&[(0, 500_000), (2_000_000, 3_000_000)], 1, 1);
        l.warmup = 1_000_000;
        assert_eq!(l.mean_latency(), Some(1.0));
    }

    #[test]
    fn hops_per_frame_groups_by_packet_and_frame() {
        let mut l = ledger(&[], 0, 0);
        l.hop_advances = vec![(1, 3), (1, 3), (1, 4), (2, 3)];
        assert_eq!(l.hops_per_frame(), Some(4.0 / 3.0));
    }

    proptest! {
        #[test]
        fn throughput_times_span_is_delivered_count(n in 0usize..50, warm in 0u64..5) {
            let d: Vec<(Tick, Tick)> = (0..n as u64).map(|i| (i, i + 10)).collect();
            let mut l = ledger(&d, 1, 1);
            l.warmup = warm * 1_000_000;
            let frames = (l.measured_span() / l.frame_len) as f64;
            prop_assert!((l.throughput_per_frame() * frames - n as f64).abs() < 1e-9);
            prop_assert!((l.throughput_per_s() * ticks_to_secs(l.measured_span()) - n as f64).abs() < 1e-9);
        }

        #[test]
        fn summarize_ignores_order(lat in proptest::collection::vec(1u64..5_000_000, 2..12), rot in 0usize..12) {
            let ledgers: Vec<MetricsLedger> = lat
                .iter()
                .enumerate()
                .map(|(i, &t)| ledger(&[(0, t)], 10, i as u64 % 10))
                .collect();
            let mut shuffled = ledgers.clone();
            let len = shuffled.len();
            shuffled.rotate_left(rot % len);
            shuffled.reverse();
            prop_assert_eq!(summarize(&ledgers).unwrap(), summarize(&shuffled).unwrap());
        }

        #[test]
        fn stderr_nonnegative(values in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let s = Stat::from_values(&values).unwrap();
            prop_assert!(s.stderr >= 0.0);
            prop_assert_eq!(s.n, values.len());
        }
    }
}
