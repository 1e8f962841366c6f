//! Experiment presets (parameter sweeps over both protocols), CSV output,
//! and simulation-vs-formula comparison for a single scenario.

use std::fmt::Write as _;

use thiserror::Error;

use crate::analytic::{self, ContentionParams, ThroughputParams, TimingParams};
use crate::exec;
use crate::metrics::{summarize, MetricsLedger, Stat, Summary};
use crate::scenario::{Flows, Pattern, Protocol, Scenario, ScenarioError};
use crate::simcore::{ticks_to_secs, Simulation, TopologySpec};

pub const CSV_HEADER: &str = "sweep_var,value,protocol,metric,mean,stderr,n_reps,analytic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Throughput vs closed-loop burst size on the 10-hop chain.
    Fig4,
    /// Network energy vs offered load.
    Fig5,
    /// End-to-end latency vs hop count.
    Fig6,
    /// Request success ratio vs number of contenders.
    Fig7,
    /// Request success ratio vs number of minislots.
    Fig8,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7, Preset::Fig8];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }

    pub fn from_name(name: &str) -> Result<Preset, ExperimentError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| ExperimentError::UnknownPreset(name.to_string()))
    }

    fn sweep_var(self) -> &'static str {
        match self {
            Preset::Fig4 => "burst",
            Preset::Fig5 => "load",
            Preset::Fig6 => "hops",
            Preset::Fig7 => "contenders",
            Preset::Fig8 => "mini_slots",
        }
    }

    fn values(self) -> Vec<f64> {
        match self {
            Preset::Fig4 => (1..=18).map(f64::from).collect(),
            Preset::Fig5 => vec![0.0, 0.025, 0.05, 0.1],
            Preset::Fig6 => (1..=10).map(f64::from).collect(),
            Preset::Fig7 => (2..=20).map(f64::from).collect(),
            Preset::Fig8 => (1..=8).map(|i| f64::from(5 * i)).collect(),
        }
    }

    fn protocols(self) -> &'static [Protocol] {
        match self {
            // request contention only exists in H-MAC
            Preset::Fig7 | Preset::Fig8 => &[Protocol::Hmac],
            _ => &[Protocol::Hmac, Protocol::Smac],
        }
    }

    /// The scenario simulated at one sweep point.
    pub fn scenario(self, value: f64, protocol: Protocol) -> Scenario {
        let mut sc = Scenario {
            protocol,
            ..Scenario::default()
        };
        match self {
            Preset::Fig4 => {
                sc.traffic.pattern = Pattern::Burst {
                    size: value as u32,
                    closed: true,
                };
                sc.horizon = 101;
            }
            Preset::Fig5 => {
                sc.traffic.pattern = if value == 0.0 {
                    Pattern::None
                } else {
                    Pattern::Rate { per_frame: value }
                };
                sc.horizon = 200;
            }
            Preset::Fig6 => {
                let h = value as u32;
                sc.topology = TopologySpec::Linear(h);
                sc.horizon = u64::from(h) + 4;
            }
            Preset::Fig7 | Preset::Fig8 => {
                let (n, sm) = if self == Preset::Fig7 {
                    (value as u32, 20)
                } else {
                    (10, value as u32)
                };
                sc.topology = TopologySpec::Star(n);
                sc.frame.atim_minislots = sm;
                sc.traffic.pattern = Pattern::Burst { size: 1, closed: true };
                sc.traffic.flows = Flows::Star;
                sc.horizon = 40;
            }
        }
        sc
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown preset `{0}` (expected fig4, fig5, fig6, fig7 or fig8)")]
    UnknownPreset(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_var: &'static str,
    pub value: f64,
    pub protocol: &'static str,
    pub metric: &'static str,
    pub mean: f64,
    pub stderr: f64,
    pub n_reps: usize,
    pub analytic: Option<f64>,
}

impl Row {
    fn new(sweep_var: &'static str, value: f64, protocol: &'static str, metric: &'static str, stat: Stat, analytic: Option<f64>) -> Row {
        Row {
            sweep_var,
            value,
            protocol,
            metric,
            mean: stat.mean,
            stderr: stat.stderr,
            n_reps: stat.n,
            analytic,
        }
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let analytic = r.analytic.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sweep_var, r.value, r.protocol, r.metric, r.mean, r.stderr, r.n_reps, analytic
        )
        .expect("writing to a String");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    pub replications: u32,
    pub trace: bool,
}

/// Rows of a preset plus, when requested, the traces of replication 0 at
/// every sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutput {
    pub rows: Vec<Row>,
    pub trace: Option<String>,
}

/// Seed of replication `rep`.
pub fn replication_seed(base: u64, rep: u32) -> u64 {
    base.wrapping_add(u64::from(rep))
}

/// Ledgers of one scenario plus the trace of its first replication.
type Batch = (Vec<MetricsLedger>, Option<String>);

/// Runs `reps` replications of each scenario as independent jobs.
fn run_jobs(scenarios: &[Scenario], opts: RunOptions) -> Result<Vec<Batch>, ScenarioError> {
    for sc in scenarios {
        sc.validate()?;
    }
    if opts.replications == 0 {
        return Err(ScenarioError::Validation {
            field: "replications",
            msg: "must be >= 1".into(),
        });
    }
    let reps = opts.replications as usize;
    let flat = exec::map_indexed(scenarios.len() * reps, |job| {
        let sc = &scenarios[job / reps];
        let rep = (job % reps) as u32;
        let sim = Simulation::new(sc, replication_seed(opts.seed, rep)).expect("validated above");
        if opts.trace && rep == 0 {
            sim.with_trace().run()
        } else {
            sim.run()
        }
    });
    let mut out: Vec<Batch> = Vec::with_capacity(scenarios.len());
    for (job, (ledger, trace)) in flat.into_iter().enumerate() {
        if job % reps == 0 {
            out.push((Vec::with_capacity(reps), opts.trace.then_some(trace)));
        }
        out.last_mut().expect("pushed").0.push(ledger);
    }
    Ok(out)
}

/// Replications of one scenario, in seed order.
pub fn replicate(sc: &Scenario, seed: u64, replications: u32) -> Result<Vec<MetricsLedger>, ScenarioError> {
    let opts = RunOptions {
        seed,
        replications,
        trace: false,
    };
    Ok(run_jobs(std::slice::from_ref(sc), opts)?.remove(0).0)
}

pub fn timing(sc: &Scenario, hops: u32, reserved_hops: u32) -> TimingParams {
    let f = &sc.frame;
    TimingParams {
        t_cs: ticks_to_secs(f.mean_backoff()),
        t_tx: ticks_to_secs(f.data_tx),
        t_active: ticks_to_secs(f.active_len),
        t_slot: ticks_to_secs(f.slot_len),
        slot_count: u32::from(f.data_slots),
        hops,
        reserved_hops,
    }
}

/// Mean hops per frame of a lone packet under forwarding chains: a request
/// placed uniformly in minislot m can chain through the remaining
/// `S_m - m` minislots.
pub fn expected_chain_depth(sc: &Scenario) -> f64 {
    if sc.protocol == Protocol::Smac || !sc.forward_chain {
        return 1.0;
    }
    let sm = sc.frame.atim_minislots.min(u32::from(sc.frame.data_slots));
    (f64::from(sm) + 1.0) / 2.0
}

fn hops_of(sc: &Scenario) -> u32 {
    match sc.topology {
        TopologySpec::Linear(h) => h,
        _ => 1,
    }
}

/// Closed-loop burst throughput of the whole chain, packets per frame.
fn burst_throughput_per_frame(sc: &Scenario, burst: u32) -> Option<f64> {
    let hops = hops_of(sc);
    let t = timing(sc, hops, 1);
    let tp = ThroughputParams {
        packets_per_exchange: burst,
        peers_per_frame: match sc.protocol {
            Protocol::Smac => 1,
            Protocol::Hmac => sc
                .frame
                .atim_minislots
                .min(u32::from(sc.frame.data_slots) / burst)
                .max(1),
        },
        packet_time: t.t_tx,
        sleep_time: t.sleep_len(),
    };
    let per_s = match sc.protocol {
        Protocol::Smac => analytic::smac_throughput(&tp, &t),
        Protocol::Hmac => analytic::hmac_throughput(&tp, &t),
    }
    .ok()?;
    Some(per_s * t.cycle_len() / f64::from(hops))
}

fn latency_formula(sc: &Scenario, hops: u32, hops_per_frame: f64) -> Option<f64> {
    match sc.protocol {
        Protocol::Smac => analytic::smac_latency(&timing(sc, hops, 1)).ok(),
        Protocol::Hmac => analytic::hmac_latency_at_rate(&timing(sc, hops, 1), hops_per_frame.min(f64::from(hops))).ok(),
    }
}

fn idle_energy_j(sc: &Scenario) -> f64 {
    let f = &sc.frame;
    let per_frame_mj = ticks_to_secs(f.active_len) * sc.energy.p_idle + ticks_to_secs(f.sleep_len()) * sc.energy.p_sleep;
    let nodes = sc.build_topology().node_count() as f64;
    nodes * sc.horizon as f64 * per_frame_mj / 1000.0
}

fn preset_rows(preset: Preset, value: f64, sc: &Scenario, s: &Summary) -> Vec<Row> {
    let var = preset.sweep_var();
    let proto = sc.protocol.as_str();
    let mut rows = Vec::new();
    match preset {
        Preset::Fig4 => {
            let per_frame = burst_throughput_per_frame(sc, value as u32);
            let frame_s = ticks_to_secs(sc.frame.cycle_len());
            rows.push(Row::new(var, value, proto, "throughput_per_frame", s.throughput_per_frame, per_frame));
            rows.push(Row::new(var, value, proto, "throughput_per_s", s.throughput_per_s, per_frame.map(|x| x / frame_s)));
        }
        Preset::Fig5 => {
            let idle = (value == 0.0).then(|| idle_energy_j(sc));
            let nodes = sc.build_topology().node_count() as f64;
            rows.push(Row::new(var, value, proto, "energy_total_j", s.energy_total_j, idle));
            rows.push(Row::new(var, value, proto, "energy_per_node_j", s.energy_per_node_j, idle.map(|e| e / nodes)));
        }
        Preset::Fig6 => {
            let hops = value as u32;
            let depth = expected_chain_depth(sc);
            if let Some(lat) = s.latency {
                rows.push(Row::new(var, value, proto, "latency_s", lat, latency_formula(sc, hops, depth)));
            }
            if let Some(hpf) = s.hops_per_frame {
                rows.push(Row::new(var, value, proto, "hops_per_frame", hpf, Some(depth.min(f64::from(hops)))));
            }
        }
        Preset::Fig7 | Preset::Fig8 => {
            let n = sc.build_topology().node_count() as u32 - 1;
            let exact = ContentionParams::new(n, sc.frame.atim_minislots)
                .and_then(|c| analytic::success_ratio(&c))
                .ok();
            if let Some(sr) = s.success_ratio {
                rows.push(Row::new(var, value, proto, "success_ratio", sr, exact));
            }
        }
    }
    rows
}

/// H-MAC over S-MAC energy, with a first-order standard error.
fn energy_ratio_row(value: f64, h: &Summary, s: &Summary, idle: bool) -> Row {
    let (a, b) = (h.energy_total_j, s.energy_total_j);
    let ratio = a.mean / b.mean;
    let rel = ((a.stderr / a.mean).powi(2) + (b.stderr / b.mean).powi(2)).sqrt();
    Row {
        sweep_var: Preset::Fig5.sweep_var(),
        value,
        protocol: "ratio",
        metric: "energy_total_j",
        mean: ratio,
        stderr: ratio * rel,
        n_reps: a.n.min(b.n),
        analytic: idle.then_some(1.0),
    }
}

/// Runs every sweep point of a preset. Rows are ordered by sweep value,
/// then protocol name.
pub fn run_preset(preset: Preset, opts: RunOptions) -> Result<PresetOutput, ExperimentError> {
    let mut points = Vec::new();
    for value in preset.values() {
        for &p in preset.protocols() {
            points.push((value, preset.scenario(value, p)));
        }
    }
    let scenarios: Vec<Scenario> = points.iter().map(|(_, sc)| sc.clone()).collect();
    let results = run_jobs(&scenarios, opts)?;
    let mut rows = Vec::new();
    let mut trace = opts.trace.then(String::new);
    let mut summaries = Vec::new();
    for ((value, sc), (ledgers, tr)) in points.iter().zip(results) {
        let s = summarize(&ledgers)?;
        if let (Some(buf), Some(tr)) = (trace.as_mut(), tr) {
            writeln!(buf, "# {}={} protocol={} seed={}", preset.sweep_var(), value, sc.protocol, opts.seed).expect("String");
            buf.push_str(&tr);
        }
        rows.extend(preset_rows(preset, *value, sc, &s));
        summaries.push((*value, sc.protocol, s));
    }
    if preset == Preset::Fig5 {
        for value in preset.values() {
            let find = |p| summaries.iter().find(|(v, q, _)| *v == value && *q == p).map(|x| &x.2);
            if let (Some(h), Some(s)) = (find(Protocol::Hmac), find(Protocol::Smac)) {
                rows.push(energy_ratio_row(value, h, s, value == 0.0));
            }
        }
    }
    rows.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.protocol.cmp(b.protocol)));
    Ok(PresetOutput { rows, trace })
}

/// One line of a simulation-vs-formula comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub metric: &'static str,
    pub simulated: f64,
    pub analytic: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub summary: Summary,
    pub rows: Vec<CompareRow>,
    /// Quantities with no matching formula for this configuration.
    pub notices: Vec<String>,
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,simulated,analytic,relative_error\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.metric, r.simulated, r.analytic, r.relative_error).expect("String");
        }
        out
    }
}

fn compare_row(metric: &'static str, simulated: f64, analytic: f64) -> CompareRow {
    CompareRow {
        metric,
        simulated,
        analytic,
        relative_error: (simulated - analytic) / analytic,
    }
}

/// Single flow along a linear chain, from one end to the other.
fn chain_hops(sc: &Scenario) -> Option<u32> {
    if !matches!(sc.topology, TopologySpec::Linear(_)) {
        return None;
    }
    match sc.flows().as_slice() {
        [(a, b)] => Some(a.0.abs_diff(b.0)),
        _ => None,
    }
}

/// Simulates a scenario and sets each measured quantity next to the
/// formula that predicts it, where the configuration fits one.
pub fn compare(sc: &Scenario) -> Result<CompareReport, ExperimentError> {
    let ledgers = replicate(sc, sc.seed, sc.replications)?;
    let summary = summarize(&ledgers)?;
    let mut rows = Vec::new();
    let mut notices = Vec::new();
    let hops = chain_hops(sc);

    match (hops, summary.latency) {
        (Some(h), Some(lat)) if matches!(sc.traffic.pattern, Pattern::Single { .. } | Pattern::Rate { .. }) => {
            let rate = match sc.protocol {
                Protocol::Smac => 1.0,
                Protocol::Hmac if !sc.forward_chain => 1.0,
                Protocol::Hmac => summary.hops_per_frame.map_or(1.0, |s| s.mean),
            };
            match latency_formula(sc, h, rate) {
                Some(a) => rows.push(compare_row("latency_s", lat.mean, a)),
                None => notices.push("latency: no analytic counterpart for these parameters".into()),
            }
        }
        _ => notices.push("latency: no analytic counterpart (needs one light flow along a linear chain)".into()),
    }

    match (&sc.topology, &sc.traffic.pattern) {
        (TopologySpec::Linear(1), Pattern::Burst { size, closed: true }) => match burst_throughput_per_frame(sc, *size) {
            Some(a) => rows.push(compare_row("throughput_per_frame", summary.throughput_per_frame.mean, a)),
            None => notices.push("throughput: burst exceeds the slot budget".into()),
        },
        _ => notices.push("throughput: no analytic counterpart (needs a closed-loop burst on a single link)".into()),
    }

    let contenders = match (&sc.topology, &sc.traffic.flows) {
        (TopologySpec::Star(n), Flows::Star) => Some(*n),
        _ if hops.is_some() => Some(1),
        _ => None,
    };
    match (sc.protocol, contenders, summary.success_ratio) {
        (Protocol::Hmac, Some(n), Some(sr)) => {
            let exact = ContentionParams::new(n, sc.frame.atim_minislots)
                .and_then(|c| analytic::success_ratio(&c))
                .map_err(|e| ScenarioError::Validation {
                    field: "topology",
                    msg: e.to_string(),
                })?;
            rows.push(compare_row("success_ratio", sr.mean, exact));
        }
        (Protocol::Smac, _, _) => notices.push("success_ratio: S-MAC sends no reservation requests".into()),
        _ => notices.push("success_ratio: no analytic counterpart (needs a star or a single chain flow)".into()),
    }
    Ok(CompareReport { summary, rows, notices })
}

/// Runs a scenario's replications and pools them; optionally returns the
/// trace of the first replication.
pub fn run_scenario(sc: &Scenario, opts: RunOptions) -> Result<(Summary, Option<String>), ExperimentError> {
    let (ledgers, trace) = run_jobs(std::slice::from_ref(sc), opts)?.remove(0);
    Ok((summarize(&ledgers)?, trace))
}

/// Rows describing one pooled scenario, in the preset CSV schema with the
/// sweep variable `scenario`.
pub fn summary_rows(sc: &Scenario, s: &Summary) -> Vec<Row> {
    let p = sc.protocol.as_str();
    let var = "scenario";
    let mut rows = Vec::new();
    let mut push = |metric: &'static str, stat: Option<Stat>| {
        if let Some(stat) = stat {
            rows.push(Row::new(var, 0.0, p, metric, stat, None));
        }
    };
    push("latency_s", s.latency);
    push("latency_per_hop_s", s.latency_per_hop);
    push("throughput_per_frame", Some(s.throughput_per_frame));
    push("throughput_per_s", Some(s.throughput_per_s));
    push("energy_total_j", Some(s.energy_total_j));
    push("energy_per_node_j", Some(s.energy_per_node_j));
    push("success_ratio", s.success_ratio);
    push("delivery_rate", s.delivery_rate);
    push("hops_per_frame", s.hops_per_frame);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_by_name() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
        assert!(matches!(Preset::from_name("fig9"), Err(ExperimentError::UnknownPreset(_))));
    }

    #[test]
    fn preset_scenarios_validate() {
        for p in Preset::ALL {
            for v in p.values() {
                for &proto in p.protocols() {
                    p.scenario(v, proto).validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let stat = Stat {
            mean: 0.5,
            stderr: 0.25,
            n: 3,
        };
        let rows = vec![
            Row::new("hops", 2.0, "hmac", "latency_s", stat, Some(1.5)),
            Row::new("hops", 2.0, "smac", "latency_s", stat, None),
        ];
        assert_eq!(
            to_csv(&rows),
            "sweep_var,value,protocol,metric,mean,stderr,n_reps,analytic\n\
             hops,2,hmac,latency_s,0.5,0.25,3,1.5\n\
             hops,2,smac,latency_s,0.5,0.25,3,\n"
        );
    }

    #[test]
    fn analytic_columns_come_from_the_formulas() {
        let sc = Preset::Fig6.scenario(10.0, Protocol::Smac);
        let direct = analytic::smac_latency(&timing(&sc, 10, 1)).unwrap();
        assert_eq!(latency_formula(&sc, 10, 1.0), Some(direct));
        assert!((direct - (10.0 - 0.5 + 0.0155 + 0.04)).abs() < 1e-12);

        let sc = Preset::Fig4.scenario(3.0, Protocol::Smac);
        assert!((burst_throughput_per_frame(&sc, 3).unwrap() - 0.3).abs() < 1e-12);
        let sc = Preset::Fig4.scenario(3.0, Protocol::Hmac);
        assert!((burst_throughput_per_frame(&sc, 3).unwrap() - 0.6).abs() < 1e-12);
        assert!((burst_throughput_per_frame(&sc, 12).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn ring_has_no_counterpart() {
        let sc = Scenario {
            topology: TopologySpec::Ring(4),
            traffic: crate::scenario::Traffic {
                pattern: Pattern::Single { offset: None },
                flows: Flows::List(vec![(0, 2)]),
            },
            replications: 2,
            horizon: 6,
            ..Scenario::default()
        };
        let report = compare(&sc).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.notices.len(), 3);
    }
}
