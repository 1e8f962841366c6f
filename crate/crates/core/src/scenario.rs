//! Scenario description and its `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! [scenario]
//! protocol = hmac            # hmac | smac
//! topology = linear:10       # linear:H | star:N | ring:N | edges:0-1,1-2
//! interference = 0-2         # extra noise-only edges (optional)
//! horizon = 40               # frames
//! replications = 30
//! seed = 1
//! forward_chain = true
//! warmup = 1                 # frames before traffic starts
//! queue_capacity = 64
//!
//! [frame]                    # durations in seconds
//! active = 0.1
//! data_slots = 18
//! slot = 0.05
//! atim_minislots = 2
//! guard = 0.005
//! data_tx = 0.04
//! ack_tx = 0.005
//! ctrl_tx = 0.0005
//! backoff_slot = 0.001
//! backoff_window = 32
//!
//! [energy]                   # milliwatts
//! p_tx = 60
//! p_rx = 45
//! p_idle = 40
//! p_sleep = 0.09
//!
//! [traffic]
//! pattern = single           # none | single[:offset_s] | rate:pkts_per_frame | burst:k[:closed]
//! flows = chain              # chain | star | 0->3,2->0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::protocol::{FrameConfig, NodeId};
use crate::simcore::{secs_to_ticks, ticks_to_secs, EnergyModel, Tick, Topology, TopologySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Hmac,
    Smac,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Hmac => "hmac",
            Protocol::Smac => "smac",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hmac" => Ok(Protocol::Hmac),
            "smac" => Ok(Protocol::Smac),
            other => Err(format!("unknown protocol `{other}` (hmac or smac)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    None,
    /// One packet per flow; the offset into the first traffic frame is
    /// uniform over the cycle unless fixed.
    Single { offset: Option<Tick> },
    /// Constant rate, in packets per frame, with a uniform first arrival.
    Rate { per_frame: f64 },
    /// `k` packets at once when traffic starts. A closed burst is
    /// re-issued as soon as the sink has received the previous one.
    Burst { size: u32, closed: bool },
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::None => f.write_str("none"),
            Pattern::Single { offset: None } => f.write_str("single"),
            Pattern::Single { offset: Some(t) } => write!(f, "single:{}", ticks_to_secs(*t)),
            Pattern::Rate { per_frame } => write!(f, "rate:{per_frame}"),
            Pattern::Burst { size, closed: false } => write!(f, "burst:{size}"),
            Pattern::Burst { size, closed: true } => write!(f, "burst:{size}:closed"),
        }
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts.as_slice() {
            ["none"] => Ok(Pattern::None),
            ["single"] => Ok(Pattern::Single { offset: None }),
            ["single", off] => {
                let secs: f64 = off.parse().map_err(|_| format!("bad offset `{off}`"))?;
                let t = secs_to_ticks(secs).map_err(|e| e.to_string())?;
                Ok(Pattern::Single { offset: Some(t) })
            }
            ["rate", r] => {
                let per_frame: f64 = r.parse().map_err(|_| format!("bad rate `{r}`"))?;
                Ok(Pattern::Rate { per_frame })
            }
            ["burst", k] | ["burst", k, "closed"] => {
                let size: u32 = k.parse().map_err(|_| format!("bad burst size `{k}`"))?;
                Ok(Pattern::Burst {
                    size,
                    closed: parts.len() == 3,
                })
            }
            _ => Err(format!("unknown traffic pattern `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flows {
    /// Node 0 to the highest-numbered node.
    Chain,
    /// Every other node to node 0.
    Star,
    List(Vec<(u32, u32)>),
}

impl fmt::Display for Flows {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flows::Chain => f.write_str("chain"),
            Flows::Star => f.write_str("star"),
            Flows::List(list) => {
                let parts: Vec<String> = list.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for Flows {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "chain" => Ok(Flows::Chain),
            "star" => Ok(Flows::Star),
            list => {
                let mut out = Vec::new();
                for item in list.split(',').map(str::trim).filter(|i| !i.is_empty()) {
                    let (a, b) = item.split_once("->").ok_or_else(|| format!("bad flow `{item}`"))?;
                    let a = a.trim().parse().map_err(|_| format!("bad flow `{item}`"))?;
                    let b = b.trim().parse().map_err(|_| format!("bad flow `{item}`"))?;
                    out.push((a, b));
                }
                if out.is_empty() {
                    return Err("flow list is empty".into());
                }
                Ok(Flows::List(out))
            }
        }
    }
}

impl Flows {
    /// Concrete (source, sink) pairs on `topology`.
    pub fn resolve(&self, topology: &Topology) -> Vec<(NodeId, NodeId)> {
        let n = topology.node_count() as u32;
        match self {
            Flows::Chain => vec![(NodeId(0), NodeId(n - 1))],
            Flows::Star => (1..n).map(|i| (NodeId(i), NodeId(0))).collect(),
            Flows::List(list) => list.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Traffic {
    pub pattern: Pattern,
    pub flows: Flows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub protocol: Protocol,
    pub topology: TopologySpec,
    /// Noise-only edges on top of the radio links.
    pub interference: Vec<(u32, u32)>,
    pub frame: FrameConfig,
    pub energy: EnergyModel,
    pub traffic: Traffic,
    /// Simulated length in frames.
    pub horizon: u64,
    pub replications: u32,
    pub seed: u64,
    pub forward_chain: bool,
    /// Frames before traffic sources start.
    pub warmup: u64,
    pub queue_capacity: usize,
}

impl Default for Scenario {
    /// The 10-hop chain with 18 data slots and a two-slot active window.
    fn default() -> Self {
        Scenario {
            protocol: Protocol::Hmac,
            topology: TopologySpec::Linear(10),
            interference: Vec::new(),
            frame: FrameConfig::default(),
            energy: EnergyModel::default(),
            traffic: Traffic {
                pattern: Pattern::Single { offset: None },
                flows: Flows::Chain,
            },
            horizon: 40,
            replications: 30,
            seed: 1,
            forward_chain: true,
            warmup: 1,
            queue_capacity: 64,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid `{field}`: {msg}")]
    Validation { field: &'static str, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &'static str, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { field, msg: msg.into() }
}

impl Scenario {
    pub fn build_topology(&self) -> Topology {
        Topology::build(&self.topology).with_interference(&self.interference)
    }

    pub fn flows(&self) -> Vec<(NodeId, NodeId)> {
        self.traffic.flows.resolve(&self.build_topology())
    }

    pub fn horizon_ticks(&self) -> Tick {
        self.horizon * self.frame.cycle_len()
    }

    pub fn warmup_ticks(&self) -> Tick {
        self.warmup * self.frame.cycle_len()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.frame.validate().map_err(|e| match e {
            crate::protocol::ProtocolError::Config { field, reason } => invalid(field, reason),
            other => invalid("frame", other.to_string()),
        })?;
        self.energy.validate().map_err(|e| invalid("energy", e.0))?;
        if self.horizon < 2 {
            return Err(invalid("horizon", format!("need at least 2 frames, got {}", self.horizon)));
        }
        if self.warmup >= self.horizon {
            return Err(invalid("warmup", format!("{} frames leaves nothing of a {}-frame horizon", self.warmup, self.horizon)));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be >= 1"));
        }
        if self.queue_capacity == 0 {
            return Err(invalid("queue_capacity", "must be >= 1"));
        }
        let base = Topology::build(&self.topology);
        let n = base.node_count() as u32;
        if n < 2 {
            return Err(invalid("topology", "need at least two nodes"));
        }
        if let Some(&(a, b)) = self.interference.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
            return Err(invalid("interference", format!("edge {a}-{b} is not between two distinct existing nodes")));
        }
        let topo = self.build_topology();
        if let Flows::Star = self.traffic.flows {
            if topo.neighbors(NodeId(0)).is_empty() {
                return Err(invalid("flows", "node 0 has no neighbours"));
            }
        }
        for (src, dst) in self.flows() {
            if !topo.contains(src) || !topo.contains(dst) {
                return Err(invalid("flows", format!("flow {src}->{dst} names a node outside 0..{n}")));
            }
            if src == dst {
                return Err(invalid("flows", format!("flow {src}->{dst} has no hops")));
            }
            if topo.hop_distance(src, dst).is_none() {
                return Err(invalid("flows", format!("no path from {src} to {dst}")));
            }
        }
        match self.traffic.pattern {
            Pattern::Rate { per_frame } if !(per_frame.is_finite() && per_frame > 0.0) => {
                return Err(invalid("pattern", format!("rate must be positive, got {per_frame}")));
            }
            Pattern::Rate { per_frame } if (self.frame.cycle_len() as f64 / per_frame) < 1.0 => {
                return Err(invalid("pattern", "rate exceeds one packet per tick"));
            }
            Pattern::Burst { size: 0, .. } => return Err(invalid("pattern", "burst size must be >= 1")),
            Pattern::Single { offset: Some(t) } if t >= self.frame.cycle_len() => {
                return Err(invalid("pattern", "single-shot offset must lie inside one cycle"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Everything that defines the experiment except seed and replication
    /// count. Ledgers with different fingerprints must not be pooled.
    pub fn fingerprint(&self) -> String {
        let mut s = self.clone();
        s.seed = 0;
        s.replications = 0;
        format!("{s:?}")
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::parse(&text)
    }

    /// Parses and validates scenario text; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let perr = |msg: String| ScenarioError::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| perr(format!("unterminated section header `{line}`")))?
                    .trim();
                if !["scenario", "frame", "energy", "traffic"].contains(&name) {
                    return Err(perr(format!("unknown section `[{name}]`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sect = section
                .as_deref()
                .ok_or_else(|| perr(format!("`{key}` appears before any [section]")))?;
            apply(&mut sc, sect, key, value).map_err(perr)?;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("`{key}`: cannot parse `{value}`"))
}

fn secs(key: &str, value: &str) -> Result<Tick, String> {
    let v: f64 = num(key, value)?;
    secs_to_ticks(v).map_err(|e| format!("`{key}`: {e}"))
}

fn flag(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{key}`: expected true or false, got `{value}`")),
    }
}

fn apply(sc: &mut Scenario, section: &str, key: &str, value: &str) -> Result<(), String> {
    let f = &mut sc.frame;
    let e = &mut sc.energy;
    match (section, key) {
        ("scenario", "protocol") => sc.protocol = value.parse()?,
        ("scenario", "topology") => sc.topology = value.parse()?,
        ("scenario", "interference") => {
            sc.interference = if value.is_empty() {
                Vec::new()
            } else {
                match format!("edges:{value}").parse::<TopologySpec>()? {
                    TopologySpec::Edges(e) => e,
                    _ => unreachable!("edges: prefix always parses to an edge list"),
                }
            }
        }
        ("scenario", "horizon") => sc.horizon = num(key, value)?,
        ("scenario", "replications") => sc.replications = num(key, value)?,
        ("scenario", "seed") => sc.seed = num(key, value)?,
        ("scenario", "forward_chain") => sc.forward_chain = flag(key, value)?,
        ("scenario", "warmup") => sc.warmup = num(key, value)?,
        ("scenario", "queue_capacity") => sc.queue_capacity = num(key, value)?,
        ("frame", "active") => f.active_len = secs(key, value)?,
        ("frame", "data_slots") => f.data_slots = num(key, value)?,
        ("frame", "slot") => f.slot_len = secs(key, value)?,
        ("frame", "atim_minislots") => f.atim_minislots = num(key, value)?,
        ("frame", "guard") => f.guard = secs(key, value)?,
        ("frame", "data_tx") => f.data_tx = secs(key, value)?,
        ("frame", "ack_tx") => f.ack_tx = secs(key, value)?,
        ("frame", "ctrl_tx") => f.ctrl_tx = secs(key, value)?,
        ("frame", "backoff_slot") => f.backoff_slot = secs(key, value)?,
        ("frame", "backoff_window") => f.backoff_window = num(key, value)?,
        ("energy", "p_tx") => e.p_tx = num(key, value)?,
        ("energy", "p_rx") => e.p_rx = num(key, value)?,
        ("energy", "p_idle") => e.p_idle = num(key, value)?,
        ("energy", "p_sleep") => e.p_sleep = num(key, value)?,
        ("traffic", "pattern") => sc.traffic.pattern = value.parse()?,
        ("traffic", "flows") => sc.traffic.flows = value.parse()?,
        _ => return Err(format!("unknown key `{key}` in [{section}]")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let sc = Scenario::parse("").unwrap();
        assert_eq!(sc, Scenario::default());
        assert_eq!(sc.frame.cycle_len(), 1_000_000);
        assert_eq!(sc.frame.data_slots, 18);
    }

    #[test]
    fn linear_three_has_four_nodes() {
        let sc = Scenario::parse("[scenario]\ntopology = linear:3\n").unwrap();
        assert_eq!(sc.build_topology().node_count(), 4);
        assert_eq!(sc.flows(), vec![(NodeId(0), NodeId(3))]);
    }

    #[test]
    fn zero_data_slots_names_the_field() {
        let err = Scenario::parse("[frame]\ndata_slots = 0\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { field: "data_slots", .. }), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Scenario::parse("[scenario]\n\nprotocol = tdma\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 3, .. }), "{err}");
        let err = Scenario::parse("# header\nseed = 3\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 2, .. }), "{err}");
        let err = Scenario::parse("[frame]\nactive = 0.0000001\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 2, .. }), "{err}");
        let err = Scenario::parse("[bogus]\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn full_file() {
        let text = "
[scenario]
protocol = smac   # baseline
topology = star:4
horizon = 12
replications = 3
seed = 9
forward_chain = off
[traffic]
pattern = burst:5:closed
flows = 1->0, 2->0
[energy]
p_sleep = 0.01
";
        let sc = Scenario::parse(text).unwrap();
        assert_eq!(sc.protocol, Protocol::Smac);
        assert_eq!(sc.topology, TopologySpec::Star(4));
        assert_eq!(sc.traffic.pattern, Pattern::Burst { size: 5, closed: true });
        assert_eq!(sc.flows(), vec![(NodeId(1), NodeId(0)), (NodeId(2), NodeId(0))]);
        assert!(!sc.forward_chain);
        assert_eq!(sc.energy.p_sleep, 0.01);
    }

    #[test]
    fn validation_catches_bad_references() {
        let err = Scenario::parse("[traffic]\nflows = 0->42\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { field: "flows", .. }));
        let err = Scenario::parse("[scenario]\nhorizon = 1\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { field: "horizon", .. }));
        let err = Scenario::parse("[scenario]\nreplications = 0\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { field: "replications", .. }));
        let err = Scenario::parse("[traffic]\npattern = rate:0\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { field: "pattern", .. }));
        let err = Scenario::parse("[scenario]\ntopology = edges:0-1,2-3\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Validation { field: "flows", .. }));
    }

    #[test]
    fn pattern_text_round_trips() {
        for p in ["none", "single", "single:0.25", "rate:0.05", "burst:3", "burst:3:closed"] {
            assert_eq!(p.parse::<Pattern>().unwrap().to_string(), p);
        }
        assert_eq!("0->3,2->0".parse::<Flows>().unwrap().to_string(), "0->3,2->0");
    }

    #[test]
    fn fingerprint_ignores_seed_only() {
        let a = Scenario::default();
        let b = Scenario {
            seed: 99,
            replications: 4,
            ..Scenario::default()
        };
        let c = Scenario {
            horizon: 41,
            ..Scenario::default()
        };
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
