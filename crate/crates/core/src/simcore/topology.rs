use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::protocol::NodeId;

/// How a topology is described in scenario files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologySpec {
    /// `linear:H` - H hops, nodes 0..=H, i <-> i+1.
    Linear(u32),
    /// `star:N` - hub 0 with leaves 1..=N that cannot hear each other.
    Star(u32),
    /// `ring:N` - N nodes in a cycle.
    Ring(u32),
    /// `edges:0-1,1-2` - explicit undirected edge list.
    Edges(Vec<(u32, u32)>),
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySpec::Linear(h) => write!(f, "linear:{h}"),
            TopologySpec::Star(n) => write!(f, "star:{n}"),
            TopologySpec::Ring(n) => write!(f, "ring:{n}"),
            TopologySpec::Edges(edges) => {
                f.write_str("edges:")?;
                for (i, (a, b)) in edges.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}-{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for TopologySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `kind:args`, got `{s}`"))?;
        let count = |min: u32| -> Result<u32, String> {
            let v: u32 = arg.trim().parse().map_err(|_| format!("bad count `{arg}`"))?;
            if v < min {
                return Err(format!("{kind} needs at least {min}, got {v}"));
            }
            Ok(v)
        };
        match kind.trim() {
            "linear" => Ok(TopologySpec::Linear(count(1)?)),
            "star" => Ok(TopologySpec::Star(count(1)?)),
            "ring" => Ok(TopologySpec::Ring(count(3)?)),
            "edges" => {
                let mut edges = Vec::new();
                for pair in arg.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let (a, b) = pair
                        .split_once('-')
                        .ok_or_else(|| format!("bad edge `{pair}`"))?;
                    let a: u32 = a.trim().parse().map_err(|_| format!("bad edge `{pair}`"))?;
                    let b: u32 = b.trim().parse().map_err(|_| format!("bad edge `{pair}`"))?;
                    if a == b {
                        return Err(format!("self loop `{pair}`"));
                    }
                    edges.push((a, b));
                }
                if edges.is_empty() {
                    return Err("edge list is empty".into());
                }
                Ok(TopologySpec::Edges(edges))
            }
            other => Err(format!("unknown topology `{other}`")),
        }
    }
}

/// Radio connectivity. `links` decide who can decode whom; `interference`
/// decides who disturbs whom and always contains `links`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    spec: TopologySpec,
    links: Vec<Vec<NodeId>>,
    interference: Vec<Vec<NodeId>>,
}

impl Topology {
    pub fn build(spec: &TopologySpec) -> Topology {
        let (n, edges): (u32, Vec<(u32, u32)>) = match spec {
            TopologySpec::Linear(h) => (h + 1, (0..*h).map(|i| (i, i + 1)).collect()),
            TopologySpec::Star(leaves) => (leaves + 1, (1..=*leaves).map(|i| (0, i)).collect()),
            TopologySpec::Ring(k) => (*k, (0..*k).map(|i| (i, (i + 1) % k)).collect()),
            TopologySpec::Edges(e) => (e.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0), e.clone()),
        };
        let mut links = vec![Vec::new(); n as usize];
        for (a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if !links[x as usize].contains(&NodeId(y)) {
                    links[x as usize].push(NodeId(y));
                }
            }
        }
        for l in &mut links {
            l.sort();
        }
        Topology {
            spec: spec.clone(),
            interference: links.clone(),
            links,
        }
    }

    /// Adds interference-only edges (heard as noise, never decoded).
    pub fn with_interference(mut self, extra: &[(u32, u32)]) -> Topology {
        for &(a, b) in extra {
            for (x, y) in [(a, b), (b, a)] {
                let list = &mut self.interference[x as usize];
                if !list.contains(&NodeId(y)) {
                    list.push(NodeId(y));
                    list.sort();
                }
            }
        }
        self
    }

    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.links.len() as u32).map(NodeId)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.links.len()
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.links[id.index()]
    }

    pub fn interferers(&self, id: NodeId) -> &[NodeId] {
        &self.interference[id.index()]
    }

    pub fn linked(&self, a: NodeId, b: NodeId) -> bool {
        self.links[a.index()].contains(&b)
    }

    /// Hop distances from `from` (None = unreachable).
    pub fn distances(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        dist[from.index()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap_or(0);
            for &v in self.neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest-path next hop from `node` to every destination, lowest id
    /// on ties.
    pub fn routing_table(&self, node: NodeId) -> Vec<Option<NodeId>> {
        self.nodes()
            .map(|dest| {
                if dest == node {
                    return None;
                }
                let dist = self.distances(dest);
                let here = dist[node.index()]?;
                self.neighbors(node)
                    .iter()
                    .copied()
                    .find(|n| dist[n.index()] == Some(here - 1))
            })
            .collect()
    }

    pub fn hop_distance(&self, a: NodeId, b: NodeId) -> Option<u32> {
        self.distances(a)[b.index()]
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.spec, TopologySpec::Linear(_))
    }
}
