//! Event trace: one line per event, space separated, in the fixed field
//! order `tick seq kind subject frame_kind src dst slots payload`.
//! Missing fields are written as `-`; slot lists are comma joined.

use std::fmt;
use std::str::FromStr;

use super::Tick;
use crate::protocol::{Addr, FrameKind, NodeId, SlotIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    FrameBoundary,
    WindowEdge,
    SlotEdge,
    PacketArrival,
    TxStart,
    TxEnd,
    RxOk,
    RxLost,
    Timer,
}

impl TraceKind {
    const ALL: [TraceKind; 9] = [
        TraceKind::FrameBoundary,
        TraceKind::WindowEdge,
        TraceKind::SlotEdge,
        TraceKind::PacketArrival,
        TraceKind::TxStart,
        TraceKind::TxEnd,
        TraceKind::RxOk,
        TraceKind::RxLost,
        TraceKind::Timer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::FrameBoundary => "frame_boundary",
            TraceKind::WindowEdge => "window_edge",
            TraceKind::SlotEdge => "slot_edge",
            TraceKind::PacketArrival => "packet_arrival",
            TraceKind::TxStart => "tx_start",
            TraceKind::TxEnd => "tx_end",
            TraceKind::RxOk => "rx_ok",
            TraceKind::RxLost => "rx_lost",
            TraceKind::Timer => "timer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub tick: Tick,
    pub seq: u64,
    pub kind: TraceKind,
    pub subject: Option<NodeId>,
    pub frame_kind: Option<FrameKind>,
    pub src: Option<NodeId>,
    pub dst: Option<Addr>,
    pub slots: Vec<SlotIndex>,
    pub payload: Option<u64>,
}

impl TraceLine {
    pub fn new(tick: Tick, seq: u64, kind: TraceKind) -> Self {
        TraceLine {
            tick,
            seq,
            kind,
            subject: None,
            frame_kind: None,
            src: None,
            dst: None,
            slots: Vec::new(),
            payload: None,
        }
    }
}

fn opt<T: fmt::Display>(f: &mut fmt::Formatter<'_>, v: &Option<T>) -> fmt::Result {
    match v {
        Some(v) => write!(f, " {v}"),
        None => f.write_str(" -"),
    }
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.tick, self.seq, self.kind.as_str())?;
        opt(f, &self.subject)?;
        opt(f, &self.frame_kind)?;
        opt(f, &self.src)?;
        opt(f, &self.dst)?;
        if self.slots.is_empty() {
            f.write_str(" -")?;
        } else {
            let joined: Vec<String> = self.slots.iter().map(|s| s.to_string()).collect();
            write!(f, " {}", joined.join(","))?;
        }
        opt(f, &self.payload)
    }
}

impl FromStr for TraceLine {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 9 {
            return Err(format!("expected 9 fields, got {}: `{line}`", fields.len()));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number `{s}`"));
        let node = |s: &str| -> Result<Option<NodeId>, String> {
            if s == "-" {
                Ok(None)
            } else {
                s.parse::<u32>()
                    .map(|n| Some(NodeId(n)))
                    .map_err(|_| format!("bad node `{s}`"))
            }
        };
        let kind = TraceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == fields[2])
            .ok_or_else(|| format!("unknown kind `{}`", fields[2]))?;
        let frame_kind = match fields[4] {
            "-" => None,
            s => Some(
                [
                    FrameKind::Atim,
                    FrameKind::AtimAck,
                    FrameKind::AtimRes,
                    FrameKind::Data,
                    FrameKind::DataAck,
                ]
                .into_iter()
                .find(|k| k.as_str() == s)
                .ok_or_else(|| format!("unknown frame kind `{s}`"))?,
            ),
        };
        let dst = match fields[6] {
            "-" => None,
            "*" => Some(Addr::Broadcast),
            s => node(s)?.map(Addr::Node),
        };
        let slots = match fields[7] {
            "-" => Vec::new(),
            s => s
                .split(',')
                .map(|x| x.parse::<SlotIndex>().map_err(|_| format!("bad slot `{x}`")))
                .collect::<Result<_, _>>()?,
        };
        Ok(TraceLine {
            tick: num(fields[0])?,
            seq: num(fields[1])?,
            kind,
            subject: node(fields[3])?,
            frame_kind,
            src: node(fields[5])?,
            dst,
            slots,
            payload: match fields[8] {
                "-" => None,
                s => Some(num(s)?),
            },
        })
    }
}

/// Parses a whole trace, one line per record. Blank lines and `#` headers
/// are skipped.
pub fn parse(text: &str) -> Result<Vec<TraceLine>, String> {
    text.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let mut l = TraceLine::new(100_000, 42, TraceKind::TxStart);
        l.subject = Some(NodeId(3));
        l.frame_kind = Some(FrameKind::AtimAck);
        l.src = Some(NodeId(3));
        l.dst = Some(Addr::Node(NodeId(2)));
        l.slots = vec![0, 4];
        l.payload = Some(9);
        let text = l.to_string();
        assert_eq!(text, "100000 42 tx_start 3 ATIM_ACK 3 2 0,4 9");
        assert_eq!(text.parse::<TraceLine>().unwrap(), l);

        let bare = TraceLine::new(0, 0, TraceKind::FrameBoundary);
        assert_eq!(bare.to_string(), "0 0 frame_boundary - - - - - -");
        assert_eq!(bare.to_string().parse::<TraceLine>().unwrap(), bare);
    }
}
