//! Closed-form latency, throughput and request-collision models.
//!
//! Everything here is a pure function of its arguments. The simulator is
//! checked against these formulas, and the experiment presets print them
//! next to the measured values.
//!
//! Two different "N"s show up in the literature these models come from: the
//! hop count of a multi-hop path and the number of nodes contending for the
//! ATIM window. They live in separate types ([`TimingParams::hops`] and
//! [`ContentionParams::contenders`]) so they cannot be mixed up.

use thiserror::Error;

/// Largest contender count for which binomial coefficients are computed.
pub const MAX_CONTENDERS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("cannot reserve {requested} data slots in a frame of {available}")]
    Capacity { requested: u64, available: u32 },
    #[error("occupancy {n} exceeds the number of contenders {contenders}")]
    Domain { n: u32, contenders: u32 },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> AnalyticError {
    AnalyticError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), AnalyticError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be > 0, got {value}")))
    }
}

/// Frame timing and path shape. All durations are in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingParams {
    /// Mean carrier-sense / backoff delay before a transmission.
    pub t_cs: f64,
    /// Airtime of one data packet.
    pub t_tx: f64,
    /// Length of the active (ATIM) window.
    pub t_active: f64,
    /// Length of one sleep-period slot.
    pub t_slot: f64,
    pub slot_count: u32,
    pub hops: u32,
    /// Hops a packet can advance inside one frame.
    pub reserved_hops: u32,
}

impl TimingParams {
    /// A zero backoff is accepted with a warning; negative values are not.
    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !self.t_cs.is_finite() || self.t_cs < 0.0 {
            return Err(invalid("t_cs", format!("must be >= 0, got {}", self.t_cs)));
        }
        if self.t_cs == 0.0 {
            log::warn!("t_cs = 0: zero-backoff degenerate timing");
        }
        positive("t_tx", self.t_tx)?;
        positive("t_active", self.t_active)?;
        positive("t_slot", self.t_slot)?;
        if self.slot_count == 0 {
            return Err(invalid("slot_count", "a frame needs at least one sleep slot"));
        }
        if self.hops == 0 {
            return Err(invalid("hops", "must be >= 1"));
        }
        if self.reserved_hops == 0 {
            return Err(invalid("reserved_hops", "must be >= 1"));
        }
        let cycle = self.cycle_len();
        if cycle <= self.t_tx {
            return Err(invalid(
                "t_tx",
                format!("cycle length {cycle} must exceed packet airtime {}", self.t_tx),
            ));
        }
        Ok(())
    }

    /// `t_active + slot_count * t_slot`, without validation.
    pub fn cycle_len(&self) -> f64 {
        self.t_active + f64::from(self.slot_count) * self.t_slot
    }

    pub fn sleep_len(&self) -> f64 {
        f64::from(self.slot_count) * self.t_slot
    }
}

/// Per-frame packet counts for the throughput formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputParams {
    pub packets_per_exchange: u32,
    pub peers_per_frame: u32,
    /// Airtime of one packet, seconds.
    pub packet_time: f64,
    /// Total sleep period, seconds.
    pub sleep_time: f64,
}

impl ThroughputParams {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        positive("packet_time", self.packet_time)?;
        positive("sleep_time", self.sleep_time)?;
        if self.peers_per_frame == 0 {
            return Err(invalid("peers_per_frame", "must be >= 1"));
        }
        if self.sleep_time < self.packet_time {
            return Err(invalid(
                "sleep_time",
                format!(
                    "sleep period {} shorter than one packet {}",
                    self.sleep_time, self.packet_time
                ),
            ));
        }
        Ok(())
    }
}

/// Slotted-aloha request model: `contenders` nodes each pick one of
/// `mini_slots` uniformly at random.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContentionParams {
    pub contenders: u32,
    pub mini_slots: u32,
}

impl ContentionParams {
    pub fn new(contenders: u32, mini_slots: u32) -> Result<Self, AnalyticError> {
        let c = Self {
            contenders,
            mini_slots,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        if self.contenders == 0 {
            return Err(invalid("contenders", "must be >= 1"));
        }
        if self.contenders > MAX_CONTENDERS {
            return Err(invalid(
                "contenders",
                format!("at most {MAX_CONTENDERS} supported, got {}", self.contenders),
            ));
        }
        if self.mini_slots == 0 {
            return Err(invalid("mini_slots", "must be >= 1"));
        }
        Ok(())
    }

    /// Probability that one particular other contender misses a given slot.
    fn miss(&self) -> f64 {
        1.0 - 1.0 / f64::from(self.mini_slots)
    }
}

/// Mean latency of a CSMA link over `hops` hops: `hops * (t_cs + t_tx)`.
pub fn ieee80211_latency(p: &TimingParams) -> Result<f64, AnalyticError> {
    p.validate()?;
    Ok(f64::from(p.hops) * (p.t_cs + p.t_tx))
}

/// Mean S-MAC latency without adaptive listening:
/// `hops * T_f - T_f / 2 + t_cs + t_tx`.
pub fn smac_latency(p: &TimingParams) -> Result<f64, AnalyticError> {
    p.validate()?;
    let frame = p.cycle_len();
    Ok(f64::from(p.hops) * frame - frame / 2.0 + p.t_cs + p.t_tx)
}

/// Delay of one S-MAC hop after the first: `T_f + t_cs_curr - t_cs_prev`.
///
/// Takes sampled backoffs, so averaging over draws recovers the mean form.
pub fn smac_hop_delay(
    p: &TimingParams,
    t_cs_prev: f64,
    t_cs_curr: f64,
) -> Result<f64, AnalyticError> {
    p.validate()?;
    if !(t_cs_prev >= 0.0 && t_cs_prev.is_finite()) {
        return Err(invalid("t_cs_prev", "must be >= 0"));
    }
    if !(t_cs_curr >= 0.0 && t_cs_curr.is_finite()) {
        return Err(invalid("t_cs_curr", "must be >= 0"));
    }
    Ok(p.cycle_len() + t_cs_curr - t_cs_prev)
}

/// H-MAC cycle length `t_active + slot_count * t_slot`.
pub fn hmac_frame_length(p: &TimingParams) -> Result<f64, AnalyticError> {
    p.validate()?;
    Ok(p.cycle_len())
}

/// Mean H-MAC latency `hops * T_fx / reserved_hops`.
///
/// With `apply_frame_rounding` the packet is taken to advance in whole
/// frames, `ceil(hops / reserved_hops) * T_fx`.
pub fn hmac_latency(p: &TimingParams, apply_frame_rounding: bool) -> Result<f64, AnalyticError> {
    p.validate()?;
    if p.reserved_hops > p.hops {
        return Err(invalid(
            "reserved_hops",
            format!("{} exceeds hops {}", p.reserved_hops, p.hops),
        ));
    }
    let frame = p.cycle_len();
    if apply_frame_rounding {
        let frames = p.hops.div_ceil(p.reserved_hops);
        Ok(f64::from(frames) * frame)
    } else {
        Ok(f64::from(p.hops) * frame / f64::from(p.reserved_hops))
    }
}

/// Same as [`hmac_latency`] without rounding, for a measured (fractional)
/// hops-per-frame rate.
pub fn hmac_latency_at_rate(p: &TimingParams, hops_per_frame: f64) -> Result<f64, AnalyticError> {
    p.validate()?;
    if !(hops_per_frame.is_finite() && hops_per_frame >= 1.0) {
        return Err(invalid("hops_per_frame", format!("must be >= 1, got {hops_per_frame}")));
    }
    Ok(f64::from(p.hops) * p.cycle_len() / hops_per_frame)
}

/// Fraction of the cycle spent in the sleep period.
pub fn duty_fraction(p: &TimingParams) -> Result<f64, AnalyticError> {
    p.validate()?;
    Ok(p.sleep_len() / p.cycle_len())
}

/// S-MAC rate: `n_p` packets to a single peer per frame, in packets/second.
pub fn smac_throughput(tp: &ThroughputParams, p: &TimingParams) -> Result<f64, AnalyticError> {
    tp.validate()?;
    p.validate()?;
    Ok(f64::from(tp.packets_per_exchange) / (p.t_active + tp.sleep_time))
}

/// H-MAC rate: `n_p` packets to each of `n_m` peers per frame, in
/// packets/second. The product may not exceed the data slot count.
pub fn hmac_throughput(tp: &ThroughputParams, p: &TimingParams) -> Result<f64, AnalyticError> {
    tp.validate()?;
    p.validate()?;
    let requested = u64::from(tp.packets_per_exchange) * u64::from(tp.peers_per_frame);
    if requested > u64::from(p.slot_count) {
        return Err(AnalyticError::Capacity {
            requested,
            available: p.slot_count,
        });
    }
    Ok(requested as f64 / p.cycle_len())
}

/// Exact binomial coefficient for `n <= MAX_CONTENDERS`.
fn binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n && n <= MAX_CONTENDERS);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as f64
}

/// Probability that exactly `n` of the contenders land in one given slot.
pub fn collision_slot_pmf(n: u32, c: &ContentionParams) -> Result<f64, AnalyticError> {
    c.validate()?;
    if n > c.contenders {
        return Err(AnalyticError::Domain {
            n,
            contenders: c.contenders,
        });
    }
    let hit = 1.0 / f64::from(c.mini_slots);
    let n_i = n as i32;
    let rest = (c.contenders - n) as i32;
    Ok(binomial(c.contenders, n) * hit.powi(n_i) * c.miss().powi(rest))
}

/// Expected number of slots holding exactly `n` requests.
pub fn expected_slots_with(n: u32, c: &ContentionParams) -> Result<f64, AnalyticError> {
    Ok(f64::from(c.mini_slots) * collision_slot_pmf(n, c)?)
}

/// Expected number of requests that share their slot with another request.
pub fn expected_collided(c: &ContentionParams) -> Result<f64, AnalyticError> {
    c.validate()?;
    let n = f64::from(c.contenders);
    Ok(n - n * c.miss().powi(c.contenders as i32 - 1))
}

/// Fraction of requests decoded without collision, `(1 - 1/S_m)^(N-1)`.
pub fn success_ratio(c: &ContentionParams) -> Result<f64, AnalyticError> {
    c.validate()?;
    Ok(c.miss().powi(c.contenders as i32 - 1))
}
