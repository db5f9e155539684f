//! LoRa physical layer model: airtime, a multi-channel shared medium with
//! collision detection, and channel activity detection used as CCA.
//!
//! Propagation is ideal: every node hears every other node. Frames are lost
//! only when they overlap another frame on the same channel (no capture
//! effect) or when the intended receiver is itself transmitting.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::{Frame, NodeId, BROADCAST};
use crate::time::Micros;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyConfig {
    pub spreading_factor: u32,
    pub bandwidth_hz: u32,
    /// Coding rate index: 4/(4+CR).
    pub coding_rate: u32,
    pub preamble_symbols: u32,
    pub explicit_header: bool,
    pub low_datarate_optimize: bool,
    pub channel_count: u32,
    /// Probability that CAD reports a busy channel as clear.
    pub cca_false_clear_prob: f64,
}

impl Default for PhyConfig {
    fn default() -> Self {
        PhyConfig {
            spreading_factor: 7,
            bandwidth_hz: 125_000,
            coding_rate: 1,
            preamble_symbols: 8,
            explicit_header: true,
            low_datarate_optimize: false,
            channel_count: 16,
            cca_false_clear_prob: 0.1,
        }
    }
}

impl PhyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPhyConfig(m));
        if !(6..=12).contains(&self.spreading_factor) {
            return bad(format!("spreading_factor {} outside 6..=12", self.spreading_factor));
        }
        if self.bandwidth_hz == 0 {
            return bad("bandwidth_hz must be positive".into());
        }
        if !(1..=4).contains(&self.coding_rate) {
            return bad(format!("coding_rate {} outside 1..=4", self.coding_rate));
        }
        if self.channel_count == 0 {
            return bad("channel_count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.cca_false_clear_prob) {
            return bad(format!("cca_false_clear_prob {} outside [0, 1]", self.cca_false_clear_prob));
        }
        Ok(())
    }

    fn symbol_secs(&self) -> f64 {
        f64::from(1u32 << self.spreading_factor) / f64::from(self.bandwidth_hz)
    }

    /// `2^SF / BW`, rounded to the nearest microsecond.
    pub fn symbol_time(&self) -> Micros {
        Micros::from_secs_f64(self.symbol_secs())
    }

    /// Airtime of a frame carrying `payload_bytes` of PHY payload (CRC on).
    pub fn time_on_air(&self, payload_bytes: u32) -> Result<Micros> {
        let sf = i64::from(self.spreading_factor);
        let de = i64::from(self.low_datarate_optimize);
        let ih = i64::from(!self.explicit_header);
        let denom = 4 * (sf - 2 * de);
        if denom <= 0 {
            return Err(Error::InvalidPhyConfig(format!(
                "SF - 2*DE must be positive (SF {sf}, DE {de})"
            )));
        }
        let num = 8 * i64::from(payload_bytes) - 4 * sf + 28 + 16 - 20 * ih;
        // Ceiling division that also holds for negative numerators.
        let blocks = num.div_euclid(denom) + i64::from(num.rem_euclid(denom) != 0);
        let payload_symbols = (blocks * (i64::from(self.coding_rate) + 4)).max(0);
        let symbols = f64::from(self.preamble_symbols) + 4.25 + 8.0 + payload_symbols as f64;
        Ok(Micros::from_secs_f64(symbols * self.symbol_secs()))
    }
}

pub type TxId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub id: TxId,
    pub sender: NodeId,
    pub channel: u32,
    pub start: Micros,
    pub end: Micros,
    pub frame: Frame,
}

impl Transmission {
    pub fn overlaps(&self, other: &Transmission) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reception {
    Delivered,
    Collided,
    /// No collision, but the destination was transmitting during the frame.
    NotHeard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcaResult {
    Clear,
    Busy,
}

#[derive(Debug, Clone)]
pub struct Resolution {
    pub tx: Transmission,
    pub outcome: Reception,
    deaf: Vec<NodeId>,
}

impl Resolution {
    /// Whether `node` received the frame intact. Broadcast frames may be heard
    /// by any node other than the sender.
    pub fn heard_by(&self, node: NodeId) -> bool {
        self.outcome != Reception::Collided
            && node != self.tx.sender
            && (self.tx.frame.dst == BROADCAST || self.tx.frame.dst == node)
            && !self.deaf.contains(&node)
    }
}

#[derive(Debug)]
struct OnAir {
    tx: Transmission,
    collided: bool,
    /// Nodes that transmitted at some point during this frame.
    deaf: Vec<NodeId>,
}

/// The shared radio medium. Owned and mutated by the simulator event loop.
#[derive(Debug)]
pub struct Medium {
    cfg: PhyConfig,
    on_air: Vec<OnAir>,
    next_id: TxId,
}

impl Medium {
    pub fn new(cfg: PhyConfig) -> Self {
        Medium { cfg, on_air: Vec::new(), next_id: 0 }
    }

    pub fn config(&self) -> &PhyConfig {
        &self.cfg
    }

    pub fn is_transmitting(&self, node: NodeId, now: Micros) -> bool {
        self.on_air.iter().any(|o| o.tx.sender == node && o.tx.start <= now && now < o.tx.end)
    }

    fn is_receiving(&self, node: NodeId, now: Micros) -> bool {
        self.on_air
            .iter()
            .any(|o| o.tx.frame.dst == node && o.tx.start <= now && now < o.tx.end)
    }

    pub fn begin_transmission(
        &mut self,
        sender: NodeId,
        channel: u32,
        frame: Frame,
        now: Micros,
    ) -> Result<Transmission> {
        if channel >= self.cfg.channel_count {
            return Err(Error::InvalidChannel { channel, count: self.cfg.channel_count });
        }
        if self.is_transmitting(sender, now) || self.is_receiving(sender, now) {
            return Err(Error::RadioBusy(sender));
        }
        let airtime = self.cfg.time_on_air(frame.on_air_bytes())?;
        let tx = Transmission { id: self.next_id, sender, channel, start: now, end: now + airtime, frame };
        self.next_id += 1;

        let mut collided = false;
        let mut deaf = Vec::new();
        for other in &mut self.on_air {
            if other.tx.end <= now {
                continue;
            }
            if other.tx.channel == channel && other.tx.overlaps(&tx) {
                other.collided = true;
                collided = true;
            }
            // Half-duplex: neither side can hear the other while both are on air.
            if !other.deaf.contains(&sender) {
                other.deaf.push(sender);
            }
            if !deaf.contains(&other.tx.sender) {
                deaf.push(other.tx.sender);
            }
        }
        self.on_air.push(OnAir { tx: tx.clone(), collided, deaf });
        Ok(tx)
    }

    /// Settles the fate of a finished transmission and removes it from the medium.
    pub fn resolve_reception(&mut self, id: TxId) -> Option<Resolution> {
        let pos = self.on_air.iter().position(|o| o.tx.id == id)?;
        let o = self.on_air.swap_remove(pos);
        let outcome = if o.collided {
            Reception::Collided
        } else if o.tx.frame.dst != BROADCAST && o.deaf.contains(&o.tx.frame.dst) {
            Reception::NotHeard
        } else {
            Reception::Delivered
        };
        Some(Resolution { tx: o.tx, outcome, deaf: o.deaf })
    }

    /// Whether a transmission on `channel` is in progress at `now`. A frame that
    /// starts exactly at `now` is not yet detectable.
    pub fn channel_busy(&self, channel: u32, now: Micros) -> bool {
        self.on_air
            .iter()
            .any(|o| o.tx.channel == channel && o.tx.start < now && now < o.tx.end)
    }

    /// Clear channel assessment via channel activity detection. A busy channel
    /// is misreported as clear with probability `cca_false_clear_prob`.
    pub fn cca<R: Rng + ?Sized>(&self, channel: u32, now: Micros, rng: &mut R) -> CcaResult {
        if !self.channel_busy(channel, now) {
            return CcaResult::Clear;
        }
        if rng.random_bool(self.cfg.cca_false_clear_prob) {
            CcaResult::Clear
        } else {
            CcaResult::Busy
        }
    }
}
