use serde::{Deserialize, Serialize};

use crate::mac::NodeId;
use crate::time::Micros;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PacketStatus {
    Delivered,
    DropQueue,
    DropChannelAccess,
    DropRetry,
    InFlightAtEnd,
}

impl PacketStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketStatus::Delivered => "Delivered",
            PacketStatus::DropQueue => "DropQueue",
            PacketStatus::DropChannelAccess => "DropChannelAccess",
            PacketStatus::DropRetry => "DropRetry",
            PacketStatus::InFlightAtEnd => "InFlightAtEnd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "Delivered" => PacketStatus::Delivered,
            "DropQueue" => PacketStatus::DropQueue,
            "DropChannelAccess" => PacketStatus::DropChannelAccess,
            "DropRetry" => PacketStatus::DropRetry,
            "InFlightAtEnd" => PacketStatus::InFlightAtEnd,
            _ => return None,
        })
    }
}

/// Outcome of one application packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    pub pkt_id: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub gen_time: Micros,
    /// Time the sender received the ACK; present iff delivered.
    pub completion_time: Option<Micros>,
    pub status: PacketStatus,
    pub retries: u32,
    /// `(slot_index, channel)` of the GTS serving this link, in CFP mode.
    pub cell: Option<(u32, u32)>,
}

impl PacketRecord {
    pub fn ttc(&self) -> Option<Micros> {
        self.completion_time.map(|c| c - self.gen_time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TtcPercentiles {
    pub p50: Micros,
    pub p95: Micros,
    pub max: Micros,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub generated: u64,
    pub delivered: u64,
    pub drop_queue: u64,
    pub drop_channel_access: u64,
    pub drop_retry: u64,
    pub in_flight: u64,
    pub prr: f64,
    pub ttc_p50: Option<Micros>,
    pub ttc_p95: Option<Micros>,
    pub ttc_max: Option<Micros>,
    /// Saturated-queue completion time; only meaningful in CFP mode.
    pub t_qo: Option<Micros>,
}

impl Summary {
    /// Whether every generated packet is accounted for exactly once.
    pub fn is_conserved(&self) -> bool {
        self.generated
            == self.delivered + self.drop_queue + self.drop_channel_access + self.drop_retry + self.in_flight
    }
}

/// Nearest-rank value for percentile `p` (0 < p <= 100) of sorted values.
pub fn nearest_rank(sorted: &[Micros], p: f64) -> Option<Micros> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

/// Sorted times to completion of delivered packets generated at or after `warmup`.
pub fn sorted_ttcs(records: &[PacketRecord], warmup: Micros) -> Vec<Micros> {
    let mut v: Vec<Micros> =
        records.iter().filter(|r| r.gen_time >= warmup).filter_map(PacketRecord::ttc).collect();
    v.sort_unstable();
    v
}

pub fn percentiles(records: &[PacketRecord], warmup: Micros) -> Option<TtcPercentiles> {
    let v = sorted_ttcs(records, warmup);
    Some(TtcPercentiles { p50: nearest_rank(&v, 50.0)?, p95: nearest_rank(&v, 95.0)?, max: *v.last()? })
}

pub fn summarize(records: &[PacketRecord], warmup: Micros, t_qo: Option<Micros>) -> Summary {
    let mut s = Summary {
        generated: 0,
        delivered: 0,
        drop_queue: 0,
        drop_channel_access: 0,
        drop_retry: 0,
        in_flight: 0,
        prr: 0.0,
        ttc_p50: None,
        ttc_p95: None,
        ttc_max: None,
        t_qo,
    };
    for r in records.iter().filter(|r| r.gen_time >= warmup) {
        s.generated += 1;
        match r.status {
            PacketStatus::Delivered => s.delivered += 1,
            PacketStatus::DropQueue => s.drop_queue += 1,
            PacketStatus::DropChannelAccess => s.drop_channel_access += 1,
            PacketStatus::DropRetry => s.drop_retry += 1,
            PacketStatus::InFlightAtEnd => s.in_flight += 1,
        }
    }
    if s.generated > 0 {
        s.prr = s.delivered as f64 / s.generated as f64;
    }
    if let Some(p) = percentiles(records, warmup) {
        s.ttc_p50 = Some(p.p50);
        s.ttc_p95 = Some(p.p95);
        s.ttc_max = Some(p.max);
    }
    s
}
