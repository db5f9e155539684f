//! Per-node DSME MAC building blocks.

mod beacon;
mod csma;
mod gts;
mod queue;
mod sync;

use serde::{Deserialize, Serialize};

use crate::time::Micros;

pub use beacon::{emit_beacon, is_beacon_due, NodeRole, BEACON_PAYLOAD_BYTES};
pub use csma::{align_to_backoff, cap_attempt, CapOutcome, CsmaParams, CsmaState};
pub use gts::{allocate_static_cells, cfp_service, cfp_transmit, check_slot_fits, GtsCell};
pub use queue::{handle_ack, AckOutcome, AckResult, EnqueueOutcome, MacQueue};
pub use sync::SyncState;

pub type NodeId = u32;

/// Destination address of broadcast frames (beacons).
pub const BROADCAST: NodeId = NodeId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameKind {
    Data,
    Ack,
    Beacon,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    /// Application packet id for data frames; the acknowledged packet for ACKs.
    pub pkt_id: u64,
    pub kind: FrameKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub payload_bytes: u32,
    pub mac_overhead_bytes: u32,
    pub gen_time: Micros,
    pub retries: u32,
}

impl Frame {
    pub fn data(
        pkt_id: u64,
        src: NodeId,
        dst: NodeId,
        payload_bytes: u32,
        mac_overhead_bytes: u32,
        gen_time: Micros,
    ) -> Self {
        Frame { pkt_id, kind: FrameKind::Data, src, dst, payload_bytes, mac_overhead_bytes, gen_time, retries: 0 }
    }

    /// Immediate acknowledgment; its airtime is that of an empty PHY payload.
    pub fn ack(src: NodeId, dst: NodeId, pkt_id: u64, now: Micros) -> Self {
        Frame {
            pkt_id,
            kind: FrameKind::Ack,
            src,
            dst,
            payload_bytes: 0,
            mac_overhead_bytes: 0,
            gen_time: now,
            retries: 0,
        }
    }

    pub fn on_air_bytes(&self) -> u32 {
        self.payload_bytes + self.mac_overhead_bytes
    }
}
