use serde::{Deserialize, Serialize};

use crate::calendar::MacConfig;
use crate::error::Result;
use crate::phy::{Medium, Transmission};
use crate::time::Micros;

use super::{Frame, FrameKind, NodeId, BROADCAST};

/// Beacon payload carried on top of the MAC header.
pub const BEACON_PAYLOAD_BYTES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    Coordinator,
    Sensor,
    Actuator,
}

/// Beacons go out at the start of every beacon interval.
pub fn is_beacon_due(slot_start: Micros, cfg: &MacConfig) -> bool {
    slot_start.as_micros().is_multiple_of(cfg.beacon_interval_duration().as_micros())
}

/// Transmits the coordinator's beacon on the common channel if `slot_start`
/// opens a beacon interval.
pub fn emit_beacon(
    role: NodeRole,
    node: NodeId,
    slot_start: Micros,
    cfg: &MacConfig,
    medium: &mut Medium,
) -> Result<Option<Transmission>> {
    if role != NodeRole::Coordinator || !is_beacon_due(slot_start, cfg) {
        return Ok(None);
    }
    let frame = Frame {
        pkt_id: slot_start.as_micros() / cfg.beacon_interval_duration().as_micros(),
        kind: FrameKind::Beacon,
        src: node,
        dst: BROADCAST,
        payload_bytes: BEACON_PAYLOAD_BYTES,
        mac_overhead_bytes: cfg.mac_overhead_bytes,
        gen_time: slot_start,
        retries: 0,
    };
    medium.begin_transmission(node, 0, frame, slot_start).map(Some)
}
