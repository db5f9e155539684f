use crate::calendar::MacConfig;
use crate::error::{Error, Result};
use crate::phy::{Medium, Transmission};
use crate::time::Micros;

use super::{Frame, MacQueue, NodeId};

/// A guaranteed time slot: one (slot, channel) pair per multisuperframe owned
/// by a sender-receiver link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GtsCell {
    /// Slot index counted from the start of the multisuperframe.
    pub slot_index: u32,
    pub channel: u32,
    pub owner_tx: NodeId,
    pub owner_rx: NodeId,
}

/// Static bootstrap allocation: one cell per (sensor, actuator) pair.
///
/// Pair `p = sensor_index * |actuators| + actuator_index` takes CFP slot
/// `p mod G` and channel `p div G`, where `G` is the number of CFP slots in a
/// multisuperframe.
pub fn allocate_static_cells(
    sensors: &[NodeId],
    actuators: &[NodeId],
    cfg: &MacConfig,
    channel_count: u32,
) -> Result<Vec<GtsCell>> {
    let per_channel = cfg.gts_slots_per_multisuperframe();
    let capacity = per_channel * channel_count as usize;
    let required = sensors.len() * actuators.len();
    if required > capacity {
        return Err(Error::CapacityExceeded { required, capacity });
    }
    let mut cells = Vec::with_capacity(required);
    for (s, &tx) in sensors.iter().enumerate() {
        for (a, &rx) in actuators.iter().enumerate() {
            let p = s * actuators.len() + a;
            let q = (p % per_channel) as u32;
            let superframe = q / cfg.cfp_slots;
            let slot_index = superframe * cfg.slots_per_superframe + cfg.cfp_start() + q % cfg.cfp_slots;
            cells.push(GtsCell { slot_index, channel: (p / per_channel) as u32, owner_tx: tx, owner_rx: rx });
        }
    }
    Ok(cells)
}

/// The frame a cell occurrence carries: the oldest queued frame addressed to
/// the cell's receiver.
pub fn cfp_service<'q>(queue: &'q MacQueue, cell: &GtsCell) -> Option<&'q Frame> {
    queue.iter().find(|f| f.dst == cell.owner_rx)
}

/// Puts the frame chosen by [`cfp_service`] on air in the cell's channel.
pub fn cfp_transmit(
    queue: &MacQueue,
    cell: &GtsCell,
    at: Micros,
    medium: &mut Medium,
) -> Result<Option<Transmission>> {
    match cfp_service(queue, cell) {
        Some(f) => medium.begin_transmission(cell.owner_tx, cell.channel, f.clone(), at).map(Some),
        None => Ok(None),
    }
}

/// A data frame, the ACK turnaround and the ACK must all fit in one slot.
pub fn check_slot_fits(exchange: Micros, cfg: &MacConfig) -> Result<()> {
    let slot = cfg.slot_duration();
    if exchange > slot {
        return Err(Error::SlotTooShort { needed: exchange, slot });
    }
    Ok(())
}
