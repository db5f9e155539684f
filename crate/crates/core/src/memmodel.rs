//! Heap cost model of the DSME MAC objects that are allocated at runtime.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapCostParams {
    /// Fixed cost of a packet, on top of the MAC frame without checksum.
    pub packet_base: u64,
    pub gts_slot: u64,
    pub neighbour_entry: u64,
}

impl Default for HeapCostParams {
    fn default() -> Self {
        HeapCostParams { packet_base: 92, gts_slot: 44, neighbour_entry: 124 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapUsage {
    /// GTS slots plus neighbour queue entries.
    pub slots: u64,
    /// Queued packets.
    pub packets: u64,
}

impl HeapUsage {
    pub fn total(&self) -> u64 {
        self.slots + self.packets
    }
}

impl std::ops::Add for HeapUsage {
    type Output = HeapUsage;
    fn add(self, rhs: HeapUsage) -> HeapUsage {
        HeapUsage { slots: self.slots + rhs.slots, packets: self.packets + rhs.packets }
    }
}

/// Heap bytes for `n_gts` allocated slots, `n_neighbours` neighbour entries and
/// one packet per entry of `frame_sizes` (MAC frame bytes without checksum).
pub fn heap_usage(n_gts: u64, n_neighbours: u64, frame_sizes: &[u64]) -> HeapUsage {
    heap_usage_with(&HeapCostParams::default(), n_gts, n_neighbours, frame_sizes)
}

pub fn heap_usage_with(
    costs: &HeapCostParams,
    n_gts: u64,
    n_neighbours: u64,
    frame_sizes: &[u64],
) -> HeapUsage {
    HeapUsage {
        slots: n_gts * costs.gts_slot + n_neighbours * costs.neighbour_entry,
        packets: frame_sizes.iter().map(|s| costs.packet_base + s).sum(),
    }
}
