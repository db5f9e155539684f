use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::mac::NodeId;
use crate::phy::TxId;
use crate::time::Micros;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    SlotBoundary,
    BeaconDue,
    TxEnd { tx: TxId },
    /// The receiver of a data frame starts its ACK.
    AckDue { to: NodeId, channel: u32, pkt_id: u64 },
    AckTimeout { token: u64 },
    CcaSample { token: u64 },
    PacketArrival,
}

impl EventKind {
    /// Execution order among events at the same instant. Slot boundaries run
    /// first so slot ownership is settled before anything else happens, and
    /// frames ending now leave the medium before new ones start.
    fn rank(&self) -> u8 {
        match self {
            EventKind::SlotBoundary => 0,
            EventKind::BeaconDue => 1,
            EventKind::TxEnd { .. } => 2,
            EventKind::AckDue { .. } => 3,
            EventKind::AckTimeout { .. } => 4,
            EventKind::CcaSample { .. } => 5,
            EventKind::PacketArrival => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: Micros,
    pub seq: u64,
    pub kind: EventKind,
    pub target: NodeId,
}

impl Event {
    fn key(&self) -> (Micros, u8, u64) {
        (self.time, self.kind.rank(), self.seq)
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Future event list ordered by `(time, rank, seq)`; `seq` is the insertion
/// counter, so equal keys never occur.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: Micros, target: NodeId, kind: EventKind) {
        let ev = Event { time, seq: self.next_seq, kind, target };
        self.next_seq += 1;
        self.heap.push(Reverse(ev));
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
