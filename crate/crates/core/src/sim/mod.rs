//! Deterministic discrete-event simulation of the sensor-actuator experiment.
//!
//! Node 0 is the coordinator, nodes `1..=n_sensors` are sensors and the
//! actuators follow. Sensors generate traffic; actuators only acknowledge and
//! the coordinator only beacons.

mod engine;
mod event;
mod metrics;

use serde::{Deserialize, Serialize};

use crate::calendar::MacConfig;
use crate::error::{Error, Result};
use crate::mac::{CsmaParams, FrameKind, NodeId, NodeRole};
use crate::memmodel::HeapUsage;
use crate::phy::{PhyConfig, Reception};
use crate::time::Micros;

pub use event::{Event, EventKind, EventQueue};
pub use metrics::{
    nearest_rank, percentiles, sorted_ttcs, summarize, PacketRecord, PacketStatus, Summary, TtcPercentiles,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Data goes through slotted CSMA-CA in the contention access period.
    Cap,
    /// Data goes through statically allocated GTS cells.
    Cfp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArrivalProcess {
    /// Exponential inter-arrival times with mean `tx_interval_mean`.
    Exponential,
    /// One packet every `tx_interval_mean`, starting at time zero.
    Periodic,
}

/// How a sensor picks the actuator for each new packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DestinationPolicy {
    /// Sensor `i` (0-based) always sends to actuator `i mod n_actuators`.
    Fixed,
    /// Cycle through all actuators, starting at actuator `i mod n_actuators`.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_sensors: u32,
    pub n_actuators: u32,
    pub mode: Mode,
    pub tx_interval_mean: Micros,
    pub payload_bytes: u32,
    pub duration: Micros,
    pub seed: u64,
    /// Packets generated before this time are excluded from the summary.
    pub warmup: Micros,
    pub arrivals: ArrivalProcess,
    pub destination: DestinationPolicy,
    /// Clock drift of every non-coordinator node.
    pub drift_ppm: f64,
}

impl Scenario {
    pub fn new(mode: Mode, n_sensors: u32, tx_interval_mean: Micros) -> Self {
        Scenario {
            n_sensors,
            n_actuators: 3,
            mode,
            tx_interval_mean,
            payload_bytes: 16,
            duration: Micros::from_secs(3_600),
            seed: 1,
            warmup: Micros::ZERO,
            arrivals: ArrivalProcess::Exponential,
            destination: DestinationPolicy::Fixed,
            drift_ppm: 0.0,
        }
    }

    pub const COORDINATOR: NodeId = 0;

    pub fn total_nodes(&self) -> u32 {
        self.n_sensors + self.n_actuators + 1
    }

    pub fn sensor_ids(&self) -> Vec<NodeId> {
        (1..=self.n_sensors).collect()
    }

    pub fn actuator_ids(&self) -> Vec<NodeId> {
        (self.n_sensors + 1..=self.n_sensors + self.n_actuators).collect()
    }

    pub fn role_of(&self, node: NodeId) -> NodeRole {
        if node == Self::COORDINATOR {
            NodeRole::Coordinator
        } else if node <= self.n_sensors {
            NodeRole::Sensor
        } else {
            NodeRole::Actuator
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sensors == 0 {
            return Err(Error::EmptyScenario);
        }
        let bad = |m: &str| Err(Error::InvalidScenario(m.to_string()));
        if self.n_actuators == 0 {
            return bad("n_actuators must be at least 1");
        }
        if self.tx_interval_mean == Micros::ZERO {
            return bad("tx_interval_mean must be positive");
        }
        if self.duration == Micros::ZERO {
            return bad("duration must be positive");
        }
        if !self.drift_ppm.is_finite() {
            return bad("drift_ppm must be finite");
        }
        Ok(())
    }
}

/// Completion time of the last packet of a saturated queue that drains one
/// frame per multisuperframe without retransmissions.
pub fn t_qo(mac_cfg: &MacConfig, queue_capacity: usize) -> Micros {
    mac_cfg.multisuperframe_duration() * queue_capacity as u64
}

/// One frame that went on air.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxRecord {
    pub sender: NodeId,
    pub dst: NodeId,
    pub channel: u32,
    pub start: Micros,
    pub end: Micros,
    pub kind: FrameKind,
    pub pkt_id: u64,
    pub outcome: Reception,
}

/// Live MAC objects of one node at their high-water mark, and the heap they need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeCensus {
    pub node: NodeId,
    pub role: NodeRole,
    pub cells: u64,
    pub neighbours: u64,
    pub max_queue_len: usize,
    pub heap: HeapUsage,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub events: u64,
    pub data_transmissions: u64,
    pub data_collisions: u64,
    pub cfp_collisions: u64,
    pub ack_transmissions: u64,
    pub ack_collisions: u64,
    /// ACKs that could not be sent because the receiver's radio was busy.
    pub acks_suppressed: u64,
    pub beacons_sent: u64,
    pub beacons_heard: u64,
    /// Largest clock offset any node reached before a beacon reset it.
    pub max_pre_beacon_offset_ns: i64,
    pub census: Vec<NodeCensus>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<PacketRecord>,
    pub summary: Summary,
    pub stats: RunStats,
    pub transmissions: Vec<TxRecord>,
}

/// Simulates `scenario.duration` of virtual time.
pub fn run(scenario: &Scenario, mac_cfg: &MacConfig, phy_cfg: &PhyConfig, csma: &CsmaParams) -> Result<RunOutput> {
    engine::Engine::new(scenario, mac_cfg, phy_cfg, csma)?.run()
}
