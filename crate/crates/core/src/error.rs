use thiserror::Error;

use crate::mac::NodeId;
use crate::time::Micros;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("InvalidMacConfig: {0}")]
    InvalidMacConfig(String),
    #[error("InvalidPhyConfig: {0}")]
    InvalidPhyConfig(String),
    #[error("InvalidCell: slot {slot} is not a CFP slot")]
    InvalidCell { slot: u32 },
    #[error("InvalidChannel: channel {channel} >= channel count {count}")]
    InvalidChannel { channel: u32, count: u32 },
    #[error("RadioBusy: node {0} is already transmitting or receiving")]
    RadioBusy(NodeId),
    #[error("CapacityExceeded: {required} > {capacity}")]
    CapacityExceeded { required: usize, capacity: usize },
    #[error("SlotTooShort: exchange takes {needed}, slot lasts {slot}")]
    SlotTooShort { needed: Micros, slot: Micros },
    #[error("EmptyScenario: at least one sensor is required")]
    EmptyScenario,
    #[error("InvalidScenario: {0}")]
    InvalidScenario(String),
    #[error("MalformedTrace: line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
