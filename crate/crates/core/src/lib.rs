//! Discrete-event model of the IEEE 802.15.4e DSME MAC running over a LoRa
//! physical layer.
//!
//! - [`calendar`]: superframe, multisuperframe and beacon interval arithmetic.
//! - [`phy`]: LoRa airtime, shared multi-channel medium, CAD-based CCA.
//! - [`mac`]: transmit queue, slotted CSMA-CA, GTS cells, ACKs, beacons, sync.
//! - [`sim`]: the sensor-actuator experiment and its metrics.
//! - [`memmodel`]: heap cost of runtime MAC objects.
//! - [`report`]: trace, summary and CDF file formats.

pub mod calendar;
pub mod error;
pub mod mac;
pub mod memmodel;
pub mod phy;
pub mod report;
pub mod sim;
pub mod time;

pub use calendar::{MacConfig, SlotKind, SlotRef};
pub use error::{Error, Result};
pub use mac::{CsmaParams, Frame, GtsCell, NodeId};
pub use memmodel::{heap_usage, HeapCostParams, HeapUsage};
pub use phy::PhyConfig;
pub use sim::{run, t_qo, Mode, PacketRecord, PacketStatus, RunOutput, Scenario, Summary};
pub use time::Micros;
