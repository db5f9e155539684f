//! Fixtures shared by the criterion benchmarks.

use dsme_lora::{Micros, Mode, Scenario};

/// The evaluation scenario: `sensors` sensors sending to three actuators.
pub fn evaluation_scenario(mode: Mode, sensors: u32, interval_s: u64) -> Scenario {
    let mut s = Scenario::new(mode, sensors, Micros::from_secs(interval_s));
    s.warmup = Micros::from_secs(300);
    s
}
