use crate::time::Micros;

/// Beacon-driven time synchronization of a non-coordinator node.
///
/// The local clock drifts linearly at `drift_ppm` relative to the
/// coordinator; every received beacon re-aligns it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncState {
    pub last_beacon_time: Micros,
    /// Offset from the coordinator clock in nanoseconds, as of the last update.
    pub clock_offset_ns: i64,
    pub drift_ppm: f64,
    /// Largest offset magnitude observed just before a beacon reset it.
    pub max_pre_beacon_offset_ns: i64,
    pub beacons_received: u64,
}

impl SyncState {
    /// A node that is in sync at `at`.
    pub fn new(drift_ppm: f64, at: Micros) -> Self {
        SyncState {
            last_beacon_time: at,
            clock_offset_ns: 0,
            drift_ppm,
            max_pre_beacon_offset_ns: 0,
            beacons_received: 0,
        }
    }

    pub fn offset_at(&self, now: Micros) -> i64 {
        let elapsed = now.saturating_sub(self.last_beacon_time).as_micros() as f64;
        // ppm * us = 1e-6 us = 1e-3 ns
        (self.drift_ppm * elapsed * 1e-3).trunc() as i64
    }

    pub fn advance(&mut self, now: Micros) {
        self.clock_offset_ns = self.offset_at(now);
    }

    /// Handles a beacon received at `rx_time`; returns the offset it corrected.
    pub fn on_beacon(&mut self, rx_time: Micros) -> i64 {
        let pre = self.offset_at(rx_time);
        self.max_pre_beacon_offset_ns = self.max_pre_beacon_offset_ns.max(pre.abs());
        self.last_beacon_time = rx_time;
        self.clock_offset_ns = 0;
        self.beacons_received += 1;
        pre
    }

    /// Largest offset that can build up over `interval` without a beacon.
    pub fn drift_bound_ns(&self, interval: Micros) -> i64 {
        (self.drift_ppm.abs() * interval.as_micros() as f64 * 1e-3).trunc() as i64
    }
}
