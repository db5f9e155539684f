//! DSME time structure: beacon intervals, multisuperframes, superframes and slots.
//!
//! A superframe is `slots_per_superframe` slots of `base_slot_symbols * 2^SO`
//! symbols each. Slot 0 is the beacon slot, the next `cap_slots` slots form the
//! contention access period and the remaining `cfp_slots` slots the contention
//! free period. A multisuperframe holds `2^(MO-SO)` superframes and a beacon
//! interval holds `2^(BO-MO)` multisuperframes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::GtsCell;
use crate::time::Micros;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacConfig {
    pub superframe_order: u32,
    pub multisuperframe_order: u32,
    pub beacon_order: u32,
    /// Duration of one PHY symbol.
    pub symbol_time: Micros,
    pub slots_per_superframe: u32,
    pub base_slot_symbols: u32,
    pub cap_slots: u32,
    pub cfp_slots: u32,
    /// MAC transmit queue capacity in frames.
    pub queue_capacity: usize,
    /// MAC header and footer bytes added to every data and beacon payload.
    pub mac_overhead_bytes: u32,
    /// Symbols between the end of a data frame and the start of its ACK.
    pub ack_turnaround_symbols: u32,
}

impl Default for MacConfig {
    fn default() -> Self {
        MacConfig {
            superframe_order: 3,
            multisuperframe_order: 3,
            beacon_order: 4,
            symbol_time: Micros(1_024),
            slots_per_superframe: 16,
            base_slot_symbols: 60,
            cap_slots: 8,
            cfp_slots: 7,
            queue_capacity: 8,
            mac_overhead_bytes: 9,
            ack_turnaround_symbols: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    Beacon,
    Cap,
    Cfp,
}

/// Calendar coordinates of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotRef {
    pub beacon_interval_index: u64,
    /// Multisuperframe index within the beacon interval.
    pub multisuperframe_index: u64,
    /// Superframe index within the multisuperframe.
    pub superframe_index: u64,
    /// Slot index within the superframe; 0 is the beacon slot.
    pub slot_index: u32,
    pub slot_kind: SlotKind,
}

/// Half-open time window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: Micros,
    pub end: Micros,
}

impl Window {
    pub fn contains(&self, t: Micros) -> bool {
        self.start <= t && t < self.end
    }
}

impl MacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMacConfig(m));
        if !(self.superframe_order <= self.multisuperframe_order
            && self.multisuperframe_order <= self.beacon_order)
        {
            return bad(format!(
                "orders must satisfy SO <= MO <= BO (got {}, {}, {})",
                self.superframe_order, self.multisuperframe_order, self.beacon_order
            ));
        }
        if self.beacon_order > 14 {
            return bad(format!("beacon_order {} exceeds 14", self.beacon_order));
        }
        if 1 + self.cap_slots + self.cfp_slots != self.slots_per_superframe {
            return bad(format!(
                "1 + cap_slots ({}) + cfp_slots ({}) != slots_per_superframe ({})",
                self.cap_slots, self.cfp_slots, self.slots_per_superframe
            ));
        }
        if self.base_slot_symbols == 0 {
            return bad("base_slot_symbols must be positive".into());
        }
        Ok(())
    }

    pub fn slot_duration(&self) -> Micros {
        self.symbol_time * (u64::from(self.base_slot_symbols) << self.superframe_order)
    }

    pub fn superframe_duration(&self) -> Micros {
        self.slot_duration() * u64::from(self.slots_per_superframe)
    }

    pub fn superframes_per_multisuperframe(&self) -> u64 {
        1 << (self.multisuperframe_order - self.superframe_order)
    }

    pub fn multisuperframes_per_beacon_interval(&self) -> u64 {
        1 << (self.beacon_order - self.multisuperframe_order)
    }

    pub fn multisuperframe_duration(&self) -> Micros {
        self.superframe_duration() * self.superframes_per_multisuperframe()
    }

    pub fn beacon_interval_duration(&self) -> Micros {
        self.multisuperframe_duration() * self.multisuperframes_per_beacon_interval()
    }

    /// First CFP slot index.
    pub fn cfp_start(&self) -> u32 {
        1 + self.cap_slots
    }

    /// GTS cells available per multisuperframe on a single channel.
    pub fn gts_slots_per_multisuperframe(&self) -> usize {
        self.cfp_slots as usize * self.superframes_per_multisuperframe() as usize
    }

    pub fn slot_kind(&self, slot_index: u32) -> SlotKind {
        if slot_index == 0 {
            SlotKind::Beacon
        } else if slot_index <= self.cap_slots {
            SlotKind::Cap
        } else {
            SlotKind::Cfp
        }
    }

    pub fn slot_at(&self, t: Micros) -> SlotRef {
        let slot = self.slot_duration().as_micros();
        let global_slot = t.as_micros() / slot;
        let per_sf = u64::from(self.slots_per_superframe);
        let global_sf = global_slot / per_sf;
        let slot_index = (global_slot % per_sf) as u32;
        let sf_per_msf = self.superframes_per_multisuperframe();
        let global_msf = global_sf / sf_per_msf;
        let msf_per_bi = self.multisuperframes_per_beacon_interval();
        SlotRef {
            beacon_interval_index: global_msf / msf_per_bi,
            multisuperframe_index: global_msf % msf_per_bi,
            superframe_index: global_sf % sf_per_msf,
            slot_index,
            slot_kind: self.slot_kind(slot_index),
        }
    }

    /// Start time of a slot; inverse of [`MacConfig::slot_at`].
    pub fn time_of(&self, s: &SlotRef) -> Micros {
        let global_msf =
            s.beacon_interval_index * self.multisuperframes_per_beacon_interval() + s.multisuperframe_index;
        let global_sf = global_msf * self.superframes_per_multisuperframe() + s.superframe_index;
        let global_slot = global_sf * u64::from(self.slots_per_superframe) + u64::from(s.slot_index);
        self.slot_duration() * global_slot
    }

    /// Start of the slot containing `t`.
    pub fn slot_start(&self, t: Micros) -> Micros {
        let slot = self.slot_duration().as_micros();
        Micros(t.as_micros() / slot * slot)
    }

    /// The CAP window of the superframe starting at `sf_start`.
    fn cap_of_superframe(&self, sf_start: Micros) -> Window {
        let slot = self.slot_duration();
        Window {
            start: sf_start + slot,
            end: sf_start + slot * u64::from(1 + self.cap_slots),
        }
    }

    /// The CAP window containing `t`, if `t` lies inside one.
    pub fn cap_window_at(&self, t: Micros) -> Option<Window> {
        let sf = self.superframe_duration().as_micros();
        let w = self.cap_of_superframe(Micros(t.as_micros() / sf * sf));
        w.contains(t).then_some(w)
    }

    /// The CAP window containing `t`, or else the next one to start after `t`.
    pub fn current_or_next_cap(&self, t: Micros) -> Window {
        let sf = self.superframe_duration().as_micros();
        let sf_start = Micros(t.as_micros() / sf * sf);
        let w = self.cap_of_superframe(sf_start);
        if t < w.end {
            w
        } else {
            self.cap_of_superframe(sf_start + Micros(sf))
        }
    }

    /// Earliest start of `cell` at or after `now`. Occurrences repeat every
    /// multisuperframe.
    pub fn next_occurrence(&self, cell: &GtsCell, now: Micros) -> Result<Micros> {
        let offset = self.cell_offset(cell)?;
        let msf = self.multisuperframe_duration().as_micros();
        let base = now.as_micros() / msf * msf;
        let mut at = base + offset.as_micros();
        if at < now.as_micros() {
            at += msf;
        }
        Ok(Micros(at))
    }

    /// Offset of a cell's slot from the start of its multisuperframe.
    ///
    /// `cell.slot_index` counts CFP slots across the whole multisuperframe:
    /// superframe `k` of the multisuperframe covers indices
    /// `k * slots_per_superframe + cfp_start ..`.
    pub fn cell_offset(&self, cell: &GtsCell) -> Result<Micros> {
        let per_sf = self.slots_per_superframe;
        let sf = u64::from(cell.slot_index / per_sf);
        let in_sf = cell.slot_index % per_sf;
        if sf >= self.superframes_per_multisuperframe() || self.slot_kind(in_sf) != SlotKind::Cfp {
            return Err(Error::InvalidCell { slot: cell.slot_index });
        }
        Ok(self.slot_duration() * (sf * u64::from(per_sf) + u64::from(in_sf)))
    }
}
