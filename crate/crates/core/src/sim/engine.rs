use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::calendar::{MacConfig, SlotKind};
use crate::error::{Error, Result};
use crate::mac::{
    align_to_backoff, allocate_static_cells, cfp_service, check_slot_fits, emit_beacon, handle_ack, AckOutcome,
    AckResult, CsmaParams, CsmaState, EnqueueOutcome, Frame, FrameKind, GtsCell, MacQueue, NodeId, NodeRole,
    SyncState,
};
use crate::memmodel::heap_usage;
use crate::phy::{CcaResult, Medium, PhyConfig, Reception, Resolution, Transmission, TxId};
use crate::time::Micros;

use super::event::{EventKind, EventQueue};
use super::metrics::{summarize, PacketRecord, PacketStatus};
use super::{ArrivalProcess, DestinationPolicy, Mode, NodeCensus, RunOutput, RunStats, Scenario, TxRecord};

/// CAP traffic uses this channel only.
const COMMON_CHANNEL: u32 = 0;

/// Durations derived once from the configuration.
#[derive(Debug, Clone, Copy)]
struct Timing {
    slot: Micros,
    backoff_period: Micros,
    turnaround: Micros,
    data_airtime: Micros,
    /// Data frame, turnaround and ACK.
    exchange: Micros,
    /// How long a sender waits for the ACK after its frame ends.
    ack_wait: Micros,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeState {
    Idle,
    Backoff(CsmaState),
    /// Waiting for the next CAP to resume channel access.
    Deferred(CsmaState),
    Transmitting { pkt_id: u64 },
    AwaitingAck { pkt_id: u64 },
}

struct Node {
    id: NodeId,
    role: NodeRole,
    /// Index among sensors or among actuators.
    index: usize,
    queue: MacQueue,
    traffic_rng: ChaCha8Rng,
    mac_rng: ChaCha8Rng,
    packets_sent: u64,
    state: NodeState,
    /// Invalidates stale CCA and ACK timeout events.
    token: u64,
    sync: SyncState,
    /// Cells this node transmits in.
    cells: Vec<usize>,
    max_queue_len: usize,
}

fn node_rng(seed: u64, node: NodeId, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(node) * 2 + stream);
    rng
}

pub(super) struct Engine<'a> {
    scn: &'a Scenario,
    mac: &'a MacConfig,
    csma: &'a CsmaParams,
    timing: Timing,
    now: Micros,
    events: EventQueue,
    medium: Medium,
    nodes: Vec<Node>,
    actuators: Vec<NodeId>,
    cells: Vec<GtsCell>,
    /// Cells indexed by slot position within the multisuperframe.
    cells_by_slot: Vec<Vec<usize>>,
    /// Start of the last occurrence in which each cell carried a frame.
    cell_used: Vec<Option<Micros>>,
    records: Vec<PacketRecord>,
    transmissions: Vec<TxRecord>,
    stats: RunStats,
}

impl<'a> Engine<'a> {
    pub(super) fn new(scn: &'a Scenario, mac: &'a MacConfig, phy: &PhyConfig, csma: &'a CsmaParams) -> Result<Self> {
        scn.validate()?;
        mac.validate()?;
        phy.validate()?;
        csma.validate()?;
        let frame_bytes = scn.payload_bytes + mac.mac_overhead_bytes;
        if frame_bytes > 255 {
            return Err(Error::InvalidScenario(format!("frame of {frame_bytes} bytes exceeds 255")));
        }
        let data_airtime = phy.time_on_air(frame_bytes)?;
        let ack_airtime = phy.time_on_air(0)?;
        let turnaround = mac.symbol_time * u64::from(mac.ack_turnaround_symbols);
        let timing = Timing {
            slot: mac.slot_duration(),
            backoff_period: mac.symbol_time * u64::from(csma.backoff_period_symbols),
            turnaround,
            data_airtime,
            exchange: data_airtime + turnaround + ack_airtime,
            ack_wait: turnaround + ack_airtime + mac.symbol_time,
        };

        let sensors = scn.sensor_ids();
        let actuators = scn.actuator_ids();
        let cells = match scn.mode {
            Mode::Cfp => {
                let cells = allocate_static_cells(&sensors, &actuators, mac, phy.channel_count)?;
                check_slot_fits(timing.exchange, mac)?;
                cells
            }
            Mode::Cap => {
                let cap = mac.slot_duration() * u64::from(mac.cap_slots);
                if timing.exchange > cap {
                    return Err(Error::SlotTooShort { needed: timing.exchange, slot: cap });
                }
                Vec::new()
            }
        };
        let slots_per_msf = mac.slots_per_superframe as usize * mac.superframes_per_multisuperframe() as usize;
        let mut cells_by_slot = vec![Vec::new(); slots_per_msf];
        for (i, c) in cells.iter().enumerate() {
            cells_by_slot[c.slot_index as usize].push(i);
        }

        let mut nodes: Vec<Node> = (0..scn.total_nodes())
            .map(|id| {
                let role = scn.role_of(id);
                let index = match role {
                    NodeRole::Coordinator => 0,
                    NodeRole::Sensor => (id - 1) as usize,
                    NodeRole::Actuator => (id - scn.n_sensors - 1) as usize,
                };
                Node {
                    id,
                    role,
                    index,
                    queue: MacQueue::new(mac.queue_capacity),
                    traffic_rng: node_rng(scn.seed, id, 0),
                    mac_rng: node_rng(scn.seed, id, 1),
                    packets_sent: 0,
                    state: NodeState::Idle,
                    token: 0,
                    sync: SyncState::new(if role == NodeRole::Coordinator { 0.0 } else { scn.drift_ppm }, Micros::ZERO),
                    cells: Vec::new(),
                    max_queue_len: 0,
                }
            })
            .collect();
        for (i, c) in cells.iter().enumerate() {
            nodes[c.owner_tx as usize].cells.push(i);
        }

        Ok(Engine {
            scn,
            mac,
            csma,
            timing,
            now: Micros::ZERO,
            events: EventQueue::default(),
            medium: Medium::new(phy.clone()),
            nodes,
            actuators,
            cell_used: vec![None; cells.len()],
            cells,
            cells_by_slot,
            records: Vec::new(),
            transmissions: Vec::new(),
            stats: RunStats::default(),
        })
    }

    pub(super) fn run(mut self) -> Result<RunOutput> {
        self.events.push(Micros::ZERO, Scenario::COORDINATOR, EventKind::SlotBoundary);
        for id in self.scn.sensor_ids() {
            let first = self.first_arrival(id);
            self.events.push(first, id, EventKind::PacketArrival);
        }
        while let Some(ev) = self.events.pop() {
            if ev.time >= self.scn.duration {
                break;
            }
            self.now = ev.time;
            self.stats.events += 1;
            match ev.kind {
                EventKind::SlotBoundary => self.on_slot_boundary(),
                EventKind::BeaconDue => self.on_beacon_due()?,
                EventKind::PacketArrival => self.on_arrival(ev.target),
                EventKind::CcaSample { token } => self.on_cca(ev.target, token),
                EventKind::TxEnd { tx } => self.on_tx_end(tx),
                EventKind::AckDue { to, channel, pkt_id } => self.on_ack_due(ev.target, to, channel, pkt_id),
                EventKind::AckTimeout { token } => self.on_ack_timeout(ev.target, token),
            }
        }
        Ok(self.finish())
    }

    fn finish(mut self) -> RunOutput {
        let frame_bytes = u64::from(self.scn.payload_bytes + self.mac.mac_overhead_bytes);
        for n in &self.nodes {
            let mut peers = BTreeSet::new();
            let mut cells = 0;
            for c in &self.cells {
                if c.owner_tx == n.id {
                    peers.insert(c.owner_rx);
                    cells += 1;
                } else if c.owner_rx == n.id {
                    peers.insert(c.owner_tx);
                    cells += 1;
                }
            }
            let frames = vec![frame_bytes; n.max_queue_len];
            self.stats.census.push(NodeCensus {
                node: n.id,
                role: n.role,
                cells,
                neighbours: peers.len() as u64,
                max_queue_len: n.max_queue_len,
                heap: heap_usage(cells, peers.len() as u64, &frames),
            });
            self.stats.max_pre_beacon_offset_ns =
                self.stats.max_pre_beacon_offset_ns.max(n.sync.max_pre_beacon_offset_ns);
        }
        let t_qo = (self.scn.mode == Mode::Cfp).then(|| super::t_qo(self.mac, self.mac.queue_capacity));
        let summary = summarize(&self.records, self.scn.warmup, t_qo);
        RunOutput { records: self.records, summary, stats: self.stats, transmissions: self.transmissions }
    }

    fn first_arrival(&mut self, id: NodeId) -> Micros {
        match self.scn.arrivals {
            ArrivalProcess::Periodic => Micros::ZERO,
            ArrivalProcess::Exponential => self.draw_interarrival(id),
        }
    }

    fn draw_interarrival(&mut self, id: NodeId) -> Micros {
        match self.scn.arrivals {
            ArrivalProcess::Periodic => self.scn.tx_interval_mean,
            ArrivalProcess::Exponential => {
                let rate = 1.0 / self.scn.tx_interval_mean.as_secs_f64();
                let exp = Exp::new(rate).expect("positive rate");
                Micros::from_secs_f64(exp.sample(&mut self.nodes[id as usize].traffic_rng))
            }
        }
    }

    fn cell_for(&self, src: NodeId, dst: NodeId) -> Option<&GtsCell> {
        if self.cells.is_empty() {
            return None;
        }
        let s = self.nodes[src as usize].index;
        let a = self.nodes[dst as usize].index;
        self.cells.get(s * self.actuators.len() + a)
    }

    // --- slot structure -------------------------------------------------

    fn on_slot_boundary(&mut self) {
        let slot = self.mac.slot_at(self.now);
        match slot.slot_kind {
            SlotKind::Beacon => self.events.push(self.now, Scenario::COORDINATOR, EventKind::BeaconDue),
            SlotKind::Cap if slot.slot_index == 1 && self.scn.mode == Mode::Cap => {
                for id in self.scn.sensor_ids() {
                    match self.nodes[id as usize].state {
                        NodeState::Deferred(csma) => self.schedule_cca(id, csma, self.now),
                        NodeState::Idle => self.try_start_cap(id),
                        _ => {}
                    }
                }
            }
            SlotKind::Cfp if self.scn.mode == Mode::Cfp => {
                let pos = slot.superframe_index as usize * self.mac.slots_per_superframe as usize
                    + slot.slot_index as usize;
                for i in self.cells_by_slot[pos].clone() {
                    self.try_cell(i);
                }
            }
            _ => {}
        }
        self.events.push(self.now + self.timing.slot, Scenario::COORDINATOR, EventKind::SlotBoundary);
    }

    fn on_beacon_due(&mut self) -> Result<()> {
        let coord = Scenario::COORDINATOR;
        if let Some(tx) = emit_beacon(NodeRole::Coordinator, coord, self.now, self.mac, &mut self.medium)? {
            self.stats.beacons_sent += 1;
            self.events.push(tx.end, coord, EventKind::TxEnd { tx: tx.id });
        }
        Ok(())
    }

    /// Lets a node with pending traffic use whatever access the current time allows.
    fn kick(&mut self, id: NodeId) {
        if self.nodes[id as usize].state != NodeState::Idle {
            return;
        }
        match self.scn.mode {
            Mode::Cap => self.try_start_cap(id),
            Mode::Cfp => {
                let slot = self.mac.slot_at(self.now);
                if slot.slot_kind != SlotKind::Cfp {
                    return;
                }
                let pos = (slot.superframe_index * u64::from(self.mac.slots_per_superframe)) as u32 + slot.slot_index;
                let mine: Vec<usize> =
                    self.nodes[id as usize].cells.iter().copied().filter(|&i| self.cells[i].slot_index == pos).collect();
                for i in mine {
                    self.try_cell(i);
                }
            }
        }
    }

    // --- traffic --------------------------------------------------------

    fn on_arrival(&mut self, id: NodeId) {
        let n_act = self.actuators.len();
        let node = &mut self.nodes[id as usize];
        let a = match self.scn.destination {
            DestinationPolicy::Fixed => node.index % n_act,
            DestinationPolicy::RoundRobin => (node.index + node.packets_sent as usize) % n_act,
        };
        node.packets_sent += 1;
        let dst = self.actuators[a];
        let pkt_id = self.records.len() as u64;
        let frame = Frame::data(pkt_id, id, dst, self.scn.payload_bytes, self.mac.mac_overhead_bytes, self.now);
        let cell = self.cell_for(id, dst).map(|c| (c.slot_index, c.channel));
        let node = &mut self.nodes[id as usize];
        let status = match node.queue.enqueue(frame) {
            EnqueueOutcome::Accepted => {
                node.max_queue_len = node.max_queue_len.max(node.queue.len());
                PacketStatus::InFlightAtEnd
            }
            EnqueueOutcome::DroppedQueueOverflow => PacketStatus::DropQueue,
        };
        self.records.push(PacketRecord {
            pkt_id,
            src: id,
            dst,
            gen_time: self.now,
            completion_time: None,
            status,
            retries: 0,
            cell,
        });
        if status != PacketStatus::DropQueue {
            self.kick(id);
        }
        let next = self.now + self.draw_interarrival(id);
        self.events.push(next, id, EventKind::PacketArrival);
    }

    // --- CAP: slotted CSMA-CA -------------------------------------------

    fn try_start_cap(&mut self, id: NodeId) {
        let node = &self.nodes[id as usize];
        if node.state == NodeState::Idle && !node.queue.is_empty() {
            self.schedule_cca(id, CsmaState::new(self.csma), self.now);
        }
    }

    /// Draws a backoff starting at the first boundary at or after `from` and
    /// schedules the CCA, or defers to the next CAP if the exchange would not fit.
    fn schedule_cca(&mut self, id: NodeId, csma: CsmaState, from: Micros) {
        let window = self.mac.current_or_next_cap(from);
        let node = &mut self.nodes[id as usize];
        if !window.contains(from) {
            node.state = NodeState::Deferred(csma);
            return;
        }
        let period = self.timing.backoff_period;
        let start = align_to_backoff(from, window.start, period);
        let at = start + period * u64::from(csma.draw_backoff(&mut node.mac_rng));
        if at + self.timing.exchange > window.end {
            node.state = NodeState::Deferred(csma);
            return;
        }
        node.token += 1;
        node.state = NodeState::Backoff(csma);
        let token = node.token;
        self.events.push(at, id, EventKind::CcaSample { token });
    }

    fn on_cca(&mut self, id: NodeId, token: u64) {
        let node = &mut self.nodes[id as usize];
        let mut csma = match node.state {
            NodeState::Backoff(c) if node.token == token => c,
            _ => return,
        };
        let mut clear = self.medium.cca(COMMON_CHANNEL, self.now, &mut node.mac_rng) == CcaResult::Clear;
        if clear {
            let frame = node.queue.head().expect("backoff with empty queue").clone();
            match self.start_tx(id, COMMON_CHANNEL, frame) {
                Ok(()) => return,
                Err(_) => clear = false,
            }
        }
        debug_assert!(!clear);
        if csma.on_busy(self.csma) {
            self.schedule_cca(id, csma, self.now + self.timing.backoff_period);
        } else {
            let node = &mut self.nodes[id as usize];
            let frame = node.queue.head().expect("backoff with empty queue").pkt_id;
            let frame = node.queue.remove(frame).expect("head frame");
            node.state = NodeState::Idle;
            let rec = &mut self.records[frame.pkt_id as usize];
            rec.status = PacketStatus::DropChannelAccess;
            rec.retries = frame.retries;
            self.try_start_cap(id);
        }
    }

    // --- CFP: GTS cells -------------------------------------------------

    /// Serves one occurrence of cell `i` if its sender is free and has a frame
    /// for the cell's receiver, and the exchange still fits in the slot.
    fn try_cell(&mut self, i: usize) {
        let cell = self.cells[i];
        let occurrence = self.mac.slot_start(self.now);
        if self.cell_used[i] == Some(occurrence) || self.now + self.timing.exchange > occurrence + self.timing.slot {
            return;
        }
        let node = &self.nodes[cell.owner_tx as usize];
        if node.state != NodeState::Idle {
            return;
        }
        let Some(frame) = cfp_service(&node.queue, &cell).cloned() else {
            return;
        };
        if self.start_tx(cell.owner_tx, cell.channel, frame).is_ok() {
            self.cell_used[i] = Some(occurrence);
        }
    }

    // --- transmissions and acknowledgments ------------------------------

    fn start_tx(&mut self, id: NodeId, channel: u32, frame: Frame) -> Result<()> {
        let pkt_id = frame.pkt_id;
        let tx = self.medium.begin_transmission(id, channel, frame, self.now)?;
        debug_assert_eq!(tx.end - tx.start, self.timing.data_airtime);
        self.stats.data_transmissions += 1;
        self.nodes[id as usize].state = NodeState::Transmitting { pkt_id };
        self.events.push(tx.end, id, EventKind::TxEnd { tx: tx.id });
        Ok(())
    }

    fn log(&mut self, r: &Resolution) {
        let t: &Transmission = &r.tx;
        self.transmissions.push(TxRecord {
            sender: t.sender,
            dst: t.frame.dst,
            channel: t.channel,
            start: t.start,
            end: t.end,
            kind: t.frame.kind,
            pkt_id: t.frame.pkt_id,
            outcome: r.outcome,
        });
    }

    fn on_tx_end(&mut self, tx: TxId) {
        let Some(res) = self.medium.resolve_reception(tx) else {
            return;
        };
        self.log(&res);
        let frame = &res.tx.frame;
        match frame.kind {
            FrameKind::Data => {
                if res.outcome == Reception::Collided {
                    self.stats.data_collisions += 1;
                    if self.scn.mode == Mode::Cfp {
                        self.stats.cfp_collisions += 1;
                    }
                }
                let sender = &mut self.nodes[res.tx.sender as usize];
                sender.token += 1;
                sender.state = NodeState::AwaitingAck { pkt_id: frame.pkt_id };
                let token = sender.token;
                self.events.push(self.now + self.timing.ack_wait, res.tx.sender, EventKind::AckTimeout { token });
                if res.heard_by(frame.dst) {
                    let kind = EventKind::AckDue { to: res.tx.sender, channel: res.tx.channel, pkt_id: frame.pkt_id };
                    self.events.push(self.now + self.timing.turnaround, frame.dst, kind);
                }
            }
            FrameKind::Ack => {
                if res.outcome == Reception::Collided {
                    self.stats.ack_collisions += 1;
                }
                let to = frame.dst;
                if res.heard_by(to)
                    && self.nodes[to as usize].state == (NodeState::AwaitingAck { pkt_id: frame.pkt_id })
                {
                    self.complete(to, frame.pkt_id, AckOutcome::Delivered);
                }
            }
            FrameKind::Beacon => {
                for n in &mut self.nodes {
                    if res.heard_by(n.id) {
                        n.sync.on_beacon(self.now);
                        self.stats.beacons_heard += 1;
                    }
                }
            }
        }
    }

    fn on_ack_due(&mut self, id: NodeId, to: NodeId, channel: u32, pkt_id: u64) {
        let ack = Frame::ack(id, to, pkt_id, self.now);
        match self.medium.begin_transmission(id, channel, ack, self.now) {
            Ok(tx) => {
                self.stats.ack_transmissions += 1;
                self.events.push(tx.end, id, EventKind::TxEnd { tx: tx.id });
            }
            Err(_) => self.stats.acks_suppressed += 1,
        }
    }

    fn on_ack_timeout(&mut self, id: NodeId, token: u64) {
        let node = &self.nodes[id as usize];
        if let NodeState::AwaitingAck { pkt_id } = node.state {
            if node.token == token {
                self.complete(id, pkt_id, AckOutcome::NoAck);
            }
        }
    }

    fn complete(&mut self, id: NodeId, pkt_id: u64, outcome: AckOutcome) {
        let node = &mut self.nodes[id as usize];
        node.state = NodeState::Idle;
        let result = handle_ack(&mut node.queue, pkt_id, outcome, self.csma.max_frame_retries);
        let rec = &mut self.records[pkt_id as usize];
        match result {
            Some(AckResult::Confirmed(f)) => {
                rec.status = PacketStatus::Delivered;
                rec.completion_time = Some(self.now);
                rec.retries = f.retries;
            }
            Some(AckResult::Requeued(retries)) => rec.retries = retries,
            Some(AckResult::DroppedRetryLimit(f)) => {
                rec.status = PacketStatus::DropRetry;
                rec.retries = f.retries;
            }
            None => unreachable!("acknowledged frame {pkt_id} missing from queue"),
        }
        self.kick(id);
    }
}
