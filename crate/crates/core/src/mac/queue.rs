use std::collections::VecDeque;

use super::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    DroppedQueueOverflow,
}

/// Bounded FIFO transmit queue. A frame stays queued, including while it is
/// on air, until it is acknowledged or dropped.
#[derive(Debug, Clone)]
pub struct MacQueue {
    capacity: usize,
    entries: VecDeque<Frame>,
}

impl MacQueue {
    pub fn new(capacity: usize) -> Self {
        MacQueue { capacity, entries: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn enqueue(&mut self, frame: Frame) -> EnqueueOutcome {
        if self.entries.len() >= self.capacity {
            return EnqueueOutcome::DroppedQueueOverflow;
        }
        self.entries.push_back(frame);
        EnqueueOutcome::Accepted
    }

    pub fn head(&self) -> Option<&Frame> {
        self.entries.front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Frame> {
        self.entries.iter()
    }

    pub fn get(&self, pkt_id: u64) -> Option<&Frame> {
        self.entries.iter().find(|f| f.pkt_id == pkt_id)
    }

    pub fn remove(&mut self, pkt_id: u64) -> Option<Frame> {
        let pos = self.entries.iter().position(|f| f.pkt_id == pkt_id)?;
        self.entries.remove(pos)
    }

    /// Moves a queued frame to the head, keeping the relative order of the rest.
    fn move_to_front(&mut self, pkt_id: u64) -> Option<&mut Frame> {
        let f = self.remove(pkt_id)?;
        self.entries.push_front(f);
        self.entries.front_mut()
    }
}

/// What the sender learned about a transmitted data frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckOutcome {
    Delivered,
    Collided,
    NoAck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AckResult {
    Confirmed(Frame),
    /// The frame is back at the head of the queue with the given retry count.
    Requeued(u32),
    DroppedRetryLimit(Frame),
}

/// Applies the acknowledgment outcome for the queued frame `pkt_id`.
///
/// Returns `None` if the frame is not in the queue.
pub fn handle_ack(
    queue: &mut MacQueue,
    pkt_id: u64,
    outcome: AckOutcome,
    max_frame_retries: u32,
) -> Option<AckResult> {
    if outcome == AckOutcome::Delivered {
        return queue.remove(pkt_id).map(AckResult::Confirmed);
    }
    if queue.get(pkt_id)?.retries >= max_frame_retries {
        return queue.remove(pkt_id).map(AckResult::DroppedRetryLimit);
    }
    let f = queue.move_to_front(pkt_id)?;
    f.retries += 1;
    Some(AckResult::Requeued(f.retries))
}
