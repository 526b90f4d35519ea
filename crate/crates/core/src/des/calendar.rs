use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::error::SimError;
use super::time::SimTime;

/// Identifies a scheduled event so it can be cancelled before it fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventHandle(u64);

impl EventHandle {
    pub fn seq(self) -> u64 {
        self.0
    }
}

struct Scheduled<A> {
    time: SimTime,
    seq: u64,
    action: A,
}

impl<A> PartialEq for Scheduled<A> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl<A> Eq for Scheduled<A> {}

impl<A> PartialOrd for Scheduled<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that `BinaryHeap` pops the earliest (time, seq) first.
impl<A> Ord for Scheduled<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Future event list ordered by `(time, insertion sequence)`.
///
/// Cancellation is lazy: a cancelled event stays in the heap until it reaches
/// the top and is then discarded.
pub struct Calendar<A> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Scheduled<A>>,
    live: HashSet<u64>,
}

impl<A> Default for Calendar<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> Calendar<A> {
    pub fn new() -> Self {
        Calendar {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            live: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of events still due to fire.
    pub fn pending(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn schedule(&mut self, time: SimTime, action: A) -> Result<EventHandle, SimError> {
        if time < self.now {
            return Err(SimError::ScheduleInPast {
                now: self.now,
                time,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { time, seq, action });
        self.live.insert(seq);
        Ok(EventHandle(seq))
    }

    pub fn schedule_in(&mut self, delay: f64, action: A) -> Result<EventHandle, SimError> {
        if delay.is_nan() || delay < 0.0 {
            return Err(SimError::ScheduleInPast {
                now: self.now,
                time: SimTime::ZERO,
            });
        }
        self.schedule(self.now + delay, action)
    }

    /// Returns `true` if the event was still pending.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.live.remove(&handle.0)
    }

    pub fn peek_time(&mut self) -> Option<SimTime> {
        self.discard_cancelled();
        self.heap.peek().map(|e| e.time)
    }

    /// Pops the next live event with `time <= t_end` and advances the clock to it.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, A)> {
        self.discard_cancelled();
        if self.heap.peek()?.time > t_end {
            return None;
        }
        let ev = self.heap.pop()?;
        self.live.remove(&ev.seq);
        self.now = ev.time;
        Some((ev.time, ev.action))
    }

    /// Moves the clock forward to `t_end` without firing anything.
    ///
    /// Fails if a live event is still due before `t_end`.
    pub fn advance_to(&mut self, t_end: SimTime) -> Result<(), SimError> {
        if t_end < self.now {
            return Err(SimError::RunBackwards {
                now: self.now,
                target: t_end,
            });
        }
        if let Some(next) = self.peek_time() {
            if next < t_end {
                return Err(SimError::RunBackwards {
                    now: next,
                    target: t_end,
                });
            }
        }
        self.now = t_end;
        Ok(())
    }

    /// Fires every event with `time <= t_end` in order, then parks the clock at `t_end`.
    ///
    /// The handler may schedule further events; those are fired too if they fall
    /// inside the horizon.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> Result<SimTime, SimError>
    where
        F: FnMut(&mut Self, SimTime, A),
    {
        if t_end < self.now {
            return Err(SimError::RunBackwards {
                now: self.now,
                target: t_end,
            });
        }
        while let Some((time, action)) = self.pop_until(t_end) {
            handler(self, time, action);
        }
        self.now = t_end;
        Ok(self.now)
    }

    fn discard_cancelled(&mut self) {
        while let Some(top) = self.heap.peek() {
            if self.live.contains(&top.seq) {
                break;
            }
            self.heap.pop();
        }
    }
}
