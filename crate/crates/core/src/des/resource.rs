use std::collections::{BTreeMap, HashMap};

use super::calendar::EventHandle;
use super::error::SimError;
use super::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResourceId(pub usize);

/// Kernel-wide request number. Monotone, so it doubles as the FIFO key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RequestId(pub u64);

pub type EntityId = u64;

/// A queued multi-unit request waiting for capacity.
#[derive(Clone, Debug)]
pub struct PendingRequest {
    pub id: RequestId,
    pub entity: EntityId,
    pub units: u32,
    pub enqueue_time: SimTime,
    pub renege_deadline: SimTime,
    pub(crate) deadline_event: Option<EventHandle>,
    pub(crate) epoch: u32,
}

/// Accumulators for one statistics window.
///
/// Requests are attributed to the window they were issued in; a request issued
/// before a reset contributes nothing afterwards, even if it is granted later.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceStats {
    pub window_start: SimTime,
    /// Clock value up to which `busy_time_integral` has been accumulated.
    pub integrated_to: SimTime,
    /// Unit-days held since `window_start`.
    pub busy_time_integral: f64,
    pub served_waits: Vec<f64>,
    pub renege_count: u64,
    pub request_count: u64,
}

impl ResourceStats {
    fn starting_at(t: SimTime) -> Self {
        ResourceStats {
            window_start: t,
            integrated_to: t,
            busy_time_integral: 0.0,
            served_waits: Vec::new(),
            renege_count: 0,
            request_count: 0,
        }
    }
}

/// A pool of identical units with a strict-FIFO queue of impatient requests.
#[derive(Clone, Debug)]
pub struct Resource {
    name: String,
    capacity: u32,
    busy: u32,
    pub(crate) queue: BTreeMap<RequestId, PendingRequest>,
    holdings: HashMap<EntityId, u32>,
    pub(crate) epoch: u32,
    stats: ResourceStats,
}

impl Resource {
    pub fn new(name: impl Into<String>, capacity: u32) -> Self {
        Resource {
            name: name.into(),
            capacity,
            busy: 0,
            queue: BTreeMap::new(),
            holdings: HashMap::new(),
            epoch: 0,
            stats: ResourceStats::starting_at(SimTime::ZERO),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn busy(&self) -> u32 {
        self.busy
    }

    pub fn free(&self) -> u32 {
        self.capacity - self.busy
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Queued requests in grant order.
    pub fn queued(&self) -> impl Iterator<Item = &PendingRequest> {
        self.queue.values()
    }

    /// Queued requests that belong to the current statistics window.
    pub fn queued_in_window(&self) -> usize {
        self.queue
            .values()
            .filter(|r| r.epoch == self.epoch)
            .count()
    }

    pub fn held_by(&self, entity: EntityId) -> u32 {
        self.holdings.get(&entity).copied().unwrap_or(0)
    }

    pub fn stats(&self) -> &ResourceStats {
        &self.stats
    }

    /// Time-averaged fraction of capacity held over `[start, end]`.
    ///
    /// Only the window the accumulators currently cover can be queried:
    /// `start` must be the last reset and `end` the last flush.
    pub fn utilization(&self, start: SimTime, end: SimTime) -> Result<f64, SimError> {
        if self.capacity == 0 {
            return Err(SimError::ZeroCapacity {
                resource: self.name.clone(),
            });
        }
        if end <= start {
            return Err(SimError::EmptyWindow { start, end });
        }
        if start != self.stats.window_start || end != self.stats.integrated_to {
            return Err(SimError::WindowMismatch {
                start,
                end,
                recorded_start: self.stats.window_start,
                recorded_end: self.stats.integrated_to,
            });
        }
        Ok(self.stats.busy_time_integral / (f64::from(self.capacity) * (end - start)))
    }

    pub(crate) fn integrate_to(&mut self, now: SimTime) {
        if now > self.stats.integrated_to {
            self.stats.busy_time_integral +=
                f64::from(self.busy) * (now - self.stats.integrated_to);
            self.stats.integrated_to = now;
        }
    }

    pub(crate) fn reset_stats(&mut self, now: SimTime) {
        self.integrate_to(now);
        self.epoch += 1;
        self.stats = ResourceStats::starting_at(now);
    }

    pub(crate) fn check_request(&self, units: u32, patience: f64) -> Result<(), SimError> {
        if units == 0 {
            return Err(SimError::ZeroUnits {
                resource: self.name.clone(),
            });
        }
        if units > self.capacity {
            return Err(SimError::Unsatisfiable {
                resource: self.name.clone(),
                units,
                capacity: self.capacity,
            });
        }
        if patience.is_nan() || patience < 0.0 {
            return Err(SimError::BadPatience {
                resource: self.name.clone(),
                patience,
            });
        }
        Ok(())
    }

    pub(crate) fn note_request(&mut self) {
        self.stats.request_count += 1;
    }

    pub(crate) fn can_grant_now(&self, units: u32) -> bool {
        self.queue.is_empty() && self.busy + units <= self.capacity
    }

    pub(crate) fn seize(&mut self, now: SimTime, entity: EntityId, units: u32) {
        self.integrate_to(now);
        self.busy += units;
        debug_assert!(self.busy <= self.capacity);
        *self.holdings.entry(entity).or_insert(0) += units;
    }

    pub(crate) fn record_wait(&mut self, wait: f64, epoch: u32) {
        if epoch == self.epoch {
            self.stats.served_waits.push(wait);
        }
    }

    pub(crate) fn record_renege(&mut self, epoch: u32) {
        if epoch == self.epoch {
            self.stats.renege_count += 1;
        }
    }

    pub(crate) fn unseize(
        &mut self,
        now: SimTime,
        entity: EntityId,
        units: u32,
    ) -> Result<(), SimError> {
        let held = self.held_by(entity);
        if units > held {
            return Err(SimError::OverRelease {
                resource: self.name.clone(),
                entity,
                units,
                held,
            });
        }
        self.integrate_to(now);
        self.busy -= units;
        if held == units {
            self.holdings.remove(&entity);
        } else {
            self.holdings.insert(entity, held - units);
        }
        Ok(())
    }

    /// Pops the queue head if it fits in the free units.
    pub(crate) fn pop_fitting_head(&mut self) -> Option<PendingRequest> {
        let (_, head) = self.queue.first_key_value()?;
        if self.busy + head.units <= self.capacity {
            self.queue.pop_first().map(|(_, r)| r)
        } else {
            None
        }
    }
}
