use super::calendar::{Calendar, EventHandle};
use super::error::SimError;
use super::resource::{EntityId, PendingRequest, RequestId, Resource, ResourceId};
use super::time::SimTime;

/// What sits on the calendar: either a model event or an internal renege deadline.
#[derive(Clone, Debug)]
pub enum Action<A> {
    Deadline {
        resource: ResourceId,
        request: RequestId,
    },
    User(A),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grant {
    pub time: SimTime,
    pub resource: ResourceId,
    pub request: RequestId,
    pub entity: EntityId,
    pub units: u32,
    pub wait: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Renege {
    pub time: SimTime,
    pub resource: ResourceId,
    pub request: RequestId,
    pub entity: EntityId,
    pub units: u32,
    pub enqueue_time: SimTime,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RequestStatus {
    Granted(Grant),
    Queued(RequestId),
}

/// One step of the kernel as seen by the model driving it.
#[derive(Debug)]
pub enum Occurrence<A> {
    User {
        time: SimTime,
        action: A,
    },
    /// A request hit its deadline. Removing it may have let requests behind it through.
    Reneged {
        renege: Renege,
        grants: Vec<Grant>,
    },
}

/// Low-level record of every resource interaction, kept when tracing is on.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelRecord {
    Requested {
        time: SimTime,
        resource: ResourceId,
        request: RequestId,
        entity: EntityId,
        units: u32,
        deadline: SimTime,
    },
    Granted(Grant),
    Reneged(Renege),
    Released {
        time: SimTime,
        resource: ResourceId,
        entity: EntityId,
        units: u32,
    },
}

/// Event calendar plus resources.
///
/// Renege deadlines are ordinary calendar events; a grant cancels the
/// deadline, and a deadline that fires removes the request from its queue.
pub struct Kernel<A> {
    calendar: Calendar<Action<A>>,
    resources: Vec<Resource>,
    next_request: u64,
    trace: Option<Vec<KernelRecord>>,
}

impl<A> Default for Kernel<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> Kernel<A> {
    pub fn new() -> Self {
        Kernel {
            calendar: Calendar::new(),
            resources: Vec::new(),
            next_request: 0,
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[KernelRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn now(&self) -> SimTime {
        self.calendar.now()
    }

    pub fn add_resource(&mut self, name: impl Into<String>, capacity: u32) -> ResourceId {
        self.resources.push(Resource::new(name, capacity));
        ResourceId(self.resources.len() - 1)
    }

    pub fn resource(&self, id: ResourceId) -> &Resource {
        &self.resources[id.0]
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn schedule(&mut self, time: SimTime, action: A) -> Result<EventHandle, SimError> {
        self.calendar.schedule(time, Action::User(action))
    }

    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.calendar.cancel(handle)
    }

    /// Asks for `units` of `resource`, waiting at most `patience` days.
    ///
    /// Granted on the spot only if the queue is empty and the units fit;
    /// otherwise the request joins the back of the queue.
    pub fn request(
        &mut self,
        resource: ResourceId,
        entity: EntityId,
        units: u32,
        patience: f64,
    ) -> Result<RequestStatus, SimError> {
        let now = self.now();
        let res = &mut self.resources[resource.0];
        res.check_request(units, patience)?;
        res.note_request();
        let request = RequestId(self.next_request);
        self.next_request += 1;
        let deadline = if patience.is_finite() {
            now + patience
        } else {
            SimTime::NEVER
        };
        if let Some(trace) = &mut self.trace {
            trace.push(KernelRecord::Requested {
                time: now,
                resource,
                request,
                entity,
                units,
                deadline,
            });
        }

        if res.can_grant_now(units) {
            let epoch = res.epoch;
            res.seize(now, entity, units);
            res.record_wait(0.0, epoch);
            let grant = Grant {
                time: now,
                resource,
                request,
                entity,
                units,
                wait: 0.0,
            };
            if let Some(trace) = &mut self.trace {
                trace.push(KernelRecord::Granted(grant.clone()));
            }
            return Ok(RequestStatus::Granted(grant));
        }

        let deadline_event = if deadline.is_finite() {
            Some(
                self.calendar
                    .schedule(deadline, Action::Deadline { resource, request })?,
            )
        } else {
            None
        };
        let res = &mut self.resources[resource.0];
        let epoch = res.epoch;
        res.queue.insert(
            request,
            PendingRequest {
                id: request,
                entity,
                units,
                enqueue_time: now,
                renege_deadline: deadline,
                deadline_event,
                epoch,
            },
        );
        Ok(RequestStatus::Queued(request))
    }

    /// Returns `units` held by `entity` and grants whatever now fits at the queue head.
    pub fn release(
        &mut self,
        resource: ResourceId,
        entity: EntityId,
        units: u32,
    ) -> Result<Vec<Grant>, SimError> {
        let now = self.now();
        self.resources[resource.0].unseize(now, entity, units)?;
        if let Some(trace) = &mut self.trace {
            trace.push(KernelRecord::Released {
                time: now,
                resource,
                entity,
                units,
            });
        }
        Ok(self.grant_from_head(resource))
    }

    fn grant_from_head(&mut self, resource: ResourceId) -> Vec<Grant> {
        let now = self.now();
        let mut grants = Vec::new();
        while let Some(req) = self.resources[resource.0].pop_fitting_head() {
            if let Some(h) = req.deadline_event {
                self.calendar.cancel(h);
            }
            let res = &mut self.resources[resource.0];
            let wait = now - req.enqueue_time;
            res.seize(now, req.entity, req.units);
            res.record_wait(wait, req.epoch);
            let grant = Grant {
                time: now,
                resource,
                request: req.id,
                entity: req.entity,
                units: req.units,
                wait,
            };
            if let Some(trace) = &mut self.trace {
                trace.push(KernelRecord::Granted(grant.clone()));
            }
            grants.push(grant);
        }
        grants
    }

    /// Advances to the next occurrence at or before `t_end`, if any.
    pub fn next(&mut self, t_end: SimTime) -> Option<Occurrence<A>> {
        let (time, action) = self.calendar.pop_until(t_end)?;
        Some(match action {
            Action::User(action) => Occurrence::User { time, action },
            Action::Deadline { resource, request } => {
                let req = self.resources[resource.0]
                    .queue
                    .remove(&request)
                    .expect("deadline fired for a request no longer queued");
                self.resources[resource.0].record_renege(req.epoch);
                let renege = Renege {
                    time,
                    resource,
                    request,
                    entity: req.entity,
                    units: req.units,
                    enqueue_time: req.enqueue_time,
                };
                if let Some(trace) = &mut self.trace {
                    trace.push(KernelRecord::Reneged(renege.clone()));
                }
                let grants = self.grant_from_head(resource);
                Occurrence::Reneged { renege, grants }
            }
        })
    }

    /// Parks the clock at `t_end` and brings every busy-time integral up to date.
    pub fn advance_to(&mut self, t_end: SimTime) -> Result<(), SimError> {
        self.calendar.advance_to(t_end)?;
        for r in &mut self.resources {
            r.integrate_to(t_end);
        }
        Ok(())
    }

    /// Zeroes all accumulators at the current clock. Queued and held units are kept.
    pub fn reset_stats(&mut self) {
        let now = self.now();
        for r in &mut self.resources {
            r.reset_stats(now);
        }
    }

    /// Checks capacity and holding bookkeeping for every resource.
    pub fn check_invariants(&self) -> Result<(), String> {
        for r in &self.resources {
            if r.busy() > r.capacity() {
                return Err(format!(
                    "{}: busy {} exceeds capacity {}",
                    r.name(),
                    r.busy(),
                    r.capacity()
                ));
            }
            if let Some(q) = r.queued().find(|q| q.units > r.capacity()) {
                return Err(format!(
                    "{}: queued request {:?} can never fit",
                    r.name(),
                    q.id
                ));
            }
            if let Some(q) = r.queued().find(|q| q.renege_deadline < q.enqueue_time) {
                return Err(format!(
                    "{}: request {:?} has deadline before enqueue",
                    r.name(),
                    q.id
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(d: f64) -> SimTime {
        SimTime::from_days(d)
    }

    /// Drives a kernel whose only user events are "release these units".
    fn drain(k: &mut Kernel<(ResourceId, EntityId, u32)>, t_end: f64) -> Vec<KernelRecord> {
        while let Some(occ) = k.next(t(t_end)) {
            if let Occurrence::User {
                action: (r, e, u), ..
            } = occ
            {
                k.release(r, e, u).unwrap();
            }
        }
        k.advance_to(t(t_end)).unwrap();
        k.trace().to_vec()
    }

    #[test]
    fn immediate_grant_when_free() {
        let mut k: Kernel<()> = Kernel::new();
        let r = k.add_resource("x", 2);
        match k.request(r, 1, 1, 5.0).unwrap() {
            RequestStatus::Granted(g) => assert_eq!(g.wait, 0.0),
            other => panic!("expected grant, got {other:?}"),
        }
        assert_eq!(k.resource(r).busy(), 1);
    }

    #[test]
    fn waits_for_release_within_patience() {
        let mut k = Kernel::new().with_trace();
        let r = k.add_resource("bed", 1);
        k.request(r, 1, 1, 100.0).unwrap();
        k.schedule(t(4.0), (r, 1, 1)).unwrap();
        assert!(matches!(
            k.request(r, 2, 1, 7.0).unwrap(),
            RequestStatus::Queued(_)
        ));
        let trace = drain(&mut k, 20.0);
        let grants: Vec<_> = trace
            .iter()
            .filter_map(|rec| match rec {
                KernelRecord::Granted(g) if g.entity == 2 => Some(g.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(grants.len(), 1);
        assert_eq!(grants[0].wait, 4.0);
        assert_eq!(grants[0].time, t(4.0));
        assert_eq!(k.resource(r).stats().served_waits, vec![0.0, 4.0]);
        assert_eq!(k.resource(r).stats().renege_count, 0);
    }

    #[test]
    fn reneges_at_deadline() {
        let mut k = Kernel::new().with_trace();
        let r = k.add_resource("bed", 1);
        k.request(r, 1, 1, 100.0).unwrap();
        k.schedule(t(10.0), (r, 1, 1)).unwrap();
        k.request(r, 2, 1, 7.0).unwrap();
        let trace = drain(&mut k, 20.0);
        let reneges: Vec<_> = trace
            .iter()
            .filter_map(|rec| match rec {
                KernelRecord::Reneged(x) => Some(x.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(reneges.len(), 1);
        assert_eq!(reneges[0].entity, 2);
        assert_eq!(reneges[0].time, t(7.0));
        assert_eq!(k.resource(r).stats().renege_count, 1);
        assert_eq!(k.resource(r).stats().request_count, 2);
        assert_eq!(k.resource(r).busy(), 0);
    }

    #[test]
    fn head_blocking_is_strict_fifo() {
        // capacity 3 all held; queue = [A wants 2, B wants 1]; one unit freed.
        let mut k = Kernel::new().with_trace();
        let r = k.add_resource("x", 3);
        k.request(r, 100, 3, 0.0).unwrap();
        assert!(matches!(
            k.request(r, 1, 2, 50.0).unwrap(),
            RequestStatus::Queued(_)
        ));
        assert!(matches!(
            k.request(r, 2, 1, 50.0).unwrap(),
            RequestStatus::Queued(_)
        ));
        k.schedule(t(1.0), (r, 100, 1)).unwrap();
        k.schedule(t(2.0), (r, 100, 1)).unwrap();
        let trace = drain(&mut k, 1.5);

        // Hand trace: at t=1 busy 2, free 1, head needs 2 -> nobody moves.
        let grants_after_start: Vec<_> = trace
            .iter()
            .filter(|rec| matches!(rec, KernelRecord::Granted(g) if g.entity != 100))
            .collect();
        assert!(grants_after_start.is_empty());
        assert_eq!(k.resource(r).busy(), 2);
        assert_eq!(k.resource(r).queue_len(), 2);

        // At t=2 two units are free: A (2) is granted, B (1) does not fit.
        let trace = drain(&mut k, 2.5);
        let granted: Vec<_> = trace
            .iter()
            .filter_map(|rec| match rec {
                KernelRecord::Granted(g) if g.entity != 100 => Some((g.entity, g.time)),
                _ => None,
            })
            .collect();
        assert_eq!(granted, vec![(1, t(2.0))]);
        assert_eq!(k.resource(r).busy(), 3);
    }

    #[test]
    fn head_renege_unblocks_the_next_request() {
        let mut k = Kernel::new().with_trace();
        let r = k.add_resource("x", 3);
        k.request(r, 100, 2, 0.0).unwrap();
        k.request(r, 1, 2, 5.0).unwrap();
        k.request(r, 2, 1, 50.0).unwrap();
        let trace = drain(&mut k, 10.0);
        let tail: Vec<_> = trace.iter().skip(4).cloned().collect();
        assert!(matches!(&tail[0], KernelRecord::Reneged(x) if x.entity == 1 && x.time == t(5.0)));
        assert!(matches!(&tail[1], KernelRecord::Granted(g) if g.entity == 2 && g.wait == 5.0));
    }

    #[test]
    fn unsatisfiable_request_is_an_error() {
        let mut k: Kernel<()> = Kernel::new();
        let r = k.add_resource("x", 2);
        assert!(matches!(
            k.request(r, 1, 3, 1.0),
            Err(SimError::Unsatisfiable { .. })
        ));
        assert!(matches!(
            k.request(r, 1, 0, 1.0),
            Err(SimError::ZeroUnits { .. })
        ));
        assert!(matches!(
            k.request(r, 1, 1, -1.0),
            Err(SimError::BadPatience { .. })
        ));
    }

    #[test]
    fn release_with_empty_queue_grants_nothing() {
        let mut k: Kernel<()> = Kernel::new();
        let r = k.add_resource("x", 2);
        k.request(r, 1, 2, 1.0).unwrap();
        let grants = k.release(r, 1, 2).unwrap();
        assert!(grants.is_empty());
        assert_eq!(k.resource(r).busy(), 0);
    }

    #[test]
    fn release_more_than_held_is_an_error() {
        let mut k: Kernel<()> = Kernel::new();
        let r = k.add_resource("x", 2);
        k.request(r, 1, 1, 1.0).unwrap();
        assert!(k.release(r, 1, 2).is_err());
    }

    #[test]
    fn requests_before_reset_do_not_count_after_it() {
        let mut k = Kernel::new();
        let r = k.add_resource("x", 1);
        k.request(r, 1, 1, 0.0).unwrap();
        k.request(r, 2, 1, 50.0).unwrap();
        k.schedule(t(5.0), (r, 1, 1)).unwrap();
        drain(&mut k, 3.0);
        k.reset_stats();
        k.request(r, 3, 1, 1.0).unwrap();
        drain(&mut k, 10.0);
        let s = k.resource(r).stats();
        // Entity 2 was granted inside the window but asked before it.
        assert_eq!(s.request_count, 1);
        assert!(s.served_waits.is_empty());
        assert_eq!(s.renege_count, 1);
        assert_eq!(s.window_start, t(3.0));
        // Held 1 unit from 3 to 10.
        assert_eq!(k.resource(r).utilization(t(3.0), t(10.0)).unwrap(), 1.0);
    }

    #[test]
    fn infinite_patience_never_reneges() {
        let mut k = Kernel::new();
        let r = k.add_resource("x", 1);
        k.request(r, 1, 1, 0.0).unwrap();
        k.request(r, 2, 1, f64::INFINITY).unwrap();
        drain(&mut k, 1000.0);
        assert_eq!(k.resource(r).queue_len(), 1);
        assert_eq!(k.resource(r).stats().renege_count, 0);
    }
}
