use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::youth::{Youth, YouthKind};
use crate::config::ScenarioConfig;
use crate::des::{
    EntityId, Grant, Kernel, Occurrence, Renege, RequestStatus, ResourceId, SimError, SimTime,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Kernel(#[from] SimError),
    #[error("invariant violated at t={time}: {message}")]
    Invariant { time: SimTime, message: String },
    #[error("bad input: {0}")]
    Input(String),
}

#[derive(Clone, Copy, Debug)]
pub enum ShelterEvent {
    Arrival(usize),
    Departure(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BedOutcome {
    NotApplicable,
    Waiting,
    Granted {
        wait: f64,
    },
    /// Gave up on the bed and left.
    RenegedExit,
    /// Gave up on the bed and carried on as a services-only youth.
    RenegedStayed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ServiceOutcome {
    /// The youth left before signing up for services.
    NotReached,
    Bypassed,
    Waiting,
    Granted {
        wait: f64,
    },
    Reneged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Departure {
    ServedThenLeft,
    LeftUnserved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YouthOutcome {
    pub id: u64,
    pub bed: BedOutcome,
    pub services: Vec<ServiceOutcome>,
    pub batch_resolved: Option<SimTime>,
    pub departure: Option<(Departure, SimTime)>,
}

/// Youth flow for the cohort that arrived after the last statistics reset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FlowCounters {
    pub arrivals: u64,
    pub bsy_arrivals: u64,
    pub nbsy_arrivals: u64,
    pub served_then_left: u64,
    pub left_unserved: u64,
    pub bed_renege_exit: u64,
    pub bed_renege_stayed: u64,
    pub still_in_system: u64,
}

impl FlowCounters {
    pub fn is_conserved(&self) -> bool {
        self.arrivals == self.served_then_left + self.left_unserved + self.still_in_system
            && self.arrivals == self.bsy_arrivals + self.nbsy_arrivals
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceKind {
    Arrive(Youth),
    Request {
        resource: String,
        units: u32,
    },
    Grant {
        resource: String,
        units: u32,
        wait: f64,
    },
    Renege {
        resource: String,
    },
    BedExit,
    BedStay,
    Batch,
    Depart(Departure),
}

/// One line of the youth-level event log.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub time: SimTime,
    pub youth: u64,
    pub kind: TraceKind,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} Y{} ", self.time, self.youth)?;
        match &self.kind {
            TraceKind::Arrive(y) => {
                let kind = match y.kind {
                    YouthKind::Bsy => "BSY",
                    YouthKind::Nbsy => "NBSY",
                };
                write!(f, "ARRIVE {kind} los={:.3}", y.length_of_stay)?;
                if let Some(bp) = y.bed_patience {
                    write!(f, " bed_patience={bp:.3}")?;
                }
                write!(
                    f,
                    " service_patience={:.3} needs={:?}",
                    y.service_patience,
                    y.needs.counts()
                )
            }
            TraceKind::Request { resource, units } => write!(f, "REQUEST {resource} x{units}"),
            TraceKind::Grant {
                resource,
                units,
                wait,
            } => {
                write!(f, "GRANT {resource} x{units} wait={wait:.3}")
            }
            TraceKind::Renege { resource } => write!(f, "RENEGE {resource}"),
            TraceKind::BedExit => write!(f, "EXIT after bed renege"),
            TraceKind::BedStay => write!(f, "STAY as services-only"),
            TraceKind::Batch => write!(f, "BATCH"),
            TraceKind::Depart(Departure::ServedThenLeft) => write!(f, "DEPART served"),
            TraceKind::Depart(Departure::LeftUnserved) => write!(f, "DEPART unserved"),
        }
    }
}

/// When a youth who passed sign-up leaves: its stay runs from arrival, but it
/// cannot leave before its sign-ups have all resolved.
pub fn departure_time(youth: &Youth, length_of_stay: f64, batch_resolved: SimTime) -> SimTime {
    (youth.arrival_time + length_of_stay).max(batch_resolved)
}

struct YouthState {
    length_of_stay: f64,
    holds_bed: bool,
    held: Vec<u32>,
    pending: usize,
    cohort: bool,
}

/// The shelter: one bed pool, one appointment pool per service, and the
/// arrival → bed → parallel sign-up → stay → departure flow for each youth.
pub struct ShelterSim {
    kernel: Kernel<ShelterEvent>,
    bed: ResourceId,
    services: Vec<ResourceId>,
    youth: Vec<Youth>,
    state: Vec<YouthState>,
    outcomes: Vec<YouthOutcome>,
    redraw_los_on_bed_renege: bool,
    collecting: bool,
    flow: FlowCounters,
    trace: Option<Vec<TraceEvent>>,
    check_invariants: bool,
}

impl ShelterSim {
    /// Builds the shelter and queues the first arrival. `youth` must be sorted by arrival.
    pub fn new(config: &ScenarioConfig, youth: Vec<Youth>) -> Result<Self, ModelError> {
        if youth
            .windows(2)
            .any(|w| w[0].arrival_time > w[1].arrival_time)
        {
            return Err(ModelError::Input("arrivals must be sorted by time".into()));
        }
        if let Some(y) = youth
            .iter()
            .find(|y| y.needs.counts().len() != config.services.len())
        {
            return Err(ModelError::Input(format!(
                "youth {} has {} needs but the shelter offers {} services",
                y.id,
                y.needs.counts().len(),
                config.services.len()
            )));
        }
        let mut kernel = Kernel::new();
        let bed = kernel.add_resource("bed", config.bed_capacity);
        let services = config
            .services
            .iter()
            .map(|s| kernel.add_resource(s.name.clone(), s.capacity_units))
            .collect();
        let n_services = config.services.len();
        let state = youth
            .iter()
            .map(|y| YouthState {
                length_of_stay: y.length_of_stay,
                holds_bed: false,
                held: vec![0; n_services],
                pending: 0,
                cohort: false,
            })
            .collect();
        let outcomes = youth
            .iter()
            .map(|y| YouthOutcome {
                id: y.id,
                bed: match y.kind {
                    YouthKind::Bsy => BedOutcome::Waiting,
                    YouthKind::Nbsy => BedOutcome::NotApplicable,
                },
                services: vec![ServiceOutcome::NotReached; n_services],
                batch_resolved: None,
                departure: None,
            })
            .collect();
        if let Some(first) = youth.first() {
            kernel.schedule(first.arrival_time, ShelterEvent::Arrival(0))?;
        }
        Ok(ShelterSim {
            kernel,
            bed,
            services,
            youth,
            state,
            outcomes,
            redraw_los_on_bed_renege: config.redraw_los_on_bed_renege,
            collecting: true,
            flow: FlowCounters::default(),
            trace: None,
            check_invariants: false,
        })
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Re-checks every kernel and holding invariant after each event.
    pub fn with_invariant_checks(mut self) -> Self {
        self.check_invariants = true;
        self
    }

    pub fn now(&self) -> SimTime {
        self.kernel.now()
    }

    pub fn kernel(&self) -> &Kernel<ShelterEvent> {
        &self.kernel
    }

    pub fn bed(&self) -> ResourceId {
        self.bed
    }

    pub fn service_resources(&self) -> &[ResourceId] {
        &self.services
    }

    pub fn youth(&self) -> &[Youth] {
        &self.youth
    }

    pub fn outcomes(&self) -> &[YouthOutcome] {
        &self.outcomes
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn flow(&self) -> FlowCounters {
        let mut flow = self.flow;
        flow.still_in_system = self
            .state
            .iter()
            .zip(&self.outcomes)
            .filter(|(s, o)| s.cohort && o.departure.is_none())
            .count() as u64;
        flow
    }

    /// Zeroes all statistics. Youth already inside keep their holdings and
    /// queue positions but no longer count towards the flow counters.
    pub fn reset_stats(&mut self) {
        self.kernel.reset_stats();
        self.flow = FlowCounters::default();
        for s in &mut self.state {
            s.cohort = false;
        }
        self.collecting = true;
    }

    pub fn run_until(&mut self, t_end: f64) -> Result<(), ModelError> {
        let t_end = SimTime::from_days(t_end);
        while let Some(occ) = self.kernel.next(t_end) {
            match occ {
                Occurrence::User {
                    action: ShelterEvent::Arrival(i),
                    ..
                } => self.on_arrival(i)?,
                Occurrence::User {
                    action: ShelterEvent::Departure(i),
                    ..
                } => self.on_departure(i)?,
                Occurrence::Reneged { renege, grants } => {
                    self.on_renege(&renege)?;
                    self.on_grants(grants)?;
                }
            }
            if self.check_invariants {
                self.verify()?;
            }
        }
        self.kernel.advance_to(t_end)?;
        Ok(())
    }

    fn log(&mut self, youth: usize, kind: TraceKind) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent {
                time: self.kernel.now(),
                youth: self.youth[youth].id,
                kind,
            });
        }
    }

    fn resource_name(&self, r: ResourceId) -> String {
        self.kernel.resource(r).name().to_owned()
    }

    fn on_arrival(&mut self, i: usize) -> Result<(), ModelError> {
        if let Some(next) = self.youth.get(i + 1) {
            self.kernel
                .schedule(next.arrival_time, ShelterEvent::Arrival(i + 1))?;
        }
        let kind = self.youth[i].kind;
        if self.collecting {
            self.state[i].cohort = true;
            self.flow.arrivals += 1;
            match kind {
                YouthKind::Bsy => self.flow.bsy_arrivals += 1,
                YouthKind::Nbsy => self.flow.nbsy_arrivals += 1,
            }
        }
        if self.trace.is_some() {
            self.log(i, TraceKind::Arrive(self.youth[i].clone()));
        }
        match kind {
            YouthKind::Bsy => {
                let patience = self.youth[i].bed_patience.ok_or_else(|| {
                    ModelError::Input(format!("bed-seeking youth {i} lacks bed patience"))
                })?;
                self.log(
                    i,
                    TraceKind::Request {
                        resource: "bed".into(),
                        units: 1,
                    },
                );
                match self.kernel.request(self.bed, i as EntityId, 1, patience)? {
                    RequestStatus::Granted(g) => self.on_bed_granted(i, g.wait)?,
                    RequestStatus::Queued(_) => {}
                }
            }
            YouthKind::Nbsy => self.start_services(i)?,
        }
        Ok(())
    }

    fn on_bed_granted(&mut self, i: usize, wait: f64) -> Result<(), ModelError> {
        self.state[i].holds_bed = true;
        self.outcomes[i].bed = BedOutcome::Granted { wait };
        self.log(
            i,
            TraceKind::Grant {
                resource: "bed".into(),
                units: 1,
                wait,
            },
        );
        self.start_services(i)
    }

    fn start_services(&mut self, i: usize) -> Result<(), ModelError> {
        let patience = self.youth[i].service_patience;
        for k in 0..self.services.len() {
            let units = self.youth[i].needs.count(k);
            if units == 0 {
                self.outcomes[i].services[k] = ServiceOutcome::Bypassed;
                continue;
            }
            let r = self.services[k];
            if self.trace.is_some() {
                let resource = self.resource_name(r);
                self.log(i, TraceKind::Request { resource, units });
            }
            match self.kernel.request(r, i as EntityId, units, patience)? {
                RequestStatus::Granted(g) => {
                    self.state[i].held[k] = units;
                    self.outcomes[i].services[k] = ServiceOutcome::Granted { wait: g.wait };
                    if self.trace.is_some() {
                        let resource = self.resource_name(r);
                        self.log(
                            i,
                            TraceKind::Grant {
                                resource,
                                units,
                                wait: g.wait,
                            },
                        );
                    }
                }
                RequestStatus::Queued(_) => {
                    self.outcomes[i].services[k] = ServiceOutcome::Waiting;
                    self.state[i].pending += 1;
                }
            }
        }
        if self.state[i].pending == 0 {
            self.resolve_batch(i)?;
        }
        Ok(())
    }

    fn service_index(&self, r: ResourceId) -> usize {
        self.services
            .iter()
            .position(|&s| s == r)
            .expect("resource belongs to this shelter")
    }

    fn on_grants(&mut self, grants: Vec<Grant>) -> Result<(), ModelError> {
        for g in grants {
            let i = g.entity as usize;
            if g.resource == self.bed {
                self.on_bed_granted(i, g.wait)?;
            } else {
                let k = self.service_index(g.resource);
                self.state[i].held[k] = g.units;
                self.outcomes[i].services[k] = ServiceOutcome::Granted { wait: g.wait };
                if self.trace.is_some() {
                    let resource = self.resource_name(g.resource);
                    self.log(
                        i,
                        TraceKind::Grant {
                            resource,
                            units: g.units,
                            wait: g.wait,
                        },
                    );
                }
                self.sub_request_done(i)?;
            }
        }
        Ok(())
    }

    fn on_renege(&mut self, r: &Renege) -> Result<(), ModelError> {
        let i = r.entity as usize;
        if self.trace.is_some() {
            let resource = self.resource_name(r.resource);
            self.log(i, TraceKind::Renege { resource });
        }
        if r.resource == self.bed {
            if self.youth[i].exits_on_bed_renege {
                self.outcomes[i].bed = BedOutcome::RenegedExit;
                if self.state[i].cohort {
                    self.flow.bed_renege_exit += 1;
                }
                self.log(i, TraceKind::BedExit);
                self.leave_unserved(i);
                Ok(())
            } else {
                self.outcomes[i].bed = BedOutcome::RenegedStayed;
                if self.state[i].cohort {
                    self.flow.bed_renege_stayed += 1;
                }
                if self.redraw_los_on_bed_renege {
                    self.state[i].length_of_stay = self.youth[i].converted_length_of_stay;
                }
                self.log(i, TraceKind::BedStay);
                self.start_services(i)
            }
        } else {
            let k = self.service_index(r.resource);
            self.outcomes[i].services[k] = ServiceOutcome::Reneged;
            self.sub_request_done(i)
        }
    }

    fn sub_request_done(&mut self, i: usize) -> Result<(), ModelError> {
        self.state[i].pending -= 1;
        if self.state[i].pending == 0 {
            self.resolve_batch(i)?;
        }
        Ok(())
    }

    /// All sign-ups are terminal: either leave empty-handed or stay until departure.
    fn resolve_batch(&mut self, i: usize) -> Result<(), ModelError> {
        let now = self.kernel.now();
        self.outcomes[i].batch_resolved = Some(now);
        self.log(i, TraceKind::Batch);
        let st = &self.state[i];
        if !st.holds_bed && st.held.iter().all(|&u| u == 0) {
            self.leave_unserved(i);
        } else {
            let at = departure_time(&self.youth[i], st.length_of_stay, now);
            self.kernel.schedule(at, ShelterEvent::Departure(i))?;
        }
        Ok(())
    }

    fn leave_unserved(&mut self, i: usize) {
        self.outcomes[i].departure = Some((Departure::LeftUnserved, self.kernel.now()));
        if self.state[i].cohort {
            self.flow.left_unserved += 1;
        }
        self.log(i, TraceKind::Depart(Departure::LeftUnserved));
    }

    fn on_departure(&mut self, i: usize) -> Result<(), ModelError> {
        self.outcomes[i].departure = Some((Departure::ServedThenLeft, self.kernel.now()));
        if self.state[i].cohort {
            self.flow.served_then_left += 1;
        }
        self.log(i, TraceKind::Depart(Departure::ServedThenLeft));

        let entity = i as EntityId;
        let mut grants = Vec::new();
        if std::mem::take(&mut self.state[i].holds_bed) {
            grants.extend(self.kernel.release(self.bed, entity, 1)?);
        }
        for k in 0..self.services.len() {
            let units = std::mem::take(&mut self.state[i].held[k]);
            if units > 0 {
                grants.extend(self.kernel.release(self.services[k], entity, units)?);
            }
        }
        self.on_grants(grants)
    }

    fn verify(&self) -> Result<(), ModelError> {
        let fail = |message: String| ModelError::Invariant {
            time: self.kernel.now(),
            message,
        };
        self.kernel.check_invariants().map_err(fail)?;
        for (i, st) in self.state.iter().enumerate() {
            let e = i as EntityId;
            let bed_held = self.kernel.resource(self.bed).held_by(e);
            if bed_held != u32::from(st.holds_bed) {
                return Err(fail(format!(
                    "youth {i} bed bookkeeping: kernel {bed_held}"
                )));
            }
            for (k, &r) in self.services.iter().enumerate() {
                let held = self.kernel.resource(r).held_by(e);
                if held != st.held[k] || held > self.youth[i].needs.count(k) {
                    return Err(fail(format!("youth {i} holds {held} of service {k}")));
                }
            }
            if self.outcomes[i].departure.is_some()
                && (st.holds_bed || st.held.iter().any(|&u| u > 0))
            {
                return Err(fail(format!("youth {i} departed while holding units")));
            }
        }
        Ok(())
    }
}
