//! Random resource workloads for kernel property tests.
//!
//! Times are multiples of 0.25 so that arrivals, releases and deadlines
//! collide often and the arithmetic stays exact.

#![allow(dead_code)]

pub mod sampling;

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use shelter_core::des::{
    Kernel, KernelRecord, Occurrence, RequestId, RequestStatus, ResourceId, SimTime,
};

#[derive(Clone, Debug)]
pub struct Job {
    pub resource: usize,
    pub arrival: f64,
    pub units: u32,
    pub patience: f64,
    pub hold: f64,
}

#[derive(Clone, Debug)]
pub struct Workload {
    pub capacities: Vec<u32>,
    pub jobs: Vec<Job>,
    pub horizon: f64,
}

fn quarters(lo: u32, hi: u32) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_map(|q| q as f64 * 0.25)
}

pub fn workload() -> impl Strategy<Value = Workload> {
    prop::collection::vec(1u32..=6, 1..=3).prop_flat_map(|caps| {
        let patience = prop_oneof![
            1 => Just(0.0),
            6 => quarters(1, 24),
            1 => Just(f64::INFINITY),
        ];
        let job = (
            0..caps.len(),
            quarters(0, 8),
            1u32..=6,
            patience,
            quarters(1, 40),
        );
        (Just(caps), prop::collection::vec(job, 1..60), 0.2f64..1.5).prop_map(
            |(caps, raw, horizon_frac)| {
                let mut t = 0.0;
                let jobs: Vec<Job> = raw
                    .into_iter()
                    .map(|(r, gap, units, patience, hold)| {
                        t += gap;
                        Job {
                            resource: r,
                            arrival: t,
                            units: 1 + (units - 1) % caps[r],
                            patience,
                            hold,
                        }
                    })
                    .collect();
                let horizon = ((t + 10.0) * horizon_frac * 4.0).floor() / 4.0;
                Workload {
                    capacities: caps,
                    jobs,
                    horizon,
                }
            },
        )
    })
}

#[derive(Clone, Copy, Debug)]
enum Ev {
    Arrive(usize),
    Release(usize),
}

/// What a finished run leaves behind.
#[derive(Debug, PartialEq)]
pub struct Run {
    pub trace: Vec<KernelRecord>,
    /// Job behind each request number.
    pub jobs_by_request: HashMap<RequestId, usize>,
    /// Requests still waiting at the horizon.
    pub queued: Vec<RequestId>,
    /// Per resource: (requests, served, reneged, busy-time integral).
    pub stats: Vec<(u64, u64, u64, f64)>,
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

/// Drives a kernel through the workload up to its horizon, checking the
/// kernel's own invariants and work conservation after every step.
pub fn drive(w: &Workload) -> Result<Run, String> {
    let mut k: Kernel<Ev> = Kernel::new().with_trace();
    let ids: Vec<ResourceId> = w
        .capacities
        .iter()
        .enumerate()
        .map(|(i, &c)| k.add_resource(format!("r{i}"), c))
        .collect();
    for (j, job) in w.jobs.iter().enumerate() {
        k.schedule(SimTime::from_days(job.arrival), Ev::Arrive(j))
            .map_err(err)?;
    }
    let end = SimTime::from_days(w.horizon);
    let mut jobs_by_request = HashMap::new();
    while let Some(occ) = k.next(end) {
        let now = k.now();
        let grants = match occ {
            Occurrence::User {
                action: Ev::Arrive(j),
                ..
            } => {
                let job = &w.jobs[j];
                match k
                    .request(ids[job.resource], j as u64, job.units, job.patience)
                    .map_err(err)?
                {
                    RequestStatus::Granted(g) => {
                        jobs_by_request.insert(g.request, j);
                        vec![g]
                    }
                    RequestStatus::Queued(id) => {
                        jobs_by_request.insert(id, j);
                        vec![]
                    }
                }
            }
            Occurrence::User {
                action: Ev::Release(j),
                ..
            } => {
                let job = &w.jobs[j];
                k.release(ids[job.resource], j as u64, job.units)
                    .map_err(err)?
            }
            Occurrence::Reneged { grants, .. } => grants,
        };
        for g in grants {
            let gj = g.entity as usize;
            k.schedule(now + w.jobs[gj].hold, Ev::Release(gj))
                .map_err(err)?;
        }
        k.check_invariants()?;
        for r in k.resources() {
            if let Some(head) = r.queued().next() {
                if head.units <= r.free() {
                    return Err(format!(
                        "{} idles with a fitting head {:?} at {now}",
                        r.name(),
                        head.id
                    ));
                }
            }
        }
    }
    k.advance_to(end).map_err(err)?;
    Ok(Run {
        trace: k.trace().to_vec(),
        jobs_by_request,
        queued: k
            .resources()
            .iter()
            .flat_map(|r| r.queued().map(|q| q.id))
            .collect(),
        stats: k
            .resources()
            .iter()
            .map(|r| {
                let s = r.stats();
                (
                    s.request_count,
                    s.served_waits.len() as u64,
                    s.renege_count,
                    s.busy_time_integral,
                )
            })
            .collect(),
    })
}

/// Every kernel property on one workload. `Err` names the first violation.
pub fn check(w: &Workload) -> Result<(), String> {
    let run = drive(w)?;
    if drive(w)? != run {
        return Err("two runs of the same workload differ".into());
    }

    let n = w.capacities.len();
    let mut busy = vec![0u32; n];
    let mut last_change = vec![0.0f64; n];
    let mut integral = vec![0.0f64; n];
    let mut last_granted: Vec<Option<RequestId>> = vec![None; n];
    let mut issued: HashMap<RequestId, (f64, f64)> = HashMap::new();
    let mut resolved: HashSet<RequestId> = HashSet::new();
    let mut served = vec![0u64; n];
    let mut reneged = vec![0u64; n];

    for rec in &run.trace {
        match rec {
            KernelRecord::Requested {
                time,
                request,
                deadline,
                ..
            } => {
                let job = &w.jobs[run.jobs_by_request[request]];
                let want = SimTime::from_days(job.arrival + job.patience);
                if *deadline != want {
                    return Err(format!(
                        "{request:?} has deadline {deadline}, expected {want}"
                    ));
                }
                issued.insert(*request, (time.days(), job.patience));
            }
            KernelRecord::Granted(g) => {
                let r = g.resource.0;
                integral[r] += busy[r] as f64 * (g.time.days() - last_change[r]);
                last_change[r] = g.time.days();
                busy[r] += g.units;
                if busy[r] > w.capacities[r] {
                    return Err(format!(
                        "r{r} holds {} of {} at {}",
                        busy[r], w.capacities[r], g.time
                    ));
                }
                let (at, patience) = issued[&g.request];
                if g.wait != g.time.days() - at {
                    return Err(format!(
                        "{:?} reports wait {} but waited {}",
                        g.request,
                        g.wait,
                        g.time.days() - at
                    ));
                }
                if g.wait > patience {
                    return Err(format!(
                        "{:?} waited {} beyond patience {patience}",
                        g.request, g.wait
                    ));
                }
                if last_granted[r].is_some_and(|prev| prev >= g.request) {
                    return Err(format!(
                        "r{r} granted {:?} after {:?}",
                        g.request, last_granted[r]
                    ));
                }
                last_granted[r] = Some(g.request);
                if !resolved.insert(g.request) {
                    return Err(format!("{:?} resolved twice", g.request));
                }
                served[r] += 1;
            }
            KernelRecord::Reneged(rg) => {
                let (at, patience) = issued[&rg.request];
                if rg.time.days() != at + patience || rg.enqueue_time.days() != at {
                    return Err(format!(
                        "{:?} reneged at {}, not {at} + {patience}",
                        rg.request, rg.time
                    ));
                }
                if !resolved.insert(rg.request) {
                    return Err(format!("{:?} resolved twice", rg.request));
                }
                reneged[rg.resource.0] += 1;
            }
            KernelRecord::Released {
                time,
                resource,
                units,
                ..
            } => {
                let r = resource.0;
                integral[r] += busy[r] as f64 * (time.days() - last_change[r]);
                last_change[r] = time.days();
                busy[r] -= units;
            }
        }
    }

    if let Some(q) = run.queued.iter().find(|q| resolved.contains(q)) {
        return Err(format!("{q:?} still queued after being resolved"));
    }
    if resolved.len() + run.queued.len() != issued.len() {
        return Err(format!(
            "{} requests but {} resolved and {} queued",
            issued.len(),
            resolved.len(),
            run.queued.len()
        ));
    }
    for r in 0..n {
        let (requests, k_served, k_reneged, k_integral) = run.stats[r];
        if (k_served, k_reneged) != (served[r], reneged[r]) {
            return Err(format!("r{r}: counters disagree with the trace"));
        }
        let queued = requests - k_served - k_reneged;
        if requests < k_served + k_reneged || queued as usize > run.queued.len() {
            return Err(format!(
                "r{r}: {requests} requests do not cover {k_served} served and {k_reneged} reneged"
            ));
        }
        integral[r] += busy[r] as f64 * (w.horizon - last_change[r]);
        if (integral[r] - k_integral).abs() > 1e-9 * (1.0 + integral[r]) {
            return Err(format!(
                "r{r}: busy integral {k_integral}, trace gives {}",
                integral[r]
            ));
        }
    }
    Ok(())
}
