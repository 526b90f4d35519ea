//! Replications with warm-up truncation, scenario summaries and capacity sweeps.

mod summary;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::des::SimTime;
use crate::model::{
    generate_arrivals, ArrivalStreams, FlowCounters, ModelError, ShelterSim, TraceEvent,
};

pub use summary::{student_t_975, Metric, ResourceSummary, ScenarioSummary};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown sweep parameter `{0}` (expected `bed_capacity` or `service:<name>`)")]
    UnknownParameter(String),
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// Statistics-window results of one resource in one replication.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceReport {
    pub name: String,
    pub capacity: u32,
    pub request_count: u64,
    pub served: u64,
    pub renege_count: u64,
    pub still_queued: u64,
    pub busy_time_integral: f64,
    pub avg_wait: Option<f64>,
    pub max_wait: Option<f64>,
    /// `None` for a zero-capacity pool.
    pub utilization: Option<f64>,
    /// Reneges over requests issued in the window; `None` without requests.
    pub renege_pct: Option<f64>,
}

impl ResourceReport {
    pub fn is_conserved(&self) -> bool {
        self.request_count == self.served + self.renege_count + self.still_queued
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationStats {
    pub index: u64,
    /// Bed first, then services in config order.
    pub resources: Vec<ResourceReport>,
    pub flow: FlowCounters,
}

impl ReplicationStats {
    pub fn resource(&self, name: &str) -> Option<&ResourceReport> {
        self.resources.iter().find(|r| r.name == name)
    }
}

fn collect(sim: &ShelterSim, index: u64, window: (SimTime, SimTime)) -> ReplicationStats {
    let resources = sim
        .kernel()
        .resources()
        .iter()
        .map(|r| {
            let s = r.stats();
            let served = s.served_waits.len() as u64;
            let avg_wait = (served > 0).then(|| s.served_waits.iter().sum::<f64>() / served as f64);
            let max_wait = s.served_waits.iter().copied().reduce(f64::max);
            ResourceReport {
                name: r.name().to_owned(),
                capacity: r.capacity(),
                request_count: s.request_count,
                served,
                renege_count: s.renege_count,
                still_queued: r.queued_in_window() as u64,
                busy_time_integral: s.busy_time_integral,
                avg_wait,
                max_wait,
                utilization: r.utilization(window.0, window.1).ok(),
                renege_pct: (s.request_count > 0)
                    .then(|| 100.0 * s.renege_count as f64 / s.request_count as f64),
            }
        })
        .collect();
    ReplicationStats {
        index,
        resources,
        flow: sim.flow(),
    }
}

fn simulate(config: &ScenarioConfig, index: u64, traced: bool) -> Result<ShelterSim, ModelError> {
    let horizon = config.horizon_days();
    let mut streams = ArrivalStreams::new(config.master_seed, index);
    let youth = generate_arrivals(config, &mut streams, horizon);
    let mut sim = ShelterSim::new(config, youth)?;
    if traced {
        sim = sim.with_trace();
    }
    sim.run_until(config.warmup_days)?;
    sim.reset_stats();
    sim.run_until(horizon)?;
    Ok(sim)
}

/// One independent replication: warm up, reset the accumulators, then collect
/// over the statistics window. Streams are keyed by `(master_seed, index, name)`.
pub fn run_replication(
    config: &ScenarioConfig,
    index: u64,
) -> Result<ReplicationStats, ModelError> {
    let sim = simulate(config, index, false)?;
    let window = (
        SimTime::from_days(config.warmup_days),
        SimTime::from_days(config.horizon_days()),
    );
    Ok(collect(&sim, index, window))
}

/// As [`run_replication`], also returning the youth-level event log.
pub fn run_replication_traced(
    config: &ScenarioConfig,
    index: u64,
) -> Result<(ReplicationStats, Vec<TraceEvent>), ModelError> {
    let sim = simulate(config, index, true)?;
    let window = (
        SimTime::from_days(config.warmup_days),
        SimTime::from_days(config.horizon_days()),
    );
    Ok((collect(&sim, index, window), sim.trace().to_vec()))
}

/// Runs every replication on the global thread pool and summarises them.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioSummary, ExperimentError> {
    run_scenario_with_jobs(config, None)
}

/// `jobs` bounds the number of replications in flight; `None` uses the global pool.
pub fn run_scenario_with_jobs(
    config: &ScenarioConfig,
    jobs: Option<usize>,
) -> Result<ScenarioSummary, ExperimentError> {
    config.validate()?;
    let work = || -> Result<Vec<ReplicationStats>, ModelError> {
        (0..u64::from(config.replications))
            .into_par_iter()
            .map(|i| run_replication(config, i))
            .collect()
    };
    let reps = match jobs {
        None => work()?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?
            .install(work)?,
    };
    Ok(ScenarioSummary::from_replications(reps))
}

/// What a sweep varies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SweepParam {
    BedCapacity,
    ServiceCapacity(String),
}

impl FromStr for SweepParam {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bed_capacity" => Ok(SweepParam::BedCapacity),
            _ => match s.strip_prefix("service:") {
                Some(name) if !name.is_empty() => Ok(SweepParam::ServiceCapacity(name.to_owned())),
                _ => Err(ExperimentError::UnknownParameter(s.to_owned())),
            },
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::BedCapacity => write!(f, "bed_capacity"),
            SweepParam::ServiceCapacity(name) => write!(f, "service:{name}"),
        }
    }
}

impl SweepParam {
    /// A copy of `config` with this parameter set to `value`.
    pub fn apply(
        &self,
        config: &ScenarioConfig,
        value: u32,
    ) -> Result<ScenarioConfig, ExperimentError> {
        let mut c = config.clone();
        match self {
            SweepParam::BedCapacity => c.bed_capacity = value,
            SweepParam::ServiceCapacity(name) => {
                let k = c
                    .service_index(name)
                    .ok_or_else(|| ExperimentError::UnknownParameter(self.to_string()))?;
                c.services[k].capacity_units = value;
            }
        }
        Ok(c)
    }
}

/// One scenario per value, everything else (seed included) held fixed, so all
/// scenarios see the same youth and differ only in contention.
pub fn sweep(
    config: &ScenarioConfig,
    param: &SweepParam,
    values: &[u32],
) -> Result<Vec<(u32, ScenarioSummary)>, ExperimentError> {
    sweep_with_jobs(config, param, values, None)
}

pub fn sweep_with_jobs(
    config: &ScenarioConfig,
    param: &SweepParam,
    values: &[u32],
    jobs: Option<usize>,
) -> Result<Vec<(u32, ScenarioSummary)>, ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::EmptySweep);
    }
    let configs = values
        .iter()
        .map(|&v| param.apply(config, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>, _>>()?;
    for (_, c) in &configs {
        c.validate()?;
    }
    configs
        .into_iter()
        .map(|(v, c)| run_scenario_with_jobs(&c, jobs).map(|s| (v, s)))
        .collect()
}
