//! Discrete-event simulation of a youth crisis shelter.
//!
//! Youth arrive, queue (impatiently) for a crisis bed and for five appointment
//! pools, stay, and leave. [`experiment`] runs warm-up plus replicated
//! scenarios and one-parameter capacity sweeps on top of the model.

pub mod config;
pub mod des;
pub mod dist;
pub mod experiment;
pub mod model;

pub use config::{ScenarioConfig, ServiceSpec};
pub use experiment::{
    run_replication, run_scenario, sweep, ReplicationStats, ScenarioSummary, SweepParam,
};
