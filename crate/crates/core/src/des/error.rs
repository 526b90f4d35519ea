use thiserror::Error;

use super::time::SimTime;

/// Kernel misuse. Every variant indicates a bug in the calling model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("cannot schedule at t={time} when the clock reads {now}")]
    ScheduleInPast { now: SimTime, time: SimTime },
    #[error("cannot run backwards to t={target} from {now}")]
    RunBackwards { now: SimTime, target: SimTime },
    #[error("request for {units} units of `{resource}` exceeds its capacity {capacity}")]
    Unsatisfiable {
        resource: String,
        units: u32,
        capacity: u32,
    },
    #[error("request for zero units of `{resource}`")]
    ZeroUnits { resource: String },
    #[error("negative or NaN patience {patience} on `{resource}`")]
    BadPatience { resource: String, patience: f64 },
    #[error("entity {entity} releases {units} units of `{resource}` but holds {held}")]
    OverRelease {
        resource: String,
        entity: u64,
        units: u32,
        held: u32,
    },
    #[error("utilization of zero-capacity resource `{resource}` is undefined")]
    ZeroCapacity { resource: String },
    #[error("utilization window [{start}, {end}] does not match the recorded window [{recorded_start}, {recorded_end}]")]
    WindowMismatch {
        start: SimTime,
        end: SimTime,
        recorded_start: SimTime,
        recorded_end: SimTime,
    },
    #[error("empty utilization window [{start}, {end}]")]
    EmptyWindow { start: SimTime, end: SimTime },
}
