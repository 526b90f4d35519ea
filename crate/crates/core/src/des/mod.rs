//! Discrete-event kernel: clock, event calendar, impatient multi-unit
//! resources and reproducible random streams.

mod calendar;
mod error;
mod kernel;
mod resource;
mod rng;
mod time;

pub use calendar::{Calendar, EventHandle};
pub use error::SimError;
pub use kernel::{Action, Grant, Kernel, KernelRecord, Occurrence, Renege, RequestStatus};
pub use resource::{EntityId, PendingRequest, RequestId, Resource, ResourceId, ResourceStats};
pub use rng::RngStream;
pub use time::SimTime;
