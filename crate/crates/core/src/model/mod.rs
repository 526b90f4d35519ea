//! The shelter: youth generation and the intake, sign-up, stay and departure flow.

mod process;
mod youth;

pub use process::{
    departure_time, BedOutcome, Departure, FlowCounters, ModelError, ServiceOutcome, ShelterEvent,
    ShelterSim, TraceEvent, TraceKind, YouthOutcome,
};
pub use youth::{
    assign_attributes, build_needs_profile, generate_arrivals, AgeGroup, ArrivalStreams,
    NeedsProfile, StayDraw, Youth, YouthKind,
};
