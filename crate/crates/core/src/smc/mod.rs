//! Sequential Monte Carlo simulation of replication years.
//!
//! Each year is an event-driven chronology on an hourly clock. Unit and line
//! state changes are kept in a time-ordered queue and applied at the start of
//! the hour they fall in; calendar events switch seasons and planned outages.
//! Hours whose areas all cover their own demand skip the network solve.

mod components;
mod engine;
mod events;

pub use components::{
    dwell_hours, sample_line_transition, sample_unit_transition, LineChain, UnitChain, UnitState,
};
pub use engine::{
    run_simulation, run_simulation_with, HourRecord, Hooks, RunCounters, SimError, SimOptions, SimResult,
    MIN_YEARS_FOR_CONVERGENCE,
};
pub use events::{Event, EventList, EventType};
