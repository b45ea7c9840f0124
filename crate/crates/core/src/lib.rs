//! Multi-area bulk power system reliability assessment.
//!
//! The crate reads a study deck made of legacy data cards, levelizes generator
//! preventive maintenance against the weekly load curve, then runs an
//! event-driven sequential Monte Carlo simulation in which every deficient
//! hour is resolved by a DC network minimum-load-shedding linear program.
//! Area-wise and pool reliability indices (HLOLE, LOLE, EUE, XLOL) are reported
//! split by generation-caused and transmission-caused shortfalls, together with
//! their year-to-year probability distributions.
//!
//! The pipeline, in the order a study runs through it:
//!
//! | stage | module |
//! |-------|--------|
//! | read and validate the deck | [`card_io`] |
//! | schedule planned outages | [`maintenance`] |
//! | solve one hour's shedding problem | [`dispatch`] (on top of [`lp`]) |
//! | simulate replication years | [`smc`] |
//! | accumulate and render indices | [`stats`] |
//! | command-line driver | [`cli`] |
//!
//! The simulated calendar is exactly 52 weeks of 7 days of 24 hours.

pub mod card_io;
pub mod cli;
pub mod dispatch;
pub mod lp;
pub mod maintenance;
pub mod smc;
pub mod stats;

/// Weeks in a simulated year.
pub const WEEKS_PER_YEAR: usize = 52;
/// Days in a simulated year (52 full weeks).
pub const DAYS_PER_YEAR: usize = WEEKS_PER_YEAR * 7;
/// Hours in a simulated year.
pub const HOURS_PER_YEAR: usize = DAYS_PER_YEAR * 24;
/// Hours in a week.
pub const HOURS_PER_WEEK: usize = 168;

pub use card_io::{parse_deck, read_deck, validate_deck, write_deck, Deck, DeckFormat, SimConfig, SystemModel};
pub use dispatch::{classify_causes, solve_min_shed, NetworkCase, ShedSolution};
pub use maintenance::{schedule_maintenance, MaintenancePlan};
pub use smc::{run_simulation, SimOptions, SimResult};
