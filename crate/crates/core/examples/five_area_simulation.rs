//! Run the bundled five-area study to convergence and print pool indices.
//!
//! ```text
//! cargo run --release --example five_area_simulation [-- deck.txt [parallel]]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use narp::card_io::ReliabilityIndex;
use narp::maintenance::MaintenanceOptions;
use narp::smc::{run_simulation_with, Hooks, SimOptions};
use narp::stats::{Cause, Scope, TracePoint};
use narp::{read_deck, schedule_maintenance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/five_area.txt"));
    let parallel: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let deck = read_deck(&path)?;
    let plan = schedule_maintenance(&deck.model, &deck.config, &MaintenanceOptions::default())?;
    let opts = SimOptions { parallel, ..SimOptions::default() };

    let started = Instant::now();
    let mut progress = |p: &TracePoint| {
        if p.year.is_multiple_of(250) {
            eprintln!("year {:5}  mean {:.4}  beta {:?}", p.year, p.mean, p.beta);
        }
    };
    let hooks = Hooks { observer: None, progress: Some(&mut progress) };
    let result = run_simulation_with(&deck.model, &deck.config, &plan, opts, hooks)?;
    let secs = started.elapsed().as_secs_f64();

    println!(
        "{} years in {:.1} s ({:.0} years/min), converged: {}, beta {:?}",
        result.years(),
        secs,
        result.years() as f64 / secs * 60.0,
        result.converged,
        result.final_beta()
    );
    println!("network solves: {}, screened hours: {}", result.counters.lp_calls, result.counters.screened_hours);
    for cause in Cause::ALL {
        println!(
            "pool {}  HLOLE {:.3} h/yr  LOLE {:.3} d/yr  EUE {:.1} MWh/yr",
            cause.label(),
            result.acc.mean(Scope::Pool, ReliabilityIndex::Hlole, cause),
            result.acc.mean(Scope::Pool, ReliabilityIndex::Lole, cause),
            result.acc.mean(Scope::Pool, ReliabilityIndex::Eue, cause),
        );
    }
    Ok(())
}
