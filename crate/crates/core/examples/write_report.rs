//! Simulate the bundled deck at a loose threshold and write the text report
//! and csv tables to a directory.
//!
//! ```text
//! cargo run --release --example write_report [-- out_dir]
//! ```

use std::fs;
use std::path::PathBuf;

use narp::card_io::Deck;
use narp::maintenance::MaintenanceOptions;
use narp::smc::{run_simulation, SimOptions};
use narp::stats::{bin_distributions, render_report, ReportFormat, ReportInput, DEFAULT_BINS};
use narp::schedule_maintenance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("narp_report"));
    let mut deck = Deck::five_area();
    deck.config.cvt = 0.1;
    let plan = schedule_maintenance(&deck.model, &deck.config, &MaintenanceOptions::default())?;
    let result = run_simulation(&deck.model, &deck.config, &plan, SimOptions::default())?;
    let dist = bin_distributions(&result.acc, DEFAULT_BINS);
    let input = ReportInput {
        model: &deck.model,
        config: &deck.config,
        plan: &plan,
        acc: &result.acc,
        dist: &dist,
        trace: &result.trace,
        converged: result.converged,
        settings: &[],
    };
    for format in [ReportFormat::Txt, ReportFormat::Csv] {
        for (rel, text) in render_report(&input, format) {
            let path = dir.join(rel);
            fs::create_dir_all(path.parent().unwrap())?;
            fs::write(&path, text)?;
            println!("wrote {}", path.display());
        }
    }
    let report = fs::read_to_string(dir.join("report.txt"))?;
    let start = report.find("FINAL RESULTS").unwrap_or(0);
    println!("\n{}", report[start..].lines().take(30).collect::<Vec<_>>().join("\n"));
    Ok(())
}
