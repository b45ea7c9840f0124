//! Levelize planned outages of the bundled deck and compare the result with
//! placing every outage at its earliest feasible week.
//!
//! ```text
//! cargo run --example maintenance_schedule
//! ```

use narp::card_io::Deck;
use narp::maintenance::{build_copt, naive_plan, schedule_maintenance, slope_per_area, MaintenanceOptions};
use narp::stats::render_schedule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let deck = Deck::five_area();
    let m = &deck.model;
    let opts = MaintenanceOptions::default();

    let area = 0;
    let copt = build_copt(m.units_in_area(area).map(|u| &m.units[u]), area, opts.season, opts.resolution_mw)?;
    println!("area 1 capacity outage table: {} rows", copt.entries.len());
    for x in [0.0, 200.0, 400.0, 800.0] {
        println!("  P(outage ≥ {x:>5} MW) = {:.6}", copt.prob_at_least(x));
    }

    let slopes = slope_per_area(m, &opts);
    let plan = schedule_maintenance(m, &deck.config, &opts)?;
    let naive = naive_plan(m, &slopes)?;
    for (a, s) in slopes.iter().enumerate() {
        let peak = |p: &narp::MaintenancePlan| p.weekly_peaks_adjusted[a].iter().copied().fold(0.0, f64::max);
        println!(
            "area {}: M = {s:.2} MW, max weekly load + maintenance {:.1} MW (earliest-week placement {:.1} MW)",
            a + 1,
            peak(&plan),
            peak(&naive)
        );
    }
    for s in plan.units.iter().filter(|s| !s.outages.is_empty()) {
        let u = &m.units[s.unit];
        for o in &s.outages {
            println!(
                "{} ({} MW, effective {:.1} MW): weeks {}-{}{}",
                u.name,
                u.rated_capacity(),
                s.effective_capacity,
                o.start_week,
                o.end_week(),
                if o.automatic { "" } else { " (fixed)" }
            );
        }
    }
    println!();
    print!("{}", render_schedule(m, &plan));
    Ok(())
}
