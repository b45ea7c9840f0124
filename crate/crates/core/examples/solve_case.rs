//! Minimum load shedding on a small network, under both loss-sharing
//! policies, with the shed split into generation- and transmission-caused
//! parts.
//!
//! ```text
//! cargo run --example solve_case [-- case.csv]
//! ```

use narp::card_io::LossSharing;
use narp::dispatch::{check_certificate, classify_causes, parse_case_csv, solve_min_shed, NetworkCase, SolveOptions};

fn show(label: &str, case: &NetworkCase, mode: LossSharing) -> Result<(), Box<dyn std::error::Error>> {
    let sol = solve_min_shed(case, mode, SolveOptions::default())?;
    let split = classify_causes(case, &sol, mode)?;
    println!("{label} ({mode:?}): total shed {:.3} MW, certificate {:.1e}", sol.total_shed_mw, check_certificate(case, &sol));
    for i in 0..case.areas.len() {
        println!(
            "  area {i}: gen {:>7.2}  shed {:>7.2}  = gc {:>7.2} + tc {:>7.2}",
            sol.gen_mw[i], sol.shed_mw[i], split.gc_mw[i], split.tc_mw[i]
        );
    }
    for (l, f) in case.lines.iter().zip(&sol.flows_mw) {
        println!("  line {}->{}: {f:>7.2} MW", l.from, l.to);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        let file = parse_case_csv(&std::fs::read_to_string(path)?)?;
        return show("case file", &file.case, file.mode);
    }

    // a weak tie caps the help area 0 can get from area 1
    let tie = NetworkCase::isolated(&[0.0, 200.0], &[80.0, 80.0]).with_line(0, 1, 10.0, 50.0, 50.0);
    show("weak tie", &tie, LossSharing::LossSharing)?;

    // a pool that is short of generation: sharing spreads the shortfall
    let short = NetworkCase::isolated(&[20.0, 100.0], &[100.0, 100.0]).with_line(0, 1, 10.0, 500.0, 500.0);
    show("short pool", &short, LossSharing::LossSharing)?;
    show("short pool", &short, LossSharing::NonLossSharing)?;

    // a chain whose middle area has no generation
    let chain = NetworkCase::isolated(&[100.0, 0.0, 100.0], &[60.0, 60.0, 60.0])
        .with_line(0, 1, 10.0, 20.0, 20.0)
        .with_line(1, 2, 10.0, 20.0, 20.0);
    show("chain", &chain, LossSharing::NonLossSharing)?;
    Ok(())
}
