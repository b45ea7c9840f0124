//! One area served by one two-state unit at constant load: the hours of lost
//! load per year have the closed form FOR × 8736. The simulated estimate is
//! compared with it at several mean down times.
//!
//! ```text
//! cargo run --release --example single_area_oracle
//! ```

use narp::card_io::{Area, GenUnit, LoadModel, LoadProfile, PlannedOutage, ReliabilityIndex, SchedulingMode, SimConfig, SystemModel, WeekRange};
use narp::smc::{run_simulation, SimOptions};
use narp::stats::{Cause, Scope};
use narp::{MaintenancePlan, HOURS_PER_YEAR};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let for_rate = 0.02;
    let mut model = SystemModel {
        areas: vec![Area {
            sn: 1,
            name: "A1".into(),
            peak_mw: 50.0,
            lfu_pct: 0.0,
            outage_window: WeekRange::new(1, 52),
            forbidden_period: None,
            sum_flows_limit: 1e6,
        }],
        units: vec![GenUnit {
            sn: 1,
            name: "A10101".into(),
            location: "A1".into(),
            cap_by_season: [100.0; 4],
            dfor: 0.0,
            for_rate,
            der_pct: 0.0,
            scheduling: SchedulingMode::Automatic,
            outages: [PlannedOutage::default(); 2],
            mean_down_time_h: None,
        }],
        lines: vec![],
        contracts: vec![],
        ownerships: vec![],
        load_card: Some(LoadModel {
            shared: LoadProfile { weekly_pct: [100.0; 52], daily_pct: [100.0; 7], hourly_pct_by_season: [[100.0; 24]; 4] },
            per_area: vec![],
        }),
    };
    let config = SimConfig { cvt: 0.02, ..SimConfig::default() };
    let exact = for_rate * HOURS_PER_YEAR as f64;
    println!("exact HLOLE {exact:.2} h/yr");
    for mdt in [4.0, 48.0, 200.0] {
        model.units[0].mean_down_time_h = Some(mdt);
        let plan = MaintenancePlan::empty(&model);
        let r = run_simulation(&model, &config, &plan, SimOptions::default())?;
        let x = r.acc.mean(Scope::Area(0), ReliabilityIndex::Hlole, Cause::Gt);
        let se = r.acc.std_error(Scope::Area(0), ReliabilityIndex::Hlole, Cause::Gt).unwrap_or(f64::NAN);
        println!(
            "mean down time {mdt:>5} h: {x:7.2} ± {se:5.2} h/yr after {:>5} years ({:+.1} standard errors)",
            r.years(),
            (x - exact) / se
        );
    }
    Ok(())
}
