use std::fmt::Write as _;

use super::accumulator::{Cause, IndexAccumulator, Scope};
use super::distribution::{AreaDistribution, DistributionTable};
use super::TracePoint;
use crate::card_io::{CollectionFrequency, ReliabilityIndex, SimConfig, SystemModel};
use crate::maintenance::MaintenancePlan;
use crate::WEEKS_PER_YEAR;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Txt,
    Csv,
}

/// An effective run setting and where its value came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub name: String,
    pub value: String,
    pub source: String,
}

/// Everything a report is rendered from.
pub struct ReportInput<'a> {
    pub model: &'a SystemModel,
    pub config: &'a SimConfig,
    pub plan: &'a MaintenancePlan,
    pub acc: &'a IndexAccumulator,
    pub dist: &'a DistributionTable,
    pub trace: &'a [TracePoint],
    pub converged: bool,
    pub settings: &'a [Setting],
}

/// One output file: path relative to the output directory, and contents.
pub type ReportFile = (String, String);

pub fn render_report(input: &ReportInput<'_>, format: ReportFormat) -> Vec<ReportFile> {
    match format {
        ReportFormat::Txt => vec![("report.txt".to_string(), render_txt(input))],
        ReportFormat::Csv => render_csv(input),
    }
}

fn rule(out: &mut String, width: usize) {
    out.push_str(&"=".repeat(width));
    out.push('\n');
}

fn frequency_label(f: CollectionFrequency) -> &'static str {
    match f {
        CollectionFrequency::Hourly => "HOURLY",
        CollectionFrequency::DailyPeak => "DAILY PEAK",
    }
}

fn week_grid(out: &mut String, values: &[f64; WEEKS_PER_YEAR]) {
    let _ = write!(out, "{:>8}", "WEEK");
    for c in 1..=13 {
        let _ = write!(out, "{c:>9}");
    }
    out.push('\n');
    for r in 0..4 {
        let _ = write!(out, "{:>8}", format!("{}-{}", r * 13 + 1, r * 13 + 13));
        for c in 0..13 {
            let _ = write!(out, "{:>9.2}", values[r * 13 + c]);
        }
        out.push('\n');
    }
}

fn section_system(out: &mut String, input: &ReportInput<'_>) {
    let (m, cfg) = (input.model, input.config);
    rule(out, 100);
    out.push_str("SYSTEM RE-DESCRIPTION\n");
    rule(out, 100);
    out.push_str("SIMULATION SETTINGS\n");
    let _ = writeln!(out, "{:<28}{:<20}{}", "SETTING", "VALUE", "SOURCE");
    for s in input.settings {
        let _ = writeln!(out, "{:<28}{:<20}{}", s.name, s.value, s.source);
    }
    let _ = writeln!(out, "MAXIMUM YEARS (FIN): {}", cfg.fin);
    let _ = writeln!(out, "STATISTICS COLLECTED: {}", frequency_label(cfg.collection_frequency));
    let _ = writeln!(out, "SEASON END WEEKS: {} {} {} 52", cfg.season_end_weeks[0], cfg.season_end_weeks[1], cfg.season_end_weeks[2]);
    out.push('\n');
    out.push_str("AREAS\n");
    let _ = writeln!(
        out,
        "{:>4} {:<6}{:>10}{:>8}{:>12}{:>12}{:>14}",
        "SN", "NAME", "PEAK (MW)", "LFU %", "WINDOW", "FORBIDDEN", "SUM FLOWS"
    );
    for a in &m.areas {
        let fp = a.forbidden_period.map_or("-".to_string(), |f| format!("{}-{}", f.beg, f.end));
        let _ = writeln!(
            out,
            "{:>4} {:<6}{:>10.2}{:>8.2}{:>12}{:>12}{:>14.2}",
            a.sn,
            a.name,
            a.peak_mw,
            a.lfu_pct,
            format!("{}-{}", a.outage_window.beg, a.outage_window.end),
            fp,
            a.sum_flows_limit
        );
    }
    out.push('\n');
    out.push_str("GENERATING UNITS\n");
    let _ = writeln!(out, "{:<8}{:<6}{:>10}{:>8}{:>8}{:>8}", "NAME", "AREA", "CAP (MW)", "FOR", "DFOR", "DER %");
    for u in &m.units {
        let _ = writeln!(
            out,
            "{:<8}{:<6}{:>10.2}{:>8.4}{:>8.4}{:>8.2}",
            u.name,
            u.location,
            u.rated_capacity(),
            u.for_rate,
            u.dfor,
            u.der_pct
        );
    }
    out.push('\n');
    out.push_str("TIE-LINES\n");
    let _ = writeln!(out, "{:>4}{:>6} {:<6}{:<6}{:>8}", "SN", "LINE", "FROM", "TO", "STATES");
    for l in &m.lines {
        let _ = writeln!(out, "{:>4}{:>6} {:<6}{:<6}{:>8}", l.sn, l.line_number, l.from_area, l.to_area, l.states.len());
    }
    if !m.contracts.is_empty() {
        out.push('\n');
        out.push_str("FIRM CONTRACTS\n");
        let _ = writeln!(out, "{:>4} {:<6}{:<6}{:>6}{:>6}{:>10}", "SN", "FROM", "TO", "BEG", "END", "MW");
        for c in &m.contracts {
            let _ = writeln!(out, "{:>4} {:<6}{:<6}{:>6}{:>6}{:>10.2}", c.sn, c.from_area, c.to_area, c.beg_day, c.end_day, c.mw);
        }
    }
    out.push('\n');
}

/// The weekly maintenance schedule section on its own.
pub fn render_schedule(m: &SystemModel, plan: &MaintenancePlan) -> String {
    let mut out = String::new();
    section_maintenance(&mut out, m, plan);
    out
}

fn section_maintenance(out: &mut String, m: &SystemModel, plan: &MaintenancePlan) {
    rule(out, 100);
    out.push_str("WEEKLY SCHEDULE OF UNIT MAINTENANCE\n");
    rule(out, 100);
    for (a, area) in m.areas.iter().enumerate() {
        let _ = writeln!(out, "WEEKLY PEAK LOAD BEFORE MAINTENANCE SCHEDULE FOR AREA-{} (MW)", area.sn);
        week_grid(out, &plan.weekly_peaks_before[a]);
        out.push('\n');
        let _ = writeln!(out, "PLANNED MAINTENANCE SCHEDULE FOR AREA-{}  (AA automatic, PP predetermined)", area.sn);
        let _ = write!(out, "{:<8}{:>9} ", "UNIT", "CAP (MW)");
        for w in 1..=WEEKS_PER_YEAR {
            let _ = write!(out, "{}", w % 10);
        }
        out.push('\n');
        let mut any = false;
        for s in plan.units.iter().filter(|s| s.area == a && !s.outages.is_empty()) {
            any = true;
            let u = &m.units[s.unit];
            let _ = write!(out, "{:<8}{:>9.2} ", u.name, u.rated_capacity());
            for w in 1..=WEEKS_PER_YEAR as u32 {
                let cell = match s.outages.iter().find(|o| o.covers(w)) {
                    Some(o) if o.automatic => 'A',
                    Some(_) => 'P',
                    None => '.',
                };
                out.push(cell);
            }
            out.push('\n');
        }
        if !any {
            out.push_str("(no planned outages)\n");
        }
        out.push('\n');
        let _ = writeln!(out, "WEEKLY LOAD PLUS CAPACITY ON MAINTENANCE FOR AREA-{} (MW)", area.sn);
        week_grid(out, &plan.weekly_peaks_adjusted[a]);
        out.push('\n');
    }
}

fn results_row(out: &mut String, acc: &IndexAccumulator, label: &str, scope: Scope, cause: Cause, hdecimals: usize) {
    let _ = writeln!(
        out,
        "{:<8}{:<10}{:>14.hd$}{:>12.2}{:>14.2}{:>16.ld$}{:>12.2}   {}",
        label,
        "AV",
        acc.mean(scope, ReliabilityIndex::Hlole, cause),
        acc.xlol_hourly(scope, cause),
        acc.mean(scope, ReliabilityIndex::Eue, cause),
        acc.mean(scope, ReliabilityIndex::Lole, cause),
        acc.xlol_peak(scope, cause),
        cause.label(),
        hd = hdecimals,
        ld = hdecimals,
    );
}

fn section_results(out: &mut String, input: &ReportInput<'_>) {
    let acc = input.acc;
    rule(out, 100);
    let _ = writeln!(out, "FINAL RESULTS AFTER {} REPLICATIONS", acc.n_years());
    let beta = input.trace.last().and_then(|t| t.beta);
    let _ = writeln!(
        out,
        "CONVERGED: {}   BETA: {}",
        if input.converged { "YES" } else { "NO" },
        beta.map_or("UNDEFINED".to_string(), |b| format!("{b:.5}"))
    );
    rule(out, 100);
    let _ = writeln!(out, "{:<8}{:<10}{:^26}{:^14}{:^28}   {}", "AREA", "FORECAST", "HOURLY STATISTICS", "", "PEAK STATISTICS", "REMARKS");
    let _ = writeln!(
        out,
        "{:<8}{:<10}{:>14}{:>12}{:>14}{:>16}{:>12}",
        "NO", "", "HLOLE (HRS/YR)", "XLOL (MW)", "EUE (MWH)", "LOLE (DAYS/YR)", "XLOL (MW)"
    );
    for (a, area) in input.model.areas.iter().enumerate() {
        for cause in Cause::ALL {
            results_row(out, acc, &area.sn.to_string(), Scope::Area(a), cause, 2);
        }
    }
    out.push_str("POOL STATISTICS\n");
    for cause in Cause::ALL {
        results_row(out, acc, "", Scope::Pool, cause, 3);
    }
    out.push('\n');
}

fn distribution_table(out: &mut String, title: &str, d: &AreaDistribution, n: usize) {
    let _ = writeln!(out, "PROBABILITY DISTRIBUTIONS FOR {title}");
    let _ = writeln!(
        out,
        "{:<8}{:^26}{:^26}{:^28}",
        "NUMBER", "DAILY PEAK LOLES PER YEAR", "HOURLY LOLES PER YEAR", "ANNUAL UNSERVED ENERGY (MWH)"
    );
    let _ = writeln!(
        out,
        "{:<8}{:>14}{:>12}{:>14}{:>12}{:>14}{:>14}",
        "", "OBSERVATIONS", "PROBABILITY", "OBSERVATIONS", "PROBABILITY", "LIMIT (MWH)", "PROBABILITY"
    );
    let (pd, ph, pe) = (d.loss_days.probabilities(n), d.loss_hours.probabilities(n), d.energy.probabilities(n));
    for k in 0..d.loss_days.counts.len() {
        let _ = writeln!(
            out,
            "{:<8}{:>14}{:>12.3}{:>14}{:>12.3}{:>14.0}{:>14.4}",
            k,
            format!("{}.", d.loss_days.counts[k]),
            pd[k],
            format!("{}.", d.loss_hours.counts[k]),
            ph[k],
            d.energy.limits_mwh[k],
            pe[k]
        );
    }
    out.push('\n');
}

fn section_distributions(out: &mut String, input: &ReportInput<'_>) {
    rule(out, 100);
    out.push_str("PROBABILITY DISTRIBUTIONS OF RELIABILITY INDICES\n");
    rule(out, 100);
    for d in &input.dist.areas {
        let title = match d.scope {
            Scope::Area(a) => format!("AREA {}", input.model.areas[a].sn),
            Scope::Pool => "POOL".to_string(),
        };
        distribution_table(out, &title, d, input.dist.n_years);
    }
}

fn render_txt(input: &ReportInput<'_>) -> String {
    let mut out = String::new();
    section_system(&mut out, input);
    section_maintenance(&mut out, input.model, input.plan);
    section_results(&mut out, input);
    section_distributions(&mut out, input);
    out
}

fn render_csv(input: &ReportInput<'_>) -> Vec<ReportFile> {
    let (m, plan, acc) = (input.model, input.plan, input.acc);
    let mut files = Vec::new();

    let mut fr = String::from("scope,cause,hlole_h_per_yr,xlol_hourly_mw,eue_mwh_per_yr,lole_days_per_yr,xlol_peak_mw,years\n");
    let scopes = (0..m.areas.len()).map(Scope::Area).chain(std::iter::once(Scope::Pool));
    for scope in scopes {
        let label = match scope {
            Scope::Area(a) => m.areas[a].sn.to_string(),
            Scope::Pool => "POOL".to_string(),
        };
        for cause in Cause::ALL {
            let _ = writeln!(
                fr,
                "{label},{},{},{},{},{},{},{}",
                cause.label(),
                acc.mean(scope, ReliabilityIndex::Hlole, cause),
                acc.xlol_hourly(scope, cause),
                acc.mean(scope, ReliabilityIndex::Eue, cause),
                acc.mean(scope, ReliabilityIndex::Lole, cause),
                acc.xlol_peak(scope, cause),
                acc.n_years()
            );
        }
    }
    files.push(("tables/final_results.csv".to_string(), fr));

    for d in &input.dist.areas {
        let name = match d.scope {
            Scope::Area(a) => format!("tables/dist_area_{}.csv", a + 1),
            Scope::Pool => "tables/dist_pool.csv".to_string(),
        };
        let n = input.dist.n_years;
        let (pd, ph, pe) = (d.loss_days.probabilities(n), d.loss_hours.probabilities(n), d.energy.probabilities(n));
        let mut s = String::from("number,peak_days_obs,peak_days_prob,loss_hours_obs,loss_hours_prob,eue_limit_mwh,eue_prob\n");
        for k in 0..d.loss_days.counts.len() {
            let _ = writeln!(
                s,
                "{k},{},{},{},{},{},{}",
                d.loss_days.counts[k], pd[k], d.loss_hours.counts[k], ph[k], d.energy.limits_mwh[k], pe[k]
            );
        }
        files.push((name, s));
    }

    for (a, _) in m.areas.iter().enumerate() {
        let mut s = String::from("unit,cap_mw,effective_cap_mw,start_week,duration_weeks,automatic\n");
        for us in plan.units.iter().filter(|u| u.area == a) {
            for o in &us.outages {
                let u = &m.units[us.unit];
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    u.name,
                    u.rated_capacity(),
                    us.effective_capacity,
                    o.start_week,
                    o.duration_weeks,
                    u8::from(o.automatic)
                );
            }
        }
        files.push((format!("tables/maintenance_area_{}.csv", a + 1), s));

        let mut w = String::from("week,peak_before_mw,peak_adjusted_mw\n");
        for k in 0..WEEKS_PER_YEAR {
            let _ = writeln!(w, "{},{},{}", k + 1, plan.weekly_peaks_before[a][k], plan.weekly_peaks_adjusted[a][k]);
        }
        files.push((format!("tables/weekly_load_area_{}.csv", a + 1), w));
    }

    let mut t = String::from("year,running_mean,beta\n");
    for p in input.trace {
        let _ = writeln!(t, "{},{},{}", p.year, p.mean, p.beta.map_or(String::new(), |b| b.to_string()));
    }
    files.push(("tables/convergence_trace.csv".to_string(), t));
    files
}

/// Summary values read back from a `final_results.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalResultRow {
    pub scope: String,
    pub cause: String,
    pub values: [f64; 5],
}

/// Parse `final_results.csv` contents.
pub fn parse_final_results(text: &str) -> Result<Vec<FinalResultRow>, String> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 8 {
                return Err(format!("row {}: expected 8 fields", i + 2));
            }
            let mut values = [0.0; 5];
            for (k, v) in values.iter_mut().enumerate() {
                *v = f[k + 2].parse().map_err(|_| format!("row {}: bad number '{}'", i + 2, f[k + 2]))?;
            }
            Ok(FinalResultRow { scope: f[0].to_string(), cause: f[1].to_string(), values })
        })
        .collect()
}
