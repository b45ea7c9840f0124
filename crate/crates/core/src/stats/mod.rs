//! Reliability index accumulation, distributions and report rendering.

mod accumulator;
mod distribution;
mod report;

pub use accumulator::{beta, record_hour, Cause, CauseTally, IndexAccumulator, RunningMoments, Scope, YearSample};
pub use distribution::{
    bin_distributions, energy_bin_width, AreaDistribution, CountHistogram, DistributionTable, EnergyHistogram,
    DEFAULT_BINS, EUE_BIN_STEP_MWH,
};
pub use report::{parse_final_results, render_report, render_schedule, FinalResultRow, ReportFile, ReportFormat, ReportInput, Setting};

/// Running state of the convergence index after a year.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    /// Number of completed years.
    pub year: usize,
    pub mean: f64,
    pub beta: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_io::Deck;
    use crate::dispatch::CauseSplit;
    use crate::maintenance::MaintenancePlan;

    fn sample_run(years: usize) -> (Deck, IndexAccumulator) {
        let deck = Deck::five_area();
        let mut acc = IndexAccumulator::new(5);
        for y in 0..years {
            let mut s = YearSample::new(y, 5);
            for h in 0..(y % 3) {
                let mut split = CauseSplit::zero(5);
                split.gc_mw[0] = 10.0 * h as f64;
                split.tc_mw[0] = 7.5;
                split.gt_mw[0] = split.gc_mw[0] + 7.5;
                split.tc_mw[2] = 20.0;
                split.gt_mw[2] = 20.0;
                record_hour(&mut s, &split, &[h == 0; 5], h == 0);
            }
            acc.finalize_year(s);
        }
        (deck, acc)
    }

    fn render(deck: &Deck, acc: &IndexAccumulator, format: ReportFormat) -> Vec<ReportFile> {
        let plan = MaintenancePlan::empty(&deck.model);
        let dist = bin_distributions(acc, DEFAULT_BINS);
        let trace = [TracePoint { year: acc.n_years(), mean: 1.0, beta: Some(0.1) }];
        let input = ReportInput {
            model: &deck.model,
            config: &deck.config,
            plan: &plan,
            acc,
            dist: &dist,
            trace: &trace,
            converged: false,
            settings: &[],
        };
        render_report(&input, format)
    }

    #[test]
    fn txt_header_and_pool_order() {
        let (deck, acc) = sample_run(12);
        let files = render(&deck, &acc, ReportFormat::Txt);
        let txt = &files[0].1;
        assert!(txt.contains("FINAL RESULTS AFTER 12 REPLICATIONS"));
        let pool = &txt[txt.find("POOL STATISTICS").unwrap()..];
        let remarks: Vec<&str> = pool.lines().skip(1).take(3).map(|l| l.split_whitespace().last().unwrap()).collect();
        assert_eq!(remarks, ["GC", "TC", "GT"]);
        assert_eq!(txt.matches("PROBABILITY DISTRIBUTIONS FOR").count(), 6);
    }

    #[test]
    fn csv_reproduces_summary_values() {
        let (deck, acc) = sample_run(17);
        let files = render(&deck, &acc, ReportFormat::Csv);
        let fr = &files.iter().find(|f| f.0 == "tables/final_results.csv").unwrap().1;
        let rows = parse_final_results(fr).unwrap();
        assert_eq!(rows.len(), 18);
        let r = rows.iter().find(|r| r.scope == "1" && r.cause == "GT").unwrap();
        use crate::card_io::ReliabilityIndex as I;
        assert_eq!(r.values[0], acc.mean(Scope::Area(0), I::Hlole, Cause::Gt));
        assert_eq!(r.values[1], acc.xlol_hourly(Scope::Area(0), Cause::Gt));
        assert_eq!(r.values[2], acc.mean(Scope::Area(0), I::Eue, Cause::Gt));
        assert_eq!(r.values[4], acc.xlol_peak(Scope::Area(0), Cause::Gt));
        for name in ["dist_area_1", "dist_pool", "maintenance_area_5", "weekly_load_area_3", "convergence_trace"] {
            assert!(files.iter().any(|f| f.0 == format!("tables/{name}.csv")), "{name}");
        }
    }

    #[test]
    fn additivity_and_conservation() {
        let (_, acc) = sample_run(30);
        use crate::card_io::ReliabilityIndex as I;
        for y in &acc.years {
            for scope in [Scope::Area(0), Scope::Area(2), Scope::Pool] {
                for idx in [I::Hlole, I::Lole, I::Eue] {
                    let (gc, tc, gt) = (y.value(scope, idx, Cause::Gc), y.value(scope, idx, Cause::Tc), y.value(scope, idx, Cause::Gt));
                    assert_eq!(gc + tc, gt);
                }
            }
        }
        let dist = bin_distributions(&acc, DEFAULT_BINS);
        for d in &dist.areas {
            for counts in [&d.loss_days.counts, &d.loss_hours.counts, &d.energy.counts] {
                assert_eq!(counts.iter().sum::<u64>(), 30);
            }
            assert!((d.energy.probabilities(30).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let pool_eue = acc.mean(Scope::Pool, I::Eue, Cause::Gt);
        for a in 0..5 {
            assert!(pool_eue >= acc.mean(Scope::Area(a), I::Eue, Cause::Gt));
        }
    }
}
