//! Preventive maintenance scheduling.
//!
//! Planned outages are placed so as to levelize each area's reserve: every
//! unit is weighted by its effective capacity, derived from the slope of the
//! area's capacity outage probability table, and outages are placed one by one
//! in the weeks where load plus capacity already on maintenance is lowest.

mod copt;

use thiserror::Error;

pub use copt::{build_copt, effective_capacity, fit_slope_m, Copt, CoptEntry};

use crate::card_io::{SchedulingMode, SimConfig, SystemModel, WeekRange};
use crate::WEEKS_PER_YEAR;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MaintenanceError {
    #[error("area {0} has no generating units")]
    EmptyArea(usize),
    #[error("cannot fit the COPT slope: {0}")]
    DegenerateFit(String),
    #[error("effective capacity undefined for C={c_mw}, FOR={for_rate}, M={m}")]
    NonpositiveR { c_mw: f64, for_rate: f64, m: f64 },
    #[error("predetermined outage of unit {0} violates its area's outage window or forbidden period")]
    InfeasiblePredetermined(String),
    #[error("no feasible outage window for unit {0}")]
    NoFeasibleWindow(String),
}

/// Tunables for the scheduler.
#[derive(Clone, Debug)]
pub struct MaintenanceOptions {
    /// COPT capacity step in MW.
    pub resolution_mw: f64,
    /// Slope fit range as fractions of the area's installed capacity.
    pub fit_range: (f64, f64),
    /// Season whose capacities define the COPT.
    pub season: usize,
}

impl Default for MaintenanceOptions {
    fn default() -> Self {
        MaintenanceOptions { resolution_mw: 1.0, fit_range: (0.05, 0.5), season: 0 }
    }
}

/// One planned outage placed on the calendar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduledOutage {
    pub start_week: u32,
    pub duration_weeks: u32,
    /// Placed by the scheduler rather than copied from the card.
    pub automatic: bool,
}

impl ScheduledOutage {
    pub fn end_week(&self) -> u32 {
        self.start_week + self.duration_weeks - 1
    }

    pub fn covers(&self, week: u32) -> bool {
        self.start_week <= week && week <= self.end_week()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitSchedule {
    pub unit: usize,
    pub area: usize,
    pub effective_capacity: f64,
    pub outages: Vec<ScheduledOutage>,
}

/// Outage assignments plus the weekly load curves they produce.
#[derive(Clone, Debug, PartialEq)]
pub struct MaintenancePlan {
    /// One entry per unit of the model, in model order.
    pub units: Vec<UnitSchedule>,
    pub weekly_peaks_before: Vec<[f64; WEEKS_PER_YEAR]>,
    /// Weekly peak plus effective capacity on planned outage.
    pub weekly_peaks_adjusted: Vec<[f64; WEEKS_PER_YEAR]>,
    pub slope_m: Vec<f64>,
}

impl MaintenancePlan {
    /// Plan with no outages at all.
    pub fn empty(model: &SystemModel) -> Self {
        let before: Vec<_> = (0..model.areas.len()).map(|a| model.weekly_peaks(a)).collect();
        let units = model
            .units
            .iter()
            .enumerate()
            .map(|(i, u)| UnitSchedule {
                unit: i,
                area: model.area_index(&u.location).unwrap_or(0),
                effective_capacity: u.rated_capacity(),
                outages: Vec::new(),
            })
            .collect();
        MaintenancePlan {
            units,
            weekly_peaks_adjusted: before.clone(),
            weekly_peaks_before: before,
            slope_m: vec![0.0; model.areas.len()],
        }
    }

    /// Whether a unit is on planned outage during a 1-based week.
    pub fn on_outage(&self, unit: usize, week: u32) -> bool {
        self.units[unit].outages.iter().any(|o| o.covers(week))
    }

    /// Highest adjusted weekly load of an area.
    pub fn peak_adjusted(&self, area: usize) -> f64 {
        self.weekly_peaks_adjusted[area].iter().copied().fold(f64::MIN, f64::max)
    }
}

/// Recompute the adjusted weekly load from a plan's assignments.
pub fn adjusted_weekly_load(plan: &MaintenancePlan) -> Vec<[f64; WEEKS_PER_YEAR]> {
    let mut curves = plan.weekly_peaks_before.clone();
    for u in &plan.units {
        for o in &u.outages {
            for w in o.start_week..=o.end_week() {
                curves[u.area][w as usize - 1] += u.effective_capacity;
            }
        }
    }
    curves
}

/// Slope parameter M of every area, by least squares over the configured
/// fraction of installed capacity. Falls back to the whole table when the
/// range holds fewer than two points, and to the installed capacity when even
/// that is degenerate (only possible when every unit is perfectly reliable,
/// in which case M has no effect).
pub fn slope_per_area(model: &SystemModel, opts: &MaintenanceOptions) -> Vec<f64> {
    (0..model.areas.len())
        .map(|a| {
            let units: Vec<_> = model.units_in_area(a).map(|i| &model.units[i]).collect();
            let installed: f64 = units.iter().map(|u| u.cap_by_season[opts.season]).sum();
            let Ok(copt) = build_copt(units.iter().copied(), a, opts.season, opts.resolution_mw) else {
                return 1.0;
            };
            let range = (opts.fit_range.0 * installed, opts.fit_range.1 * installed);
            fit_slope_m(&copt, range)
                .or_else(|_| fit_slope_m(&copt, (0.0, installed)))
                .unwrap_or(installed.max(1.0))
        })
        .collect()
}

fn unit_ec(model: &SystemModel, unit: usize, m_per_area: &[f64]) -> Result<f64, MaintenanceError> {
    let u = &model.units[unit];
    let area = model.area_index(&u.location).unwrap_or(0);
    effective_capacity(u.rated_capacity(), u.for_rate, m_per_area[area])
}

/// A plant and its units in scheduling order.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantRank {
    pub plant: String,
    /// Sum over the plant's units of effective capacity × outage weeks.
    pub score: f64,
    pub units: Vec<usize>,
}

/// Order plants by Σ EC × outage weeks (largest first), and units within a
/// plant by rated capacity × outage weeks. Ties go to the lower serial number.
/// Only automatic units that request at least one outage week take part.
pub fn rank_for_scheduling(model: &SystemModel, m_per_area: &[f64]) -> Result<Vec<PlantRank>, MaintenanceError> {
    let mut plants: Vec<PlantRank> = Vec::new();
    for (i, u) in model.units.iter().enumerate() {
        if u.scheduling != SchedulingMode::Automatic || u.total_outage_weeks() == 0 {
            continue;
        }
        let product = unit_ec(model, i, m_per_area)? * u.total_outage_weeks() as f64;
        match plants.iter_mut().find(|p| p.plant == u.plant_id()) {
            Some(p) => {
                p.score += product;
                p.units.push(i);
            }
            None => plants.push(PlantRank { plant: u.plant_id().to_string(), score: product, units: vec![i] }),
        }
    }
    let min_sn = |p: &PlantRank| p.units.iter().map(|&i| model.units[i].sn).min().unwrap_or(0);
    for p in &mut plants {
        p.units.sort_by(|&a, &b| {
            let (ua, ub) = (&model.units[a], &model.units[b]);
            let ka = ua.rated_capacity() * ua.total_outage_weeks() as f64;
            let kb = ub.rated_capacity() * ub.total_outage_weeks() as f64;
            kb.total_cmp(&ka).then(ua.sn.cmp(&ub.sn))
        });
    }
    plants.sort_by(|a, b| b.score.total_cmp(&a.score).then(min_sn(a).cmp(&min_sn(b))));
    Ok(plants)
}

fn forbidden(area_fp: Option<WeekRange>, week: u32) -> bool {
    area_fp.is_some_and(|fp| fp.contains(week))
}

/// Start weeks at which an outage of `duration` fits the window, avoids the
/// forbidden period and does not overlap `taken`.
pub fn feasible_starts(
    window: WeekRange,
    forbidden_period: Option<WeekRange>,
    duration: u32,
    taken: &[ScheduledOutage],
) -> Vec<u32> {
    if duration == 0 || duration > window.end.saturating_sub(window.beg) + 1 {
        return Vec::new();
    }
    (window.beg..=window.end + 1 - duration)
        .filter(|&s| {
            (s..s + duration).all(|w| !forbidden(forbidden_period, w) && !taken.iter().any(|o| o.covers(w)))
        })
        .collect()
}

/// Place every planned outage. Predetermined outages are copied first; then
/// the first outages of automatic units are placed in rank order, then their
/// second outages. Each placement picks the start week minimizing the largest
/// adjusted load over the outage's weeks, earliest week on ties.
pub fn schedule_outages(
    model: &SystemModel,
    m_per_area: &[f64],
    weekly_peaks: &[[f64; WEEKS_PER_YEAR]],
) -> Result<MaintenancePlan, MaintenanceError> {
    let mut plan = MaintenancePlan::empty(model);
    plan.weekly_peaks_before = weekly_peaks.to_vec();
    plan.slope_m = m_per_area.to_vec();
    let mut adjusted = weekly_peaks.to_vec();
    for i in 0..model.units.len() {
        plan.units[i].effective_capacity = unit_ec(model, i, m_per_area)?;
    }

    for (i, u) in model.units.iter().enumerate() {
        if u.scheduling != SchedulingMode::Predetermined {
            continue;
        }
        let sched = &mut plan.units[i];
        let area = &model.areas[sched.area];
        for o in u.outages.iter().filter(|o| o.duration_weeks > 0) {
            let placed = ScheduledOutage { start_week: o.beg_week, duration_weeks: o.duration_weeks, automatic: false };
            let ok = o.beg_week >= 1
                && area.outage_window.contains_range(&WeekRange::new(placed.start_week, placed.end_week()))
                && (placed.start_week..=placed.end_week()).all(|w| !forbidden(area.forbidden_period, w))
                && !sched.outages.iter().any(|p| (placed.start_week..=placed.end_week()).any(|w| p.covers(w)));
            if !ok {
                return Err(MaintenanceError::InfeasiblePredetermined(u.name.clone()));
            }
            for w in placed.start_week..=placed.end_week() {
                adjusted[sched.area][w as usize - 1] += sched.effective_capacity;
            }
            sched.outages.push(placed);
        }
    }

    let ranking = rank_for_scheduling(model, m_per_area)?;
    for pass in 0..2 {
        for plant in &ranking {
            for &i in &plant.units {
                let u = &model.units[i];
                let duration = u.outages[pass].duration_weeks;
                if duration == 0 {
                    continue;
                }
                let sched = &mut plan.units[i];
                let area = &model.areas[sched.area];
                let starts = feasible_starts(area.outage_window, area.forbidden_period, duration, &sched.outages);
                let curve = &adjusted[sched.area];
                let window_max =
                    |s: u32| (s..s + duration).map(|w| curve[w as usize - 1]).fold(f64::MIN, f64::max);
                let mut best: Option<(u32, f64)> = None;
                for s in starts {
                    let v = window_max(s);
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((s, v));
                    }
                }
                let (start, _) = best.ok_or_else(|| MaintenanceError::NoFeasibleWindow(u.name.clone()))?;
                for w in start..start + duration {
                    adjusted[sched.area][w as usize - 1] += sched.effective_capacity;
                }
                sched.outages.push(ScheduledOutage { start_week: start, duration_weeks: duration, automatic: true });
            }
        }
    }
    for s in &mut plan.units {
        s.outages.sort_by_key(|o| o.start_week);
    }
    plan.weekly_peaks_adjusted = adjusted;
    Ok(plan)
}

/// Reference plan putting every automatic outage at its first feasible week.
pub fn naive_plan(model: &SystemModel, m_per_area: &[f64]) -> Result<MaintenancePlan, MaintenanceError> {
    let mut plan = schedule_outages(model, m_per_area, &(0..model.areas.len()).map(|a| model.weekly_peaks(a)).collect::<Vec<_>>())?;
    for (i, u) in model.units.iter().enumerate() {
        if u.scheduling != SchedulingMode::Automatic {
            continue;
        }
        let sched = &mut plan.units[i];
        let area = &model.areas[sched.area];
        sched.outages.retain(|o| !o.automatic);
        for o in u.outages.iter().filter(|o| o.duration_weeks > 0) {
            let start = feasible_starts(area.outage_window, area.forbidden_period, o.duration_weeks, &sched.outages)
                .first()
                .copied()
                .ok_or_else(|| MaintenanceError::NoFeasibleWindow(u.name.clone()))?;
            sched.outages.push(ScheduledOutage { start_week: start, duration_weeks: o.duration_weeks, automatic: true });
        }
    }
    plan.weekly_peaks_adjusted = adjusted_weekly_load(&plan);
    Ok(plan)
}

/// Full maintenance step for a deck: slopes, weekly peaks, ranking, placement.
pub fn schedule_maintenance(
    model: &SystemModel,
    _config: &SimConfig,
    opts: &MaintenanceOptions,
) -> Result<MaintenancePlan, MaintenanceError> {
    let m = slope_per_area(model, opts);
    let peaks: Vec<_> = (0..model.areas.len()).map(|a| model.weekly_peaks(a)).collect();
    schedule_outages(model, &m, &peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_io::{Area, GenUnit, PlannedOutage};

    fn area(window: (u32, u32), forbidden: Option<(u32, u32)>) -> Area {
        Area {
            sn: 1,
            name: "A1".into(),
            peak_mw: 1000.0,
            lfu_pct: 0.0,
            outage_window: WeekRange::new(window.0, window.1),
            forbidden_period: forbidden.map(|(a, b)| WeekRange::new(a, b)),
            sum_flows_limit: 1e6,
        }
    }

    fn unit(sn: u32, name: &str, cap: f64, mode: SchedulingMode, o1: (u32, u32), o2: (u32, u32)) -> GenUnit {
        GenUnit {
            sn,
            name: name.into(),
            location: "A1".into(),
            cap_by_season: [cap; 4],
            dfor: 0.0,
            for_rate: 0.05,
            der_pct: 0.0,
            scheduling: mode,
            outages: [
                PlannedOutage { beg_week: o1.0, duration_weeks: o1.1 },
                PlannedOutage { beg_week: o2.0, duration_weeks: o2.1 },
            ],
            mean_down_time_h: None,
        }
    }

    fn model(areas: Vec<Area>, units: Vec<GenUnit>) -> SystemModel {
        SystemModel { areas, units, lines: vec![], contracts: vec![], ownerships: vec![], load_card: None }
    }

    #[test]
    fn unique_minimum_is_chosen() {
        let m = model(vec![area((1, 52), None)], vec![unit(1, "P00101", 100.0, SchedulingMode::Automatic, (0, 2), (0, 0))]);
        let mut flat = [900.0; 52];
        flat[44] = 500.0;
        flat[45] = 500.0;
        let plan = schedule_outages(&m, &[50.0], &[flat]).unwrap();
        assert_eq!(plan.units[0].outages, vec![ScheduledOutage { start_week: 45, duration_weeks: 2, automatic: true }]);
    }

    #[test]
    fn forbidden_period_splits_window() {
        let m = model(vec![area((1, 4), Some((2, 2)))], vec![unit(1, "P00101", 100.0, SchedulingMode::Automatic, (0, 3), (0, 0))]);
        assert_eq!(feasible_starts(WeekRange::new(1, 4), Some(WeekRange::new(2, 2)), 3, &[]), Vec::<u32>::new());
        assert_eq!(
            schedule_outages(&m, &[50.0], &[[1.0; 52]]).unwrap_err(),
            MaintenanceError::NoFeasibleWindow("P00101".into())
        );
    }

    #[test]
    fn predetermined_kept_verbatim() {
        let m = model(
            vec![area((1, 52), Some((31, 32)))],
            vec![unit(1, "P00101", 100.0, SchedulingMode::Predetermined, (10, 2), (40, 1))],
        );
        let plan = schedule_outages(&m, &[50.0], &[[1.0; 52]]).unwrap();
        let starts: Vec<_> = plan.units[0].outages.iter().map(|o| (o.start_week, o.duration_weeks, o.automatic)).collect();
        assert_eq!(starts, [(10, 2, false), (40, 1, false)]);
        let ec = plan.units[0].effective_capacity;
        assert_eq!(plan.weekly_peaks_adjusted[0][9], 1.0 + ec);
        assert_eq!(plan.weekly_peaks_adjusted[0][10], 1.0 + ec);
        assert_eq!(plan.weekly_peaks_adjusted[0][11], 1.0);

        let bad = model(
            vec![area((1, 52), Some((31, 32)))],
            vec![unit(1, "P00101", 100.0, SchedulingMode::Predetermined, (30, 2), (0, 0))],
        );
        assert_eq!(
            schedule_outages(&bad, &[50.0], &[[1.0; 52]]).unwrap_err(),
            MaintenanceError::InfeasiblePredetermined("P00101".into())
        );
    }

    #[test]
    fn ranking_orders_plants_and_units() {
        let units = vec![
            unit(1, "A10101", 12.0, SchedulingMode::Automatic, (0, 2), (0, 0)),
            unit(2, "A13201", 400.0, SchedulingMode::Automatic, (0, 2), (0, 0)),
            unit(3, "A13202", 12.0, SchedulingMode::Automatic, (0, 2), (0, 0)),
            unit(4, "A15501", 50.0, SchedulingMode::Automatic, (0, 1), (0, 1)),
            unit(5, "A15502", 50.0, SchedulingMode::Automatic, (0, 2), (0, 0)),
            unit(6, "A17701", 80.0, SchedulingMode::Automatic, (0, 0), (0, 0)),
        ];
        let m = model(vec![area((1, 52), None)], units);
        let ranks = rank_for_scheduling(&m, &[60.0]).unwrap();
        let plants: Vec<_> = ranks.iter().map(|p| p.plant.as_str()).collect();
        assert_eq!(plants, ["A132", "A155", "A101"]);
        assert_eq!(ranks[0].units, [1, 2]);
        // equal products: lower serial first
        assert_eq!(ranks[1].units, [3, 4]);
    }

    #[test]
    fn two_outages_never_overlap() {
        let m = model(vec![area((1, 6), None)], vec![unit(1, "P00101", 100.0, SchedulingMode::Automatic, (0, 3), (0, 3))]);
        let plan = schedule_outages(&m, &[50.0], &[[1.0; 52]]).unwrap();
        let o = &plan.units[0].outages;
        assert_eq!((o[0].start_week, o[1].start_week), (1, 4));
    }

    #[test]
    fn adjusted_load_is_additive() {
        let m = model(vec![area((1, 52), None)], vec![unit(1, "P00101", 100.0, SchedulingMode::Predetermined, (10, 2), (0, 0))]);
        let plan = schedule_outages(&m, &[50.0], &[[700.0; 52]]).unwrap();
        let ec = plan.units[0].effective_capacity;
        let curve = adjusted_weekly_load(&plan);
        assert_eq!(curve, plan.weekly_peaks_adjusted);
        assert!((curve[0][9] - 700.0 - ec).abs() < 1e-9);
        assert!((curve[0][10] - 700.0 - ec).abs() < 1e-9);
        let empty = MaintenancePlan::empty(&m);
        assert_eq!(adjusted_weekly_load(&empty), empty.weekly_peaks_before);
    }
}
