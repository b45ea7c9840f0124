use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use super::components::{
    dwell_hours, sample_line_transition, sample_unit_transition, LineChain, UnitChain, UnitState,
};
use super::events::{Event, EventList, EventType};
use crate::card_io::{CollectionFrequency, SimConfig, SystemModel};
use crate::dispatch::{
    classify_causes, solve_min_shed, solve_min_shed_unscreened, CaseBuilder, CauseSplit, ComponentSnapshot,
    DispatchError, NetworkCase, ShedSolution, SolveOptions, SolveStatus,
};
use crate::maintenance::MaintenancePlan;
use crate::stats::{record_hour, Cause, IndexAccumulator, RunningMoments, Scope, TracePoint, YearSample};
use crate::{DAYS_PER_YEAR, HOURS_PER_WEEK, HOURS_PER_YEAR};

/// Years required before the convergence statistic is trusted.
pub const MIN_YEARS_FOR_CONVERGENCE: usize = 20;

/// Engine settings that are not on the cards.
#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    /// Mean down time of units whose card gives none, in hours.
    pub mean_down_time_h: f64,
    /// Mean dwell of every line state, in hours.
    pub line_dwell_h: f64,
    /// Years simulated concurrently.
    pub parallel: usize,
    /// Fraction of screened hours re-checked with a full solve.
    pub audit_fraction: f64,
    pub solve: SolveOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            mean_down_time_h: 48.0,
            line_dwell_h: 24.0,
            parallel: 1,
            audit_fraction: if cfg!(debug_assertions) { 0.01 } else { 0.0 },
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("event list exhausted or corrupt at clock {clock}")]
    CorruptEventList { clock: u64 },
    #[error("event at hour {event} precedes clock {clock}")]
    ClockSkew { event: u64, clock: u64 },
    #[error("dispatch failed: {0}")]
    Dispatch(#[from] DispatchError),
    #[error("year {year} hour {hour}: screened hour sheds {shed_mw} MW when solved")]
    ScreenAudit { year: usize, hour: usize, shed_mw: f64 },
    #[error("invalid simulation setup: {0}")]
    InvalidConfig(String),
}

/// What an observer sees of one evaluated hour.
pub struct HourRecord<'a> {
    pub year: usize,
    /// 0-based hour of the year.
    pub hour: usize,
    pub unit_states: &'a [UnitState],
    pub line_states: &'a [usize],
    /// Area demand before transfers.
    pub demand_mw: &'a [f64],
    /// `None` when the hour passed the adequacy screen.
    pub case: Option<&'a NetworkCase>,
    pub solution: Option<&'a ShedSolution>,
    pub split: &'a CauseSplit,
}

/// Optional callbacks. An observer forces one year at a time.
#[derive(Default)]
pub struct Hooks<'a> {
    pub observer: Option<&'a mut dyn FnMut(&HourRecord<'_>)>,
    pub progress: Option<&'a mut dyn FnMut(&TracePoint)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunCounters {
    pub lp_calls: u64,
    pub screened_hours: u64,
    pub audited_hours: u64,
}

impl RunCounters {
    fn add(&mut self, o: &RunCounters) {
        self.lp_calls += o.lp_calls;
        self.screened_hours += o.screened_hours;
        self.audited_hours += o.audited_hours;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub acc: IndexAccumulator,
    /// Convergence statistic after every year.
    pub trace: Vec<TracePoint>,
    pub converged: bool,
    pub counters: RunCounters,
}

impl SimResult {
    pub fn years(&self) -> usize {
        self.acc.n_years()
    }

    pub fn final_beta(&self) -> Option<f64> {
        self.trace.last().and_then(|t| t.beta)
    }
}

type Observer<'o> = dyn FnMut(&HourRecord<'_>) + 'o;

fn reborrow<'s>(o: &'s mut Option<&mut Observer<'_>>) -> Option<&'s mut Observer<'s>> {
    match o {
        Some(f) => Some(&mut **f),
        None => None,
    }
}

/// Everything that stays fixed across replication years.
struct Context<'a> {
    model: &'a SystemModel,
    config: &'a SimConfig,
    opts: SimOptions,
    builder: CaseBuilder,
    unit_chains: Vec<UnitChain>,
    line_chains: Vec<LineChain>,
    der_frac: Vec<f64>,
    /// Demand at unit forecast multiplier, per area and hour.
    shape: Vec<Vec<f64>>,
    /// Hour of the daily peak, per area and day.
    area_peak: Vec<Vec<u8>>,
    /// Planned outage weeks per unit, inclusive.
    maintenance: Vec<Vec<(u32, u32)>>,
    /// Hour offsets where seasons 2-4 start.
    season_starts: [u64; 3],
}

fn argmax_hour(day_values: impl Iterator<Item = f64>) -> u8 {
    let mut best = (0u8, f64::MIN);
    for (h, v) in day_values.enumerate() {
        if v > best.1 {
            best = (h as u8, v);
        }
    }
    best.0
}

impl<'a> Context<'a> {
    fn new(model: &'a SystemModel, config: &'a SimConfig, plan: &MaintenancePlan, opts: SimOptions) -> Self {
        let n = model.areas.len();
        let shape: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                let profile = model.profile_for(a);
                let peak = model.areas[a].peak_mw;
                (0..HOURS_PER_YEAR)
                    .map(|h| {
                        let week = (h / HOURS_PER_WEEK) as u32 + 1;
                        peak * profile.fraction_at(h, config.season_of_week(week))
                    })
                    .collect()
            })
            .collect();
        let area_peak = shape
            .iter()
            .map(|s| (0..DAYS_PER_YEAR).map(|d| argmax_hour(s[d * 24..d * 24 + 24].iter().copied())).collect())
            .collect();
        let maintenance = (0..model.units.len())
            .map(|u| plan.units[u].outages.iter().map(|o| (o.start_week, o.end_week())).collect())
            .collect();
        let w = config.season_end_weeks;
        Context {
            model,
            config,
            opts,
            builder: CaseBuilder::new(model),
            unit_chains: model.units.iter().map(|u| UnitChain::new(u, opts.mean_down_time_h)).collect(),
            line_chains: model.lines.iter().map(|l| LineChain::new(l, opts.line_dwell_h)).collect(),
            der_frac: model.units.iter().map(|u| 1.0 - u.der_pct / 100.0).collect(),
            shape,
            area_peak,
            maintenance,
            season_starts: w.map(|x| x as u64 * HOURS_PER_WEEK as u64),
        }
    }

    fn simulate_year(
        &self,
        year: usize,
        observer: Option<&mut Observer<'_>>,
    ) -> Result<(YearSample, RunCounters), SimError> {
        let start = year as u64 * HOURS_PER_YEAR as u64;
        YearRun::new(self, year).run(EventList::new(start), observer)
    }
}

/// Mutable state of one replication year.
struct YearRun<'c, 'a> {
    ctx: &'c Context<'a>,
    year: usize,
    start: u64,
    rng: ChaCha8Rng,
    audit_rng: ChaCha8Rng,
    unit_state: Vec<UnitState>,
    /// Bumped whenever a pending transition becomes void.
    generation: Vec<u32>,
    snapshot: ComponentSnapshot,
    /// (time, component, generation); units first, then lines.
    pending: BinaryHeap<Reverse<(u64, u32, u32)>>,
    season: usize,
    lfu: Vec<f64>,
    pool_peak: Vec<u8>,
    demand: Vec<f64>,
    gen_buf: Vec<f64>,
    dem_buf: Vec<f64>,
    sample: YearSample,
    counters: RunCounters,
}

impl<'c, 'a> YearRun<'c, 'a> {
    fn new(ctx: &'c Context<'a>, year: usize) -> Self {
        let n = ctx.model.areas.len();
        let n_units = ctx.model.units.len();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
        rng.set_stream(year as u64);
        let mut audit_rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
        audit_rng.set_stream(year as u64 | 1 << 63);
        YearRun {
            ctx,
            year,
            start: year as u64 * HOURS_PER_YEAR as u64,
            rng,
            audit_rng,
            unit_state: vec![UnitState::Up; n_units],
            generation: vec![0; n_units + ctx.model.lines.len()],
            snapshot: ComponentSnapshot {
                unit_available_mw: vec![0.0; n_units],
                line_state: vec![0; ctx.model.lines.len()],
            },
            pending: BinaryHeap::new(),
            season: 0,
            lfu: vec![1.0; n],
            pool_peak: vec![0; DAYS_PER_YEAR],
            demand: vec![0.0; n],
            gen_buf: vec![0.0; n],
            dem_buf: vec![0.0; n],
            sample: YearSample::new(year, n),
            counters: RunCounters::default(),
        }
    }

    fn run(
        mut self,
        mut list: EventList,
        mut observer: Option<&mut Observer<'_>>,
    ) -> Result<(YearSample, RunCounters), SimError> {
        let end = self.start + HOURS_PER_YEAR as u64;
        loop {
            let Some(ev) = list.fetch() else {
                return Err(SimError::CorruptEventList { clock: list.clock() });
            };
            if ev.time < list.clock() {
                return Err(SimError::ClockSkew { event: ev.time, clock: list.clock() });
            }
            list.set_clock(ev.time);
            if ev.time >= end {
                if ev.event_type == EventType::Year && ev.time == end {
                    return Ok((self.sample, self.counters));
                }
                return Err(SimError::CorruptEventList { clock: ev.time });
            }
            let offset = ev.time - self.start;
            match ev.event_type {
                EventType::Year => {
                    self.handle_year();
                    list.insert(Event { time: end, event_type: EventType::Year });
                }
                EventType::Quarter => {
                    self.handle_quarter(offset);
                    if let Some(&next) = self.ctx.season_starts.iter().find(|&&s| s > offset && s < HOURS_PER_YEAR as u64) {
                        list.insert(Event { time: self.start + next, event_type: EventType::Quarter });
                    }
                }
                EventType::Week => {
                    self.handle_week(offset);
                    if offset + (HOURS_PER_WEEK as u64) < HOURS_PER_YEAR as u64 {
                        list.insert(Event { time: ev.time + HOURS_PER_WEEK as u64, event_type: EventType::Week });
                    }
                }
                EventType::Hour => {
                    self.handle_hour(ev.time, reborrow(&mut observer))?;
                    if offset + 1 < HOURS_PER_YEAR as u64 {
                        list.insert(Event { time: ev.time + 1, event_type: EventType::Hour });
                    }
                }
            }
        }
    }

    fn available(&self, u: usize) -> f64 {
        let cap = self.ctx.model.units[u].cap_by_season[self.season];
        match self.unit_state[u] {
            UnitState::Up => cap,
            UnitState::Derated => cap * self.ctx.der_frac[u],
            UnitState::Down | UnitState::Maintenance => 0.0,
        }
    }

    fn schedule(&mut self, id: usize, at: u64, dwell: u64) {
        if dwell != u64::MAX {
            self.pending.push(Reverse((at + dwell, id as u32, self.generation[id])));
        }
    }

    /// Start of a replication: forecast multipliers, all units up, all lines
    /// in their first state, fresh dwell times.
    fn handle_year(&mut self) {
        let model = self.ctx.model;
        for (a, area) in model.areas.iter().enumerate() {
            let sigma = area.lfu_pct / 100.0;
            self.lfu[a] = if sigma > 0.0 {
                let normal = Normal::new(1.0, sigma).expect("finite sigma");
                loop {
                    let x: f64 = normal.sample(&mut self.rng);
                    if (x - 1.0).abs() <= 3.0 * sigma {
                        break x;
                    }
                }
            } else {
                1.0
            };
        }
        for d in 0..DAYS_PER_YEAR {
            let lfu = &self.lfu;
            let shape = &self.ctx.shape;
            self.pool_peak[d] =
                argmax_hour((d * 24..d * 24 + 24).map(|h| shape.iter().zip(lfu).map(|(s, m)| s[h] * m).sum::<f64>()));
        }
        self.pending.clear();
        let n_units = model.units.len();
        for u in 0..n_units {
            self.unit_state[u] = UnitState::Up;
            self.generation[u] += 1;
            let dwell = dwell_hours(&mut self.rng, self.ctx.unit_chains[u].mean_up_h);
            self.schedule(u, self.start, dwell);
        }
        for l in 0..model.lines.len() {
            self.snapshot.line_state[l] = 0;
            self.generation[n_units + l] += 1;
            if !self.ctx.line_chains[l].is_static() {
                let dwell = dwell_hours(&mut self.rng, self.ctx.line_chains[l].mean_dwell_h);
                self.schedule(n_units + l, self.start, dwell);
            }
        }
    }

    fn handle_quarter(&mut self, offset: u64) {
        let week = (offset / HOURS_PER_WEEK as u64) as u32 + 1;
        self.season = self.ctx.config.season_of_week(week);
        for u in 0..self.unit_state.len() {
            self.snapshot.unit_available_mw[u] = self.available(u);
        }
    }

    fn handle_week(&mut self, offset: u64) {
        let week = (offset / HOURS_PER_WEEK as u64) as u32 + 1;
        let now = self.start + offset;
        for u in 0..self.unit_state.len() {
            let planned = self.ctx.maintenance[u].iter().any(|&(b, e)| b <= week && week <= e);
            match (planned, self.unit_state[u] == UnitState::Maintenance) {
                (true, false) => {
                    self.unit_state[u] = UnitState::Maintenance;
                    self.generation[u] += 1;
                }
                (false, true) => {
                    self.unit_state[u] = UnitState::Up;
                    let dwell = dwell_hours(&mut self.rng, self.ctx.unit_chains[u].mean_up_h);
                    self.schedule(u, now, dwell);
                }
                _ => continue,
            }
            self.snapshot.unit_available_mw[u] = self.available(u);
        }
    }

    fn apply_transitions(&mut self, t: u64) -> Result<(), SimError> {
        let n_units = self.unit_state.len();
        while let Some(&Reverse((time, id, gen))) = self.pending.peek() {
            if time > t {
                break;
            }
            self.pending.pop();
            if time < t {
                return Err(SimError::ClockSkew { event: time, clock: t });
            }
            let id = id as usize;
            if gen != self.generation[id] {
                continue;
            }
            if id < n_units {
                let (next, dwell) = sample_unit_transition(&self.ctx.unit_chains[id], self.unit_state[id], &mut self.rng);
                self.unit_state[id] = next;
                self.snapshot.unit_available_mw[id] = self.available(id);
                self.schedule(id, t, dwell);
            } else {
                let l = id - n_units;
                let (next, dwell) = sample_line_transition(&self.ctx.line_chains[l], &mut self.rng);
                self.snapshot.line_state[l] = next;
                self.schedule(id, t, dwell);
            }
        }
        Ok(())
    }

    fn handle_hour(&mut self, t: u64, observer: Option<&mut Observer<'_>>) -> Result<(), SimError> {
        self.apply_transitions(t)?;
        let h = (t - self.start) as usize;
        let (day0, hod) = (h / 24, (h % 24) as u8);
        let pool_peak = self.pool_peak[day0] == hod;
        let ctx = self.ctx;
        let peak_area: Vec<bool> = ctx.area_peak.iter().map(|p| p[day0] == hod).collect();
        if ctx.config.collection_frequency == CollectionFrequency::DailyPeak && !pool_peak && !peak_area.contains(&true) {
            return Ok(());
        }
        for (a, d) in self.demand.iter_mut().enumerate() {
            *d = ctx.shape[a][h] * self.lfu[a];
        }
        let day = day0 as u32 + 1;
        ctx.builder.balances(&self.snapshot.unit_available_mw, &self.demand, day, &mut self.gen_buf, &mut self.dem_buf);
        let mode = ctx.config.loss_sharing;
        if self.gen_buf.iter().zip(&self.dem_buf).all(|(g, d)| g >= d) {
            self.counters.screened_hours += 1;
            if ctx.opts.audit_fraction > 0.0 && self.audit_rng.random::<f64>() < ctx.opts.audit_fraction {
                let case = ctx.builder.build(&self.snapshot, &self.demand, day);
                let sol = solve_min_shed_unscreened(&case, mode, ctx.opts.solve)?;
                self.counters.audited_hours += 1;
                if sol.status != SolveStatus::Optimal || sol.total_shed_mw > 0.0 {
                    return Err(SimError::ScreenAudit { year: self.year, hour: h, shed_mw: sol.total_shed_mw });
                }
            }
            if let Some(obs) = observer {
                let split = CauseSplit::zero(self.demand.len());
                obs(&HourRecord {
                    year: self.year,
                    hour: h,
                    unit_states: &self.unit_state,
                    line_states: &self.snapshot.line_state,
                    demand_mw: &self.demand,
                    case: None,
                    solution: None,
                    split: &split,
                });
            }
            return Ok(());
        }
        let case = ctx.builder.build(&self.snapshot, &self.demand, day);
        let sol = solve_min_shed(&case, mode, ctx.opts.solve)?;
        if sol.status != SolveStatus::Optimal {
            return Err(DispatchError::Infeasible.into());
        }
        let split = classify_causes(&case, &sol, mode)?;
        self.counters.lp_calls += 1;
        record_hour(&mut self.sample, &split, &peak_area, pool_peak);
        if let Some(obs) = observer {
            obs(&HourRecord {
                year: self.year,
                hour: h,
                unit_states: &self.unit_state,
                line_states: &self.snapshot.line_state,
                demand_mw: &self.demand,
                case: Some(&case),
                solution: Some(&sol),
                split: &split,
            });
        }
        Ok(())
    }
}

/// Simulate replication years until the convergence statistic of the chosen
/// index and scope drops to the threshold, or `FIN` years have run.
pub fn run_simulation(model: &SystemModel, config: &SimConfig, plan: &MaintenancePlan, opts: SimOptions) -> Result<SimResult, SimError> {
    run_simulation_with(model, config, plan, opts, Hooks::default())
}

/// [`run_simulation`] with callbacks.
///
/// Years run in batches of `opts.parallel`; results are consumed in year
/// order and the convergence test is applied after every year, so the
/// outcome does not depend on the batch size. Years past the converging one
/// within a batch are discarded.
pub fn run_simulation_with(
    model: &SystemModel,
    config: &SimConfig,
    plan: &MaintenancePlan,
    opts: SimOptions,
    mut hooks: Hooks<'_>,
) -> Result<SimResult, SimError> {
    if plan.units.len() != model.units.len() {
        return Err(SimError::InvalidConfig("maintenance plan does not match the unit list".into()));
    }
    if model.areas.is_empty() {
        return Err(SimError::InvalidConfig("no areas".into()));
    }
    let scope = Scope::for_convergence(config.convergence_scope, config.convergence_area);
    if let Scope::Area(a) = scope {
        if a >= model.areas.len() {
            return Err(SimError::InvalidConfig(format!("convergence area {} does not exist", a + 1)));
        }
    }
    let ctx = Context::new(model, config, plan, opts);
    let batch = if hooks.observer.is_some() { 1 } else { opts.parallel.max(1) };
    let pool = if batch > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(batch)
                .build()
                .map_err(|e| SimError::InvalidConfig(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let fin = config.fin as usize;
    let mut acc = IndexAccumulator::new(model.areas.len());
    let mut moments = RunningMoments::default();
    let mut trace = Vec::new();
    let mut counters = RunCounters::default();
    let mut converged = false;
    let mut next = 0usize;
    while next < fin && !converged {
        let end = (next + batch).min(fin);
        let outcomes: Vec<Result<(YearSample, RunCounters), SimError>> = match &pool {
            None => vec![ctx.simulate_year(next, reborrow(&mut hooks.observer))],
            Some(pool) => pool.install(|| (next..end).into_par_iter().map(|y| ctx.simulate_year(y, None)).collect()),
        };
        for outcome in outcomes {
            let (sample, c) = outcome?;
            counters.add(&c);
            moments.push(sample.value(scope, config.convergence_index, Cause::Gt));
            acc.finalize_year(sample);
            let beta = if moments.n >= MIN_YEARS_FOR_CONVERGENCE { moments.beta() } else { None };
            let point = TracePoint { year: moments.n, mean: moments.mean, beta };
            if let Some(p) = hooks.progress.as_deref_mut() {
                p(&point);
            }
            trace.push(point);
            if beta.is_some_and(|b| b <= config.cvt) {
                converged = true;
                break;
            }
        }
        next = acc.n_years();
    }
    Ok(SimResult { acc, trace, converged, counters })
}
