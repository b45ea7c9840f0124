use crate::card_io::{ConvergenceScope, ReliabilityIndex};
use crate::dispatch::CauseSplit;

/// Shed attribution category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cause {
    Gc,
    Tc,
    Gt,
}

impl Cause {
    pub const ALL: [Cause; 3] = [Cause::Gc, Cause::Tc, Cause::Gt];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Cause::Gc => "GC",
            Cause::Tc => "TC",
            Cause::Gt => "GT",
        }
    }
}

/// Where a statistic is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// 0-based area index.
    Area(usize),
    Pool,
}

impl Scope {
    /// Scope the convergence test watches.
    pub fn for_convergence(scope: ConvergenceScope, kvl: usize) -> Scope {
        match scope {
            ConvergenceScope::Pool => Scope::Pool,
            ConvergenceScope::FixedArea => Scope::Area(kvl.saturating_sub(1)),
        }
    }
}

/// One year's totals for one area (or the pool) and one cause.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CauseTally {
    pub loss_hours: u32,
    pub eue_mwh: f64,
    /// Days shedding at the daily peak hour.
    pub loss_days: u32,
    /// Sum of MW shed at those peak hours.
    pub peak_shed_mw: f64,
}

impl CauseTally {
    pub fn index(&self, index: ReliabilityIndex) -> f64 {
        match index {
            ReliabilityIndex::Hlole => self.loss_hours as f64,
            ReliabilityIndex::Lole => self.loss_days as f64,
            ReliabilityIndex::Eue => self.eue_mwh,
        }
    }
}

/// The samples of one replication year, indexed by cause.
#[derive(Clone, Debug, PartialEq)]
pub struct YearSample {
    /// 0-based replication number.
    pub year: usize,
    pub areas: Vec<[CauseTally; 3]>,
    pub pool: [CauseTally; 3],
}

impl YearSample {
    pub fn new(year: usize, n_areas: usize) -> Self {
        YearSample { year, areas: vec![[CauseTally::default(); 3]; n_areas], pool: [CauseTally::default(); 3] }
    }

    pub fn tally(&self, scope: Scope, cause: Cause) -> &CauseTally {
        match scope {
            Scope::Area(a) => &self.areas[a][cause.index()],
            Scope::Pool => &self.pool[cause.index()],
        }
    }

    pub fn value(&self, scope: Scope, index: ReliabilityIndex, cause: Cause) -> f64 {
        self.tally(scope, cause).index(index)
    }
}

/// Add one evaluated hour to a year's tallies.
///
/// A shedding hour (or peak day) is counted once: under GC when any of its
/// shed is generation-caused, under TC otherwise, and under GT always, so
/// GC + TC = GT holds for the counts. Energy and MW are split by cause.
/// `peak_area[i]` tells whether the hour is area i's daily peak hour and
/// `peak_pool` whether it is the pool's.
pub fn record_hour(year: &mut YearSample, split: &CauseSplit, peak_area: &[bool], peak_pool: bool) {
    fn add(t: &mut [CauseTally; 3], gc: f64, tc: f64, gt: f64, peak: bool) {
        if gt <= 0.0 {
            return;
        }
        let counted = if gc > 0.0 { Cause::Gc } else { Cause::Tc };
        for (cause, mw) in [(Cause::Gc, gc), (Cause::Tc, tc), (Cause::Gt, gt)] {
            let c = &mut t[cause.index()];
            c.eue_mwh += mw;
            if peak {
                c.peak_shed_mw += mw;
            }
            if cause == counted || cause == Cause::Gt {
                c.loss_hours += 1;
                if peak {
                    c.loss_days += 1;
                }
            }
        }
    }
    for (i, t) in year.areas.iter_mut().enumerate() {
        add(t, split.gc_mw[i], split.tc_mw[i], split.gt_mw[i], peak_area[i]);
    }
    let (gc, tc, gt) = split.pool();
    add(&mut year.pool, gc, tc, gt, peak_pool);
}

/// Change-of-variance statistic of a sample: `sqrt(s²/N) / mean` with the
/// `N − 1` sample variance. `None` for fewer than two samples or a zero mean.
pub fn beta(samples: &[f64]) -> Option<f64> {
    let mut r = RunningMoments::default();
    for &x in samples {
        r.push(x);
    }
    r.beta()
}

/// Streaming mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningMoments {
    pub n: usize,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn variance(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.m2 / (self.n - 1) as f64).max(0.0))
    }

    pub fn beta(&self) -> Option<f64> {
        let var = self.variance()?;
        (self.mean > 0.0).then(|| (var / self.n as f64).sqrt() / self.mean)
    }
}

/// Per-year samples of a run plus the summary statistics derived from them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndexAccumulator {
    pub n_areas: usize,
    pub years: Vec<YearSample>,
}

impl IndexAccumulator {
    pub fn new(n_areas: usize) -> Self {
        IndexAccumulator { n_areas, years: Vec::new() }
    }

    /// Close a year.
    pub fn finalize_year(&mut self, year: YearSample) {
        self.years.push(year);
    }

    /// Combine two accumulators; the result lists years by replication number
    /// whatever the merge order.
    pub fn merge(mut self, other: IndexAccumulator) -> IndexAccumulator {
        self.years.extend(other.years);
        self.years.sort_by_key(|y| y.year);
        self
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    fn total(&self, scope: Scope, cause: Cause, f: impl Fn(&CauseTally) -> f64) -> f64 {
        self.years.iter().map(|y| f(y.tally(scope, cause))).sum()
    }

    pub fn samples(&self, scope: Scope, index: ReliabilityIndex, cause: Cause) -> Vec<f64> {
        self.years.iter().map(|y| y.value(scope, index, cause)).collect()
    }

    pub fn mean(&self, scope: Scope, index: ReliabilityIndex, cause: Cause) -> f64 {
        if self.years.is_empty() {
            return 0.0;
        }
        self.total(scope, cause, |t| t.index(index)) / self.years.len() as f64
    }

    /// MW shed per loss hour: total unserved energy over total loss hours.
    pub fn xlol_hourly(&self, scope: Scope, cause: Cause) -> f64 {
        let hours = self.total(scope, cause, |t| t.loss_hours as f64);
        if hours == 0.0 {
            0.0
        } else {
            self.total(scope, cause, |t| t.eue_mwh) / hours
        }
    }

    /// MW shed per loss day at the daily peak hour.
    pub fn xlol_peak(&self, scope: Scope, cause: Cause) -> f64 {
        let days = self.total(scope, cause, |t| t.loss_days as f64);
        if days == 0.0 {
            0.0
        } else {
            self.total(scope, cause, |t| t.peak_shed_mw) / days
        }
    }

    pub fn beta(&self, scope: Scope, index: ReliabilityIndex) -> Option<f64> {
        beta(&self.samples(scope, index, Cause::Gt))
    }

    /// Standard error of a mean.
    pub fn std_error(&self, scope: Scope, index: ReliabilityIndex, cause: Cause) -> Option<f64> {
        let mut r = RunningMoments::default();
        for y in &self.years {
            r.push(y.value(scope, index, cause));
        }
        r.variance().map(|v| (v / r.n as f64).sqrt())
    }
}
