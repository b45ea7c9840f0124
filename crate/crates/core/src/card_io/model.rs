use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::WEEKS_PER_YEAR;

/// Names of the ZZMC fields that are parsed and written back but carry no
/// behaviour in this crate.
pub const OPAQUE_ZZMC_FIELDS: [&str; 10] = ["WHEN", "KVT", "STEP", "MAXE", "II", "IJ", "IR", "IN", "D", "M"];

/// Column order of the ZZMC card.
pub const ZZMC_COLUMNS: [&str; 21] = [
    "SEED", "LS", "W1", "W2", "W3", "WHERE", "WHEN", "KVS", "KVT", "KVL", "CVT", "FIN", "STEP", "FREQ", "MAXE",
    "II", "IJ", "IR", "IN", "D", "M",
];

/// The data cards making up a deck, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CardKind {
    Zzmc,
    Zzld,
    Zzud,
    Zzfc,
    Zzod,
    Zztd,
    Zzlp,
}

impl CardKind {
    pub const ALL: [CardKind; 7] = [
        CardKind::Zzmc,
        CardKind::Zzld,
        CardKind::Zzud,
        CardKind::Zzfc,
        CardKind::Zzod,
        CardKind::Zztd,
        CardKind::Zzlp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CardKind::Zzmc => "ZZMC",
            CardKind::Zzld => "ZZLD",
            CardKind::Zzud => "ZZUD",
            CardKind::Zzfc => "ZZFC",
            CardKind::Zzod => "ZZOD",
            CardKind::Zztd => "ZZTD",
            CardKind::Zzlp => "ZZLP",
        }
    }

    pub fn from_label(label: &str) -> Option<CardKind> {
        CardKind::ALL.into_iter().find(|k| k.label() == label)
    }

    /// ZZFC, ZZOD and ZZLP may be omitted from a deck.
    pub fn is_optional(self) -> bool {
        matches!(self, CardKind::Zzfc | CardKind::Zzod | CardKind::Zzlp)
    }
}

impl fmt::Display for CardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How unserved load is allocated among areas when several allocations reach
/// the same minimum total shed (`LS` column).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossSharing {
    /// `LS = 0`: shortfalls are spread in proportion to area demand.
    LossSharing,
    /// `LS = 1`: self-sufficient areas shed only when the network forces them to.
    NonLossSharing,
}

impl LossSharing {
    pub fn code(self) -> u32 {
        match self {
            LossSharing::LossSharing => 0,
            LossSharing::NonLossSharing => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(LossSharing::LossSharing),
            1 => Some(LossSharing::NonLossSharing),
            _ => None,
        }
    }
}

/// Which statistics are tested for convergence (`WHERE` column).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergenceScope {
    FixedArea,
    Pool,
}

impl ConvergenceScope {
    pub fn code(self) -> u32 {
        match self {
            ConvergenceScope::FixedArea => 0,
            ConvergenceScope::Pool => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(ConvergenceScope::FixedArea),
            1 => Some(ConvergenceScope::Pool),
            _ => None,
        }
    }
}

/// Reliability index driving convergence (`KVS` column: 1, 2, 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReliabilityIndex {
    Hlole,
    Lole,
    Eue,
}

impl ReliabilityIndex {
    pub fn code(self) -> u32 {
        match self {
            ReliabilityIndex::Hlole => 1,
            ReliabilityIndex::Lole => 2,
            ReliabilityIndex::Eue => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(ReliabilityIndex::Hlole),
            2 => Some(ReliabilityIndex::Lole),
            3 => Some(ReliabilityIndex::Eue),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ReliabilityIndex::Hlole => "HLOLE",
            ReliabilityIndex::Lole => "LOLE",
            ReliabilityIndex::Eue => "EUE",
        }
    }
}

/// When adequacy is evaluated (`FREQ` column: 1 hourly, 2 daily peak only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectionFrequency {
    Hourly,
    DailyPeak,
}

impl CollectionFrequency {
    pub fn code(self) -> u32 {
        match self {
            CollectionFrequency::Hourly => 1,
            CollectionFrequency::DailyPeak => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(CollectionFrequency::Hourly),
            2 => Some(CollectionFrequency::DailyPeak),
            _ => None,
        }
    }
}

/// Monte Carlo controls from the ZZMC card.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub loss_sharing: LossSharing,
    /// Last week of seasons 1-3; season 4 ends at week 52.
    pub season_end_weeks: [u32; 3],
    pub convergence_scope: ConvergenceScope,
    /// 1-based area number (`KVL`) used when the scope is a fixed area.
    pub convergence_area: usize,
    pub convergence_index: ReliabilityIndex,
    /// Threshold on the change-of-variance statistic.
    pub cvt: f64,
    /// Maximum number of replication years.
    pub fin: u32,
    pub collection_frequency: CollectionFrequency,
    /// Inert fields, kept verbatim keyed by column name.
    pub opaque: BTreeMap<String, String>,
}

impl SimConfig {
    /// Season index (0-based) of a 1-based week.
    pub fn season_of_week(&self, week: u32) -> usize {
        self.season_end_weeks.iter().take_while(|&&end| week > end).count()
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        let opaque = [("WHEN", "1"), ("KVT", "2"), ("STEP", "1"), ("MAXE", "1000"), ("II", "0"), ("IJ", "0")]
            .into_iter()
            .chain([("IR", "1"), ("IN", "5"), ("D", "1"), ("M", "1")])
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        SimConfig {
            seed: 345237,
            loss_sharing: LossSharing::NonLossSharing,
            season_end_weeks: [13, 26, 39],
            convergence_scope: ConvergenceScope::FixedArea,
            convergence_area: 1,
            convergence_index: ReliabilityIndex::Hlole,
            cvt: 0.025,
            fin: 9999,
            collection_frequency: CollectionFrequency::Hourly,
            opaque,
        }
    }
}

/// Inclusive 1-based week range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeekRange {
    pub beg: u32,
    pub end: u32,
}

impl WeekRange {
    pub fn new(beg: u32, end: u32) -> Self {
        WeekRange { beg, end }
    }

    pub fn contains(&self, week: u32) -> bool {
        self.beg <= week && week <= self.end
    }

    pub fn contains_range(&self, other: &WeekRange) -> bool {
        self.beg <= other.beg && other.end <= self.end
    }
}

/// One row of the ZZLD card.
#[derive(Clone, Debug, PartialEq)]
pub struct Area {
    pub sn: u32,
    pub name: String,
    pub peak_mw: f64,
    /// Load forecast uncertainty, one standard deviation in percent.
    pub lfu_pct: f64,
    pub outage_window: WeekRange,
    /// Written as `0 0` when absent.
    pub forbidden_period: Option<WeekRange>,
    pub sum_flows_limit: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedulingMode {
    /// `P/A = 0`: start weeks chosen by the scheduler.
    Automatic,
    /// `P/A = 1`: start weeks taken from the card.
    Predetermined,
}

impl SchedulingMode {
    pub fn code(self) -> u32 {
        match self {
            SchedulingMode::Automatic => 0,
            SchedulingMode::Predetermined => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(SchedulingMode::Automatic),
            1 => Some(SchedulingMode::Predetermined),
            _ => None,
        }
    }
}

/// Planned outage request: start week (ignored for automatic units) and
/// duration in whole weeks. A zero duration means no outage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PlannedOutage {
    pub beg_week: u32,
    pub duration_weeks: u32,
}

/// One row of the ZZUD card.
#[derive(Clone, Debug, PartialEq)]
pub struct GenUnit {
    pub sn: u32,
    /// Six characters: four for the plant, two for the unit within it.
    pub name: String,
    pub location: String,
    pub cap_by_season: [f64; 4],
    /// Probability of the derated state.
    pub dfor: f64,
    /// Probability of the full-outage state.
    pub for_rate: f64,
    /// Percent of capacity lost in the derated state.
    pub der_pct: f64,
    pub scheduling: SchedulingMode,
    pub outages: [PlannedOutage; 2],
    /// Optional trailing column; `None` or `0` selects the configured default.
    pub mean_down_time_h: Option<f64>,
}

impl GenUnit {
    pub fn plant_id(&self) -> &str {
        let end = self.name.char_indices().nth(4).map_or(self.name.len(), |(i, _)| i);
        &self.name[..end]
    }

    /// Largest seasonal capacity.
    pub fn rated_capacity(&self) -> f64 {
        self.cap_by_season.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_outage_weeks(&self) -> u32 {
        self.outages.iter().map(|o| o.duration_weeks).sum()
    }

    /// Mean down time to use in simulation, falling back to `default_h`.
    pub fn effective_mean_down_time(&self, default_h: f64) -> f64 {
        match self.mean_down_time_h {
            Some(h) if h > 0.0 => h,
            _ => default_h,
        }
    }
}

/// One probabilistic state of a tie-line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineState {
    /// Per-unit admittance; only its magnitude is used as the susceptance.
    pub admittance: f64,
    pub cap_fwd_mw: f64,
    pub cap_rev_mw: f64,
    pub probability: f64,
}

/// One row of the ZZTD card.
#[derive(Clone, Debug, PartialEq)]
pub struct TieLine {
    pub sn: u32,
    pub line_number: u32,
    pub from_area: String,
    pub to_area: String,
    pub states: Vec<LineState>,
}

/// One row of the ZZFC card.
#[derive(Clone, Debug, PartialEq)]
pub struct FirmContract {
    pub sn: u32,
    pub from_area: String,
    pub to_area: String,
    pub beg_day: u32,
    pub end_day: u32,
    pub mw: f64,
}

impl FirmContract {
    /// Whether the contract is in force on a 1-based simulated day. Day 365
    /// is folded onto day 364.
    pub fn active_on(&self, day: u32) -> bool {
        let end = self.end_day.min(crate::DAYS_PER_YEAR as u32);
        self.beg_day <= day && day <= end
    }
}

/// One row of the ZZOD card.
#[derive(Clone, Debug, PartialEq)]
pub struct Ownership {
    pub sn: u32,
    pub unit_name: String,
    /// Percent owned by each area, in ZZLD order. Trailing entries past the
    /// last area must be zero.
    pub shares_pct: Vec<f64>,
}

/// Chronological load shape, all values in percent.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadProfile {
    /// Weekly peak as percent of the annual peak.
    pub weekly_pct: [f64; WEEKS_PER_YEAR],
    /// Daily peak as percent of the weekly peak, Monday first.
    pub daily_pct: [f64; 7],
    /// Hourly load as percent of the daily peak, one curve per season.
    pub hourly_pct_by_season: [[f64; 24]; 4],
}

impl LoadProfile {
    /// Load at a 0-based hour of the year as a fraction of the annual peak.
    pub fn fraction_at(&self, hour_of_year: usize, season: usize) -> f64 {
        let week = hour_of_year / crate::HOURS_PER_WEEK;
        let day = (hour_of_year / 24) % 7;
        let hour = hour_of_year % 24;
        self.weekly_pct[week] * self.daily_pct[day] * self.hourly_pct_by_season[season][hour] * 1e-6
    }

    /// The IEEE RTS-79 load shape shipped with the crate.
    pub fn rts79() -> &'static LoadProfile {
        static PROFILE: OnceLock<LoadProfile> = OnceLock::new();
        PROFILE.get_or_init(|| {
            let deck = super::parse::parse_load_card_text(super::DEFAULT_LOAD_CARD)
                .expect("bundled RTS-79 load card parses");
            deck.shared
        })
    }
}

/// Contents of the ZZLP card: a shared profile plus optional per-area ones.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadModel {
    pub shared: LoadProfile,
    pub per_area: Vec<(String, LoadProfile)>,
}

impl LoadModel {
    pub fn profile_for(&self, area: &str) -> &LoadProfile {
        self.per_area.iter().find(|(name, _)| name == area).map_or(&self.shared, |(_, p)| p)
    }
}

/// The full parsed study.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemModel {
    pub areas: Vec<Area>,
    pub units: Vec<GenUnit>,
    pub lines: Vec<TieLine>,
    pub contracts: Vec<FirmContract>,
    pub ownerships: Vec<Ownership>,
    /// `None` when the deck has no ZZLP card; the RTS-79 shape is used then.
    pub load_card: Option<LoadModel>,
}

impl SystemModel {
    pub fn area_index(&self, name: &str) -> Option<usize> {
        self.areas.iter().position(|a| a.name == name)
    }

    pub fn unit_index(&self, name: &str) -> Option<usize> {
        self.units.iter().position(|u| u.name == name)
    }

    /// Load profile applying to an area.
    pub fn profile_for(&self, area: usize) -> &LoadProfile {
        match &self.load_card {
            Some(lm) => lm.profile_for(&self.areas[area].name),
            None => LoadProfile::rts79(),
        }
    }

    /// Indices of the units located in an area.
    pub fn units_in_area(&self, area: usize) -> impl Iterator<Item = usize> + '_ {
        let name = &self.areas[area].name;
        self.units.iter().enumerate().filter(move |(_, u)| &u.location == name).map(|(i, _)| i)
    }

    /// Weekly peak loads of an area in MW before any maintenance.
    pub fn weekly_peaks(&self, area: usize) -> [f64; WEEKS_PER_YEAR] {
        let peak = self.areas[area].peak_mw;
        let profile = self.profile_for(area);
        std::array::from_fn(|w| peak * profile.weekly_pct[w] / 100.0)
    }
}
