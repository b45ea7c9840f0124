use std::collections::HashSet;
use std::fmt;

use super::model::*;
use crate::DAYS_PER_YEAR;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// Card and 1-based data row a diagnostic refers to. Row 0 means the card as
/// a whole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub card: CardKind,
    pub row: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {} row {}: {}", self.location.card, self.location.row, self.message)
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn error(&mut self, card: CardKind, row: usize, message: impl Into<String>) {
        self.push(Severity::Error, card, row, message);
    }

    fn warn(&mut self, card: CardKind, row: usize, message: impl Into<String>) {
        self.push(Severity::Warning, card, row, message);
    }

    fn push(&mut self, severity: Severity, card: CardKind, row: usize, message: impl Into<String>) {
        self.0.push(Diagnostic { severity, location: Location { card, row }, message: message.into() });
    }
}

fn prob(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

fn week_range_ok(r: &WeekRange) -> bool {
    1 <= r.beg && r.beg <= r.end && r.end as usize <= crate::WEEKS_PER_YEAR
}

/// Check every type invariant of a parsed deck. The result is empty exactly
/// when the deck is valid; it is ordered by card, then row.
pub fn validate_deck(model: &SystemModel, config: &SimConfig) -> Vec<Diagnostic> {
    let mut out = Sink(Vec::new());
    check_config(config, model.areas.len(), &mut out);
    check_areas(&model.areas, &mut out);
    let area_names: HashSet<&str> = model.areas.iter().map(|a| a.name.as_str()).collect();
    check_units(model, &area_names, &mut out);

    for (i, c) in model.contracts.iter().enumerate() {
        let row = i + 1;
        let card = CardKind::Zzfc;
        if c.from_area == c.to_area {
            out.error(card, row, "contract from-area equals to-area");
        }
        for name in [&c.from_area, &c.to_area] {
            if !area_names.contains(name.as_str()) {
                out.error(card, row, format!("unknown area '{name}'"));
            }
        }
        if c.beg_day < 1 || c.beg_day > c.end_day || c.end_day > 365 {
            out.error(card, row, format!("day range {}-{} outside 1..365 or reversed", c.beg_day, c.end_day));
        } else if c.end_day as usize > DAYS_PER_YEAR {
            out.warn(card, row, "day 365 clamped to day 364 of the 52-week year");
        }
        if c.mw < 0.0 {
            out.error(card, row, "contract MW is negative");
        }
    }

    for (i, o) in model.ownerships.iter().enumerate() {
        let row = i + 1;
        let card = CardKind::Zzod;
        if model.unit_index(&o.unit_name).is_none() {
            out.error(card, row, format!("unknown unit '{}'", o.unit_name));
        }
        if o.shares_pct.iter().any(|&s| s < 0.0) {
            out.error(card, row, "negative ownership share");
        }
        let sum: f64 = o.shares_pct.iter().sum();
        if (sum - 100.0).abs() > 1e-6 {
            out.error(card, row, "shares sum ≠ 100");
        }
        if o.shares_pct.iter().skip(model.areas.len()).any(|&s| s != 0.0) {
            out.error(card, row, "non-zero share beyond the last area");
        }
    }

    for (i, l) in model.lines.iter().enumerate() {
        let row = i + 1;
        let card = CardKind::Zztd;
        if l.from_area == l.to_area {
            out.error(card, row, "line from-area equals to-area");
        }
        for name in [&l.from_area, &l.to_area] {
            if !area_names.contains(name.as_str()) {
                out.error(card, row, format!("unknown area '{name}'"));
            }
        }
        if l.states.is_empty() || l.states.len() > 6 {
            out.error(card, row, format!("{} line states (1 to 6 allowed)", l.states.len()));
        }
        if l.states.iter().any(|s| !prob(s.probability)) {
            out.error(card, row, "state probability outside [0, 1]");
        }
        let sum: f64 = l.states.iter().map(|s| s.probability).sum();
        if (sum - 1.0).abs() > 1e-6 {
            out.error(card, row, format!("state probabilities sum to {sum}, not 1"));
        }
        if l.states.iter().any(|s| s.cap_fwd_mw < 0.0 || s.cap_rev_mw < 0.0) {
            out.error(card, row, "negative line capacity");
        }
    }

    if let Some(lm) = &model.load_card {
        let profiles = std::iter::once(("*", &lm.shared)).chain(lm.per_area.iter().map(|(n, p)| (n.as_str(), p)));
        for (row, (name, p)) in profiles.enumerate() {
            let all = p.weekly_pct.iter().chain(&p.daily_pct).chain(p.hourly_pct_by_season.iter().flatten());
            if all.clone().any(|&v| !(v > 0.0 && v <= 100.0)) {
                out.error(CardKind::Zzlp, row + 1, format!("load shape '{name}' has a percentage outside (0, 100]"));
            }
            let max_week = p.weekly_pct.iter().copied().fold(f64::MIN, f64::max);
            if max_week != 100.0 {
                out.error(CardKind::Zzlp, row + 1, format!("load shape '{name}' peak week is {max_week}, not 100"));
            }
            if name != "*" && !area_names.contains(name) {
                out.error(CardKind::Zzlp, row + 1, format!("unknown area '{name}'"));
            }
        }
    }

    let mut diags = out.0;
    diags.sort_by_key(|d| d.location);
    diags
}

fn check_config(c: &SimConfig, n_areas: usize, out: &mut Sink) {
    let card = CardKind::Zzmc;
    let [w1, w2, w3] = c.season_end_weeks;
    if !(1 <= w1 && w1 < w2 && w2 < w3 && w3 < 52) {
        out.error(card, 1, format!("season end weeks {w1},{w2},{w3} must satisfy 1 ≤ W1 < W2 < W3 < 52"));
    }
    if !(c.cvt > 0.0 && c.cvt < 1.0) {
        out.error(card, 1, format!("CVT {} outside (0, 1)", c.cvt));
    }
    if c.fin < 1 {
        out.error(card, 1, "FIN must be at least 1");
    }
    if c.seed < 1 {
        out.error(card, 1, "SEED must be positive");
    }
    if c.convergence_area < 1 || c.convergence_area > n_areas {
        out.error(card, 1, format!("KVL {} does not name an area", c.convergence_area));
    }
    for name in OPAQUE_ZZMC_FIELDS {
        if !c.opaque.contains_key(name) {
            out.error(card, 1, format!("field {name} missing"));
        }
    }
}

fn check_areas(areas: &[Area], out: &mut Sink) {
    let mut seen = HashSet::new();
    for (i, a) in areas.iter().enumerate() {
        let row = i + 1;
        let card = CardKind::Zzld;
        if a.name.is_empty() || a.name.chars().count() > 4 {
            out.error(card, row, format!("area name '{}' must have 1 to 4 characters", a.name));
        }
        if !seen.insert(a.name.as_str()) {
            out.error(card, row, format!("duplicate area name '{}'", a.name));
        }
        if !(a.peak_mw > 0.0) {
            out.error(card, row, "peak must be positive");
        }
        if a.lfu_pct < 0.0 {
            out.error(card, row, "LFU must be non-negative");
        }
        if a.sum_flows_limit < 0.0 {
            out.error(card, row, "sum of flows limit must be non-negative");
        }
        if !week_range_ok(&a.outage_window) {
            out.error(card, row, "outage window outside weeks 1..52 or reversed");
        }
        if let Some(fp) = &a.forbidden_period {
            if !week_range_ok(fp) {
                out.error(card, row, "forbidden period outside weeks 1..52 or reversed");
            } else if !a.outage_window.contains_range(fp) {
                out.error(card, row, "forbidden ⊄ window");
            }
        }
    }
}

fn check_units(model: &SystemModel, area_names: &HashSet<&str>, out: &mut Sink) {
    let mut seen = HashSet::new();
    for (i, u) in model.units.iter().enumerate() {
        let row = i + 1;
        let card = CardKind::Zzud;
        if u.name.chars().count() != 6 {
            out.error(card, row, format!("unit name '{}' must have 6 characters", u.name));
        }
        if !seen.insert(u.name.as_str()) {
            out.error(card, row, format!("duplicate unit name '{}'", u.name));
        }
        if !area_names.contains(u.location.as_str()) {
            out.error(card, row, format!("unknown area '{}'", u.location));
        }
        if u.cap_by_season.iter().any(|&c| c < 0.0) {
            out.error(card, row, "negative capacity");
        }
        if !prob(u.for_rate) || !prob(u.dfor) {
            out.error(card, row, "FOR and DFOR must lie in [0, 1]");
        } else if u.for_rate + u.dfor > 1.0 {
            out.error(card, row, "FOR+DFOR > 1");
        }
        if !(0.0..=100.0).contains(&u.der_pct) {
            out.error(card, row, "DER outside [0, 100]");
        }
        if matches!(u.mean_down_time_h, Some(h) if h < 0.0) {
            out.error(card, row, "mean down time is negative");
        }
        if u.scheduling == SchedulingMode::Predetermined {
            for (k, o) in u.outages.iter().enumerate().filter(|(_, o)| o.duration_weeks > 0) {
                let end = o.beg_week + o.duration_weeks - 1;
                if o.beg_week < 1 || end as usize > crate::WEEKS_PER_YEAR {
                    out.error(card, row, format!("outage {} weeks {}-{end} outside the year", k + 1, o.beg_week));
                }
            }
            let [a, b] = u.outages;
            if a.duration_weeks > 0 && b.duration_weeks > 0 {
                let (a_end, b_end) = (a.beg_week + a.duration_weeks, b.beg_week + b.duration_weeks);
                if a.beg_week < b_end && b.beg_week < a_end {
                    out.error(card, row, "the two planned outages overlap");
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_io::{parse_deck, DeckFormat};

    fn deck() -> (SystemModel, SimConfig) {
        let text = "ZZMC\n345237 1 13 26 39 1 1 1 2 1 0.025 9999 1 1 1000 0 0 1 5 1 1\n\
                    ZZLD\n1 'A1' 3000 0 1 52 31 32 30000\n2 'A2' 3000 0 1 52 0 0 30000\n\
                    ZZUD\n1 'A10101' 'A1' 12 12 12 12 0 0.02 0 0 0 0 0 0 0\n\
                    ZZTD\n1 1 'A1' 'A2' \"100, 300, 300, 1\"\n";
        let d = parse_deck(text, DeckFormat::Txt).unwrap();
        (d.model, d.config)
    }

    #[test]
    fn table_iii_row_is_clean() {
        let (m, c) = deck();
        assert_eq!(validate_deck(&m, &c), vec![]);
    }

    #[test]
    fn for_plus_dfor_above_one() {
        let (mut m, c) = deck();
        m.units[0].for_rate = 0.7;
        m.units[0].dfor = 0.5;
        let d = validate_deck(&m, &c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Error);
        assert_eq!(d[0].location, Location { card: CardKind::Zzud, row: 1 });
        assert_eq!(d[0].message, "FOR+DFOR > 1");
    }

    #[test]
    fn forbidden_outside_window() {
        let (mut m, c) = deck();
        m.areas[0].outage_window = WeekRange::new(40, 52);
        let d = validate_deck(&m, &c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].location, Location { card: CardKind::Zzld, row: 1 });
        assert_eq!(d[0].message, "forbidden ⊄ window");
    }

    #[test]
    fn day_365_is_a_warning() {
        let (mut m, c) = deck();
        m.contracts.push(FirmContract {
            sn: 1,
            from_area: "A1".into(),
            to_area: "A2".into(),
            beg_day: 300,
            end_day: 365,
            mw: 10.0,
        });
        let d = validate_deck(&m, &c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
    }

    #[test]
    fn diagnostics_sorted_by_card_then_row() {
        let (mut m, mut c) = deck();
        m.lines[0].states[0].probability = 0.5;
        m.units[0].der_pct = 150.0;
        m.areas[1].peak_mw = 0.0;
        c.cvt = 2.0;
        let d = validate_deck(&m, &c);
        let cards: Vec<_> = d.iter().map(|d| d.location.card).collect();
        assert_eq!(cards, [CardKind::Zzmc, CardKind::Zzld, CardKind::Zzud, CardKind::Zztd]);
        assert_eq!(d[1].location.row, 2);
    }
}
