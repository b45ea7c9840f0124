use rand::Rng;

use crate::card_io::{GenUnit, TieLine};

/// Operating state of a generating unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitState {
    Up,
    Derated,
    Down,
    Maintenance,
}

/// Transition parameters of a unit's up / derated / down chain.
///
/// The unit alternates between Up and an outage state. Leaving Up it enters
/// Derated with probability `DFOR / (FOR + DFOR)` and Down otherwise; from
/// either outage state it returns to Up. Both outage states have mean dwell
/// `T_d` and Up has `T_u = T_d (1 − FOR − DFOR) / (FOR + DFOR)`, so the
/// long-run occupancies are exactly `1 − FOR − DFOR`, `DFOR` and `FOR`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitChain {
    pub mean_up_h: f64,
    pub mean_down_h: f64,
    pub p_derated: f64,
    /// Zero when the unit never fails.
    pub outage_prob: f64,
}

impl UnitChain {
    pub fn new(unit: &GenUnit, default_down_h: f64) -> Self {
        let q = unit.for_rate + unit.dfor;
        let t_d = unit.effective_mean_down_time(default_down_h);
        let mean_up_h = if q > 0.0 { t_d * (1.0 - q) / q } else { f64::INFINITY };
        UnitChain {
            mean_up_h,
            mean_down_h: t_d,
            p_derated: if q > 0.0 { unit.dfor / q } else { 0.0 },
            outage_prob: q,
        }
    }
}

/// Whole hours spent in a state with mean dwell `mean_h`.
///
/// The draw is `ceil(E)` for an exponential `E` whose rate is chosen so the
/// mean of the rounded value is exactly `mean_h`; that is a geometric law on
/// 1, 2, ... Means at or below one hour give one hour. An infinite mean gives
/// `u64::MAX`.
pub fn dwell_hours<R: Rng + ?Sized>(rng: &mut R, mean_h: f64) -> u64 {
    if !mean_h.is_finite() {
        return u64::MAX;
    }
    if mean_h <= 1.0 {
        let _ = rng.random::<f64>();
        return 1;
    }
    let rate = -(1.0 - 1.0 / mean_h).ln();
    let u: f64 = 1.0 - rng.random::<f64>();
    let h = (-u.ln() / rate).ceil();
    if h >= u64::MAX as f64 {
        u64::MAX
    } else {
        (h as u64).max(1)
    }
}

/// Next state of a unit and the hours it will stay there.
pub fn sample_unit_transition<R: Rng + ?Sized>(chain: &UnitChain, current: UnitState, rng: &mut R) -> (UnitState, u64) {
    match current {
        UnitState::Up if chain.outage_prob > 0.0 => {
            let next = if rng.random::<f64>() < chain.p_derated { UnitState::Derated } else { UnitState::Down };
            (next, dwell_hours(rng, chain.mean_down_h))
        }
        UnitState::Up => (UnitState::Up, u64::MAX),
        UnitState::Derated | UnitState::Down => (UnitState::Up, dwell_hours(rng, chain.mean_up_h)),
        UnitState::Maintenance => (UnitState::Maintenance, u64::MAX),
    }
}

/// Cumulative state probabilities of a line.
#[derive(Clone, Debug, PartialEq)]
pub struct LineChain {
    pub cumulative: Vec<f64>,
    pub mean_dwell_h: f64,
}

impl LineChain {
    pub fn new(line: &TieLine, mean_dwell_h: f64) -> Self {
        let total: f64 = line.states.iter().map(|s| s.probability).sum();
        let mut acc = 0.0;
        let cumulative = line
            .states
            .iter()
            .map(|s| {
                acc += s.probability / total;
                acc
            })
            .collect();
        LineChain { cumulative, mean_dwell_h }
    }

    /// A line with a single reachable state never changes.
    pub fn is_static(&self) -> bool {
        let mut prev = 0.0;
        let reachable = self
            .cumulative
            .iter()
            .filter(|&&c| {
                let step = c > prev;
                prev = c;
                step
            })
            .count();
        reachable <= 1
    }
}

/// Next state of a line, drawn from its state probabilities independently of
/// the current state, and the hours until the following draw. Drawing the
/// current state again simply extends its stay.
pub fn sample_line_transition<R: Rng + ?Sized>(chain: &LineChain, rng: &mut R) -> (usize, u64) {
    let u: f64 = rng.random();
    let next = chain.cumulative.iter().position(|&c| u < c).unwrap_or(chain.cumulative.len() - 1);
    (next, dwell_hours(rng, chain.mean_dwell_h))
}
