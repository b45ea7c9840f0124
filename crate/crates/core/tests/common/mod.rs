#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use narp::card_io::{
    Area, CollectionFrequency, ConvergenceScope, FirmContract, GenUnit, LineState, LoadModel, LoadProfile, LossSharing,
    Ownership, PlannedOutage, ReliabilityIndex, SchedulingMode, SimConfig, SystemModel, TieLine, WeekRange,
};
use narp::dispatch::NetworkCase;
use narp::Deck;
use proptest::prelude::*;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn bundled_deck() -> Deck {
    narp::read_deck(&data_path("five_area.txt")).expect("bundled deck parses")
}

/// Minimum total shed from an explicit-flow formulation solved by minilp.
pub fn reference_total(case: &NetworkCase) -> f64 {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let n = case.areas.len();
    let g: Vec<_> = case.areas.iter().map(|a| p.add_var(0.0, (a.gen_min_mw, a.gen_max_mw))).collect();
    let s: Vec<_> = case.areas.iter().map(|a| p.add_var(1.0, (0.0, a.demand_mw))).collect();
    let th: Vec<_> = (0..n).map(|i| p.add_var(0.0, if i == 0 { (0.0, 0.0) } else { (-1e3, 1e3) })).collect();
    let mut bal: Vec<Vec<(minilp::Variable, f64)>> = (0..n).map(|i| vec![(g[i], 1.0), (s[i], 1.0)]).collect();
    for l in &case.lines {
        let f = p.add_var(0.0, (-l.cap_rev_mw, l.cap_fwd_mw));
        let b = l.susceptance.abs() * case.base_mva;
        p.add_constraint([(f, 1.0), (th[l.from], -b), (th[l.to], b)], ComparisonOp::Eq, 0.0);
        if b > 0.0 {
            p.add_constraint([(th[l.from], 1.0), (th[l.to], -1.0)], ComparisonOp::Le, l.angle_max);
            p.add_constraint([(th[l.from], 1.0), (th[l.to], -1.0)], ComparisonOp::Ge, l.angle_min);
        }
        bal[l.from].push((f, -1.0));
        bal[l.to].push((f, 1.0));
    }
    for (i, a) in case.areas.iter().enumerate() {
        p.add_constraint(bal[i].clone(), ComparisonOp::Eq, a.demand_mw);
        let limit = a.sum_flows_limit_mw;
        if limit.is_finite() {
            let net = [(g[i], 1.0), (s[i], 1.0)];
            p.add_constraint(net, ComparisonOp::Le, a.demand_mw + limit);
            p.add_constraint(net, ComparisonOp::Ge, a.demand_mw - limit);
        }
    }
    p.solve().expect("reference LP solves").objective()
}

/// Random network cases with up to `max_areas` areas and `max_lines` lines.
pub fn arb_case(max_areas: usize, max_lines: usize) -> impl Strategy<Value = NetworkCase> {
    (2usize..=max_areas).prop_flat_map(move |n| {
        (
            proptest::collection::vec((0u32..300, 0u32..300, prop::option::weighted(0.3, 0u32..200)), n),
            proptest::collection::vec((0..n, 0..n, 0u32..20, 0u32..150, 0u32..150), 0..=max_lines),
        )
            .prop_map(move |(ad, ls)| {
                let gen: Vec<f64> = ad.iter().map(|a| a.0 as f64).collect();
                let dem: Vec<f64> = ad.iter().map(|a| a.1 as f64).collect();
                let mut case = NetworkCase::isolated(&gen, &dem);
                for (a, (_, _, limit)) in case.areas.iter_mut().zip(&ad) {
                    if let Some(l) = limit {
                        a.sum_flows_limit_mw = *l as f64;
                    }
                }
                for (f, t, b, c1, c2) in ls {
                    if f != t {
                        case = case.with_line(f, t, b as f64 / 4.0, c1 as f64, c2 as f64);
                    }
                }
                case
            })
    })
}

fn area_name(i: usize) -> String {
    format!("R{}", i + 1)
}

fn arb_config(n_areas: usize) -> impl Strategy<Value = SimConfig> {
    (
        1u64..1_000_000,
        any::<bool>(),
        (1u32..12, 1u32..12, 1u32..12),
        any::<bool>(),
        1..=n_areas,
        0u32..3,
        1u32..500,
        1u32..10_000,
        any::<bool>(),
        proptest::collection::vec(0u32..100, 10),
    )
        .prop_map(|(seed, ls, (a, b, c), pool, kvl, kvs, cvt, fin, daily, opaque)| {
            let w1 = a;
            let w2 = w1 + b;
            let w3 = w2 + c;
            SimConfig {
                seed,
                loss_sharing: if ls { LossSharing::LossSharing } else { LossSharing::NonLossSharing },
                season_end_weeks: [w1, w2, w3],
                convergence_scope: if pool { ConvergenceScope::Pool } else { ConvergenceScope::FixedArea },
                convergence_area: kvl,
                convergence_index: [ReliabilityIndex::Hlole, ReliabilityIndex::Lole, ReliabilityIndex::Eue][kvs as usize],
                cvt: cvt as f64 / 1000.0,
                fin,
                collection_frequency: if daily { CollectionFrequency::DailyPeak } else { CollectionFrequency::Hourly },
                opaque: narp::card_io::OPAQUE_ZZMC_FIELDS
                    .iter()
                    .zip(opaque)
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect::<BTreeMap<_, _>>(),
            }
        })
}

fn arb_area(i: usize) -> impl Strategy<Value = Area> {
    (1u32..5000, 0u32..150, 1u32..30, 20u32..53, prop::option::of((0u32..10, 0u32..5)), 0u32..50_000).prop_map(
        move |(peak, lfu, beg, end, forb, sf)| {
            let window = WeekRange::new(beg.min(end), end.max(beg));
            let forbidden_period = forb.and_then(|(off, len)| {
                let b = window.beg + off;
                let e = b + len;
                (e <= window.end).then(|| WeekRange::new(b, e))
            });
            Area {
                sn: i as u32 + 1,
                name: area_name(i),
                peak_mw: peak as f64,
                lfu_pct: lfu as f64 / 10.0,
                outage_window: window,
                forbidden_period,
                sum_flows_limit: sf as f64,
            }
        },
    )
}

fn arb_unit(n_areas: usize) -> impl Strategy<Value = (usize, GenUnit)> {
    (
        0..n_areas,
        proptest::collection::vec(0u32..1000, 4),
        0u32..300,
        0u32..300,
        0u32..=100,
        any::<bool>(),
        ((1u32..20, 0u32..4), (30u32..40, 0u32..4)),
        prop::option::of(1u32..500),
    )
        .prop_map(|(area, caps, dfor, for_, der, pre, ((b1, d1), (b2, d2)), mdt)| {
            let scheduling = if pre { SchedulingMode::Predetermined } else { SchedulingMode::Automatic };
            let unit = GenUnit {
                sn: 0,
                name: String::new(),
                location: area_name(area),
                cap_by_season: [caps[0] as f64, caps[1] as f64, caps[2] as f64, caps[3] as f64 / 2.0],
                dfor: dfor as f64 / 1000.0,
                for_rate: for_ as f64 / 1000.0,
                der_pct: der as f64,
                scheduling,
                outages: [
                    PlannedOutage { beg_week: b1, duration_weeks: d1 },
                    PlannedOutage { beg_week: b2, duration_weeks: d2 },
                ],
                mean_down_time_h: mdt.map(|h| h as f64),
            };
            (area, unit)
        })
}

fn arb_line_states() -> impl Strategy<Value = Vec<LineState>> {
    proptest::collection::vec((-500i32..0, 0u32..800, 0u32..800, 1u32..100), 1..=6).prop_map(|raw| {
        let total: u32 = raw.iter().map(|r| r.3).sum();
        let mut states: Vec<LineState> = raw
            .iter()
            .map(|&(adm, f, r, w)| LineState {
                admittance: adm as f64,
                cap_fwd_mw: f as f64,
                cap_rev_mw: r as f64,
                probability: (w as f64 / total as f64 * 1e4).floor() / 1e4,
            })
            .collect();
        let rest: f64 = states[1..].iter().map(|s| s.probability).sum();
        states[0].probability = ((1.0 - rest) * 1e4).round() / 1e4;
        states
    })
}

fn arb_profile() -> impl Strategy<Value = LoadProfile> {
    (
        proptest::collection::vec(1u32..=100, 52),
        0usize..52,
        proptest::collection::vec(1u32..=100, 7),
        proptest::collection::vec(1u32..=100, 96),
    )
        .prop_map(|(w, peak, d, h)| {
            let mut weekly_pct = [0.0; 52];
            for (k, v) in w.iter().enumerate() {
                weekly_pct[k] = *v as f64;
            }
            weekly_pct[peak] = 100.0;
            let mut daily_pct = [0.0; 7];
            for (k, v) in d.iter().enumerate() {
                daily_pct[k] = *v as f64;
            }
            let mut hourly = [[0.0; 24]; 4];
            for (k, v) in h.iter().enumerate() {
                hourly[k / 24][k % 24] = *v as f64;
            }
            LoadProfile { weekly_pct, daily_pct, hourly_pct_by_season: hourly }
        })
}

/// Random decks that pass validation.
pub fn arb_deck() -> impl Strategy<Value = Deck> {
    (1usize..=5).prop_flat_map(|n| {
        let areas = (0..n).map(arb_area).collect::<Vec<_>>();
        (
            arb_config(n),
            areas,
            proptest::collection::vec(arb_unit(n), 1..12),
            proptest::collection::vec((0..n, 0..n, arb_line_states()), 0..6),
            proptest::collection::vec((0..n, 0..n, 1u32..300, 0u32..100, 0u32..2000), 0..4),
            proptest::collection::vec((any::<prop::sample::Index>(), proptest::collection::vec(0u32..10, n)), 0..3),
            prop::option::of((arb_profile(), proptest::collection::vec((0..n, arb_profile()), 0..3))),
        )
            .prop_map(move |(config, areas, units, lines, contracts, owners, load)| {
                let units: Vec<GenUnit> = units
                    .into_iter()
                    .enumerate()
                    .map(|(k, (area, mut u))| {
                        u.sn = k as u32 + 1;
                        u.name = format!("U{}{:02}{:02}", area + 1, k / 100 + 1, k % 100);
                        u.name.truncate(6);
                        u
                    })
                    .collect();
                let lines = lines
                    .into_iter()
                    .filter(|(f, t, _)| f != t)
                    .enumerate()
                    .map(|(k, (f, t, states))| TieLine {
                        sn: k as u32 + 1,
                        line_number: k as u32 + 1,
                        from_area: area_name(f),
                        to_area: area_name(t),
                        states,
                    })
                    .collect();
                let contracts = contracts
                    .into_iter()
                    .filter(|c| c.0 != c.1)
                    .enumerate()
                    .map(|(k, (f, t, beg, len, mw))| FirmContract {
                        sn: k as u32 + 1,
                        from_area: area_name(f),
                        to_area: area_name(t),
                        beg_day: beg,
                        end_day: (beg + len).min(364),
                        mw: mw as f64 / 2.0,
                    })
                    .collect();
                let ownerships = owners
                    .into_iter()
                    .enumerate()
                    .map(|(k, (idx, weights))| {
                        let total: u32 = weights.iter().sum::<u32>().max(1);
                        let mut shares: Vec<f64> = weights.iter().map(|&w| (w * 100 / total) as f64).collect();
                        let rest: f64 = shares[1..].iter().sum();
                        shares[0] = 100.0 - rest;
                        Ownership { sn: k as u32 + 1, unit_name: units[idx.index(units.len())].name.clone(), shares_pct: shares }
                    })
                    .collect();
                let load_card = load.map(|(shared, per)| {
                    let mut per_area: Vec<(String, LoadProfile)> = Vec::new();
                    for (a, p) in per {
                        if !per_area.iter().any(|(name, _)| *name == area_name(a)) {
                            per_area.push((area_name(a), p));
                        }
                    }
                    LoadModel { shared, per_area }
                });
                let model = SystemModel { areas, units, lines, contracts, ownerships, load_card };
                Deck { model, config }
            })
    })
}
