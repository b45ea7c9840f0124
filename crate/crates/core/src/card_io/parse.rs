use std::collections::{BTreeMap, HashSet};

use super::model::*;
use super::tokens::{is_data_line, tokenize, Token};
use super::{CardError, Deck, DeckFormat};

type Rows = Vec<Vec<Token>>;

/// Parse a whole deck held in one string.
pub fn parse_deck(text: &str, format: DeckFormat) -> Result<Deck, CardError> {
    let mut sections = BTreeMap::new();
    split_sections(text, format, None, &mut sections)?;
    build_deck(sections)
}

/// Parse a deck from raw bytes, which must decode as UTF-8.
pub fn parse_deck_bytes(bytes: &[u8], format: DeckFormat) -> Result<Deck, CardError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CardError::Encoding(e.valid_up_to()))?;
    parse_deck(text, format)
}

/// Parse a deck stored as one text per card (the `ZZxx.csv` layout). Each
/// text may omit its sentinel line.
pub fn parse_card_set(cards: &[(CardKind, String)], format: DeckFormat) -> Result<Deck, CardError> {
    let mut sections = BTreeMap::new();
    for (kind, text) in cards {
        split_sections(text, format, Some(*kind), &mut sections)?;
    }
    build_deck(sections)
}

pub(crate) fn parse_load_card_text(text: &str) -> Result<LoadModel, CardError> {
    let mut sections = BTreeMap::new();
    split_sections(text, DeckFormat::Txt, None, &mut sections)?;
    let rows = sections.remove(&CardKind::Zzlp).ok_or(CardError::MissingCard(CardKind::Zzlp))?;
    parse_zzlp(&rows)
}

fn sentinel(tokens: &[Token]) -> Option<&str> {
    match tokens {
        [t] if t.quote.is_none() && t.text.len() == 4 && t.text.starts_with("ZZ") => Some(&t.text),
        _ => None,
    }
}

fn split_sections(
    text: &str,
    format: DeckFormat,
    implicit: Option<CardKind>,
    sections: &mut BTreeMap<CardKind, Rows>,
) -> Result<(), CardError> {
    let mut current = implicit;
    if let Some(kind) = implicit {
        if sections.insert(kind, Vec::new()).is_some() {
            return Err(CardError::malformed(kind, 0, "card appears twice"));
        }
    }
    for line in text.lines().filter(|l| is_data_line(l)) {
        let label = current.map_or("DECK", CardKind::label);
        let row_no = current.map_or(0, |k| sections[&k].len() + 1);
        let tokens = tokenize(line, format).map_err(|reason| CardError::malformed(label, row_no, reason))?;
        if let Some(name) = sentinel(&tokens) {
            let kind = CardKind::from_label(name)
                .ok_or_else(|| CardError::malformed(name, 0, format!("unknown card {name}")))?;
            if Some(kind) == implicit && sections[&kind].is_empty() {
                continue;
            }
            if sections.insert(kind, Vec::new()).is_some() {
                return Err(CardError::malformed(kind, 0, "card appears twice"));
            }
            current = Some(kind);
            continue;
        }
        match current {
            Some(kind) => sections.get_mut(&kind).expect("section exists").push(tokens),
            None => return Err(CardError::malformed("DECK", 0, "data before the first card header")),
        }
    }
    Ok(())
}

/// Sequential reader over the fields of one row.
struct Fields<'a> {
    card: CardKind,
    row: usize,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Fields<'a> {
    fn new(card: CardKind, row: usize, toks: &'a [Token]) -> Self {
        Fields { card, row, toks, pos: 0 }
    }

    fn err(&self, reason: impl Into<String>) -> CardError {
        CardError::malformed(self.card, self.row, reason)
    }

    fn remaining(&self) -> usize {
        self.toks.len() - self.pos
    }

    fn raw(&mut self, what: &str) -> Result<&'a Token, CardError> {
        let tok = self.toks.get(self.pos).ok_or_else(|| self.err(format!("missing {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn int(&mut self, what: &str) -> Result<u32, CardError> {
        let tok = self.raw(what)?;
        parse_int(&tok.text).ok_or_else(|| self.err(format!("{what}: '{}' is not a non-negative integer", tok.text)))
    }

    fn real(&mut self, what: &str) -> Result<f64, CardError> {
        let tok = self.raw(what)?;
        parse_real(&tok.text).ok_or_else(|| self.err(format!("{what}: '{}' is not a finite number", tok.text)))
    }

    fn name(&mut self, what: &str) -> Result<String, CardError> {
        let tok = self.raw(what)?;
        if tok.text.is_empty() {
            return Err(self.err(format!("{what} is empty")));
        }
        Ok(tok.text.clone())
    }

    fn finish(&self) -> Result<(), CardError> {
        if self.pos < self.toks.len() {
            return Err(self.err(format!("{} unexpected trailing field(s)", self.toks.len() - self.pos)));
        }
        Ok(())
    }
}

fn parse_int(text: &str) -> Option<u32> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

fn parse_real(text: &str) -> Option<f64> {
    let ok = !text.is_empty()
        && text.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'));
    if !ok {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn build_deck(mut sections: BTreeMap<CardKind, Rows>) -> Result<Deck, CardError> {
    for kind in CardKind::ALL {
        if !kind.is_optional() && !sections.contains_key(&kind) {
            return Err(CardError::MissingCard(kind));
        }
    }
    let mut take = |k: CardKind| sections.remove(&k).unwrap_or_default();
    let config = parse_zzmc(&take(CardKind::Zzmc))?;
    let mut areas = take(CardKind::Zzld)
        .iter()
        .enumerate()
        .map(|(i, r)| parse_area(i + 1, r))
        .collect::<Result<Vec<_>, _>>()?;
    areas.sort_by_key(|a| a.sn);
    let units = take(CardKind::Zzud).iter().enumerate().map(|(i, r)| parse_unit(i + 1, r)).collect::<Result<_, _>>()?;
    let contracts =
        take(CardKind::Zzfc).iter().enumerate().map(|(i, r)| parse_contract(i + 1, r)).collect::<Result<_, _>>()?;
    let ownerships =
        take(CardKind::Zzod).iter().enumerate().map(|(i, r)| parse_ownership(i + 1, r)).collect::<Result<_, _>>()?;
    let lines = take(CardKind::Zztd).iter().enumerate().map(|(i, r)| parse_line(i + 1, r)).collect::<Result<_, _>>()?;
    let lp_rows = sections.remove(&CardKind::Zzlp);
    let load_card = lp_rows.map(|rows| parse_zzlp(&rows)).transpose()?;

    let model = SystemModel { areas, units, lines, contracts, ownerships, load_card };
    cross_reference(&model)?;
    Ok(Deck { model, config })
}

fn parse_zzmc(rows: &Rows) -> Result<SimConfig, CardError> {
    let toks: Vec<Token> = rows.iter().flatten().cloned().collect();
    if toks.len() != ZZMC_COLUMNS.len() {
        return Err(CardError::malformed(
            CardKind::Zzmc,
            1,
            format!("expected {} fields, found {}", ZZMC_COLUMNS.len(), toks.len()),
        ));
    }
    let mut f = Fields::new(CardKind::Zzmc, 1, &toks);
    let mut opaque = BTreeMap::new();
    let mut cfg = SimConfig::default();
    for col in ZZMC_COLUMNS {
        if OPAQUE_ZZMC_FIELDS.contains(&col) {
            let tok = f.raw(col)?;
            if tok.quote.is_some() {
                return Err(f.err(format!("{col} must not be quoted")));
            }
            opaque.insert(col.to_string(), tok.text.clone());
            continue;
        }
        match col {
            "SEED" => {
                let tok = f.raw(col)?;
                let digits = !tok.text.is_empty() && tok.text.bytes().all(|b| b.is_ascii_digit());
                cfg.seed = tok
                    .text
                    .parse::<u64>()
                    .ok()
                    .filter(|_| digits)
                    .ok_or_else(|| f.err(format!("SEED: '{}' is not a positive integer", tok.text)))?;
            }
            "LS" => {
                let v = f.int(col)?;
                cfg.loss_sharing = LossSharing::from_code(v).ok_or_else(|| f.err(format!("LS must be 0 or 1, got {v}")))?;
            }
            "W1" => cfg.season_end_weeks[0] = f.int(col)?,
            "W2" => cfg.season_end_weeks[1] = f.int(col)?,
            "W3" => cfg.season_end_weeks[2] = f.int(col)?,
            "WHERE" => {
                let v = f.int(col)?;
                cfg.convergence_scope =
                    ConvergenceScope::from_code(v).ok_or_else(|| f.err(format!("WHERE must be 0 or 1, got {v}")))?;
            }
            "KVS" => {
                let v = f.int(col)?;
                cfg.convergence_index =
                    ReliabilityIndex::from_code(v).ok_or_else(|| f.err(format!("KVS must be 1, 2 or 3, got {v}")))?;
            }
            "KVL" => cfg.convergence_area = f.int(col)? as usize,
            "CVT" => cfg.cvt = f.real(col)?,
            "FIN" => cfg.fin = f.int(col)?,
            "FREQ" => {
                let v = f.int(col)?;
                cfg.collection_frequency =
                    CollectionFrequency::from_code(v).ok_or_else(|| f.err(format!("FREQ must be 1 or 2, got {v}")))?;
            }
            _ => unreachable!("unhandled ZZMC column {col}"),
        }
    }
    cfg.opaque = opaque;
    Ok(cfg)
}

fn parse_area(row: usize, toks: &[Token]) -> Result<Area, CardError> {
    let mut f = Fields::new(CardKind::Zzld, row, toks);
    let sn = f.int("SN")?;
    let name = f.name("AREA NAME")?;
    let peak_mw = f.real("PEAK")?;
    let lfu_pct = f.real("LFU")?;
    let outage_window = WeekRange::new(f.int("outage window BEG WK")?, f.int("outage window END WK")?);
    let fb = f.int("forbidden BEG WK")?;
    let fe = f.int("forbidden END WK")?;
    let forbidden_period = if fb == 0 && fe == 0 { None } else { Some(WeekRange::new(fb, fe)) };
    let sum_flows_limit = f.real("SUM OF FLOWS")?;
    f.finish()?;
    Ok(Area { sn, name, peak_mw, lfu_pct, outage_window, forbidden_period, sum_flows_limit })
}

fn parse_unit(row: usize, toks: &[Token]) -> Result<GenUnit, CardError> {
    let mut f = Fields::new(CardKind::Zzud, row, toks);
    let sn = f.int("SN")?;
    let name = f.name("UN NAME")?;
    let location = f.name("LOC")?;
    let mut cap_by_season = [0.0; 4];
    for (i, cap) in cap_by_season.iter_mut().enumerate() {
        *cap = f.real(&format!("CAP{}", i + 1))?;
    }
    let dfor = f.real("DFOR")?;
    let for_rate = f.real("FOR")?;
    let der_pct = f.real("DER")?;
    let pa = f.int("P/A")?;
    let scheduling = SchedulingMode::from_code(pa).ok_or_else(|| f.err(format!("P/A must be 0 or 1, got {pa}")))?;
    let o1 = PlannedOutage { beg_week: f.int("B1")?, duration_weeks: f.int("D1")? };
    let o2 = PlannedOutage { beg_week: f.int("B2")?, duration_weeks: f.int("D2")? };
    let mean_down_time_h = if f.remaining() > 0 { Some(f.real("mean down time")?) } else { None };
    f.finish()?;
    Ok(GenUnit {
        sn,
        name,
        location,
        cap_by_season,
        dfor,
        for_rate,
        der_pct,
        scheduling,
        outages: [o1, o2],
        mean_down_time_h,
    })
}

fn parse_contract(row: usize, toks: &[Token]) -> Result<FirmContract, CardError> {
    let mut f = Fields::new(CardKind::Zzfc, row, toks);
    let c = FirmContract {
        sn: f.int("SN")?,
        from_area: f.name("FROM AREA")?,
        to_area: f.name("TO AREA")?,
        beg_day: f.int("BEG DAY")?,
        end_day: f.int("END DAY")?,
        mw: f.real("MW")?,
    };
    f.finish()?;
    Ok(c)
}

const SHARE_TOLERANCE: f64 = 1e-6;

fn parse_ownership(row: usize, toks: &[Token]) -> Result<Ownership, CardError> {
    let mut f = Fields::new(CardKind::Zzod, row, toks);
    let sn = f.int("SN")?;
    let unit_name = f.name("UNIT NAME")?;
    let mut shares_pct = Vec::new();
    while f.remaining() > 0 {
        shares_pct.push(f.real("share")?);
    }
    if shares_pct.is_empty() {
        return Err(f.err("no ownership shares"));
    }
    let sum: f64 = shares_pct.iter().sum();
    if (sum - 100.0).abs() > SHARE_TOLERANCE {
        return Err(f.err("shares sum ≠ 100"));
    }
    Ok(Ownership { sn, unit_name, shares_pct })
}

fn parse_line(row: usize, toks: &[Token]) -> Result<TieLine, CardError> {
    let mut f = Fields::new(CardKind::Zztd, row, toks);
    let sn = f.int("SN")?;
    let line_number = f.int("LINE NUMBER")?;
    let from_area = f.name("FROM AREA")?;
    let to_area = f.name("TO AREA")?;
    let mut values = Vec::new();
    while f.remaining() > 0 {
        let tok = f.raw("META DATA")?;
        if tok.quote.is_some() {
            for part in tok.text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                values.push(parse_real(part).ok_or_else(|| f.err(format!("META DATA: '{part}' is not a number")))?);
            }
        } else {
            values.push(parse_real(&tok.text).ok_or_else(|| f.err(format!("META DATA: '{}' is not a number", tok.text)))?);
        }
    }
    if values.is_empty() || values.len() % 4 != 0 || values.len() > 24 {
        return Err(f.err(format!("META DATA must hold 1 to 6 groups of 4 values, found {} values", values.len())));
    }
    let states = values
        .chunks_exact(4)
        .map(|c| LineState { admittance: c[0], cap_fwd_mw: c[1], cap_rev_mw: c[2], probability: c[3] })
        .collect();
    Ok(TieLine { sn, line_number, from_area, to_area, states })
}

fn parse_zzlp(rows: &Rows) -> Result<LoadModel, CardError> {
    #[derive(Default)]
    struct Partial {
        weekly: Option<[f64; 52]>,
        daily: Option<[f64; 7]>,
        hourly: [Option<[f64; 24]>; 4],
    }
    let mut order: Vec<String> = Vec::new();
    let mut parts: BTreeMap<String, Partial> = BTreeMap::new();
    for (i, toks) in rows.iter().enumerate() {
        let mut f = Fields::new(CardKind::Zzlp, i + 1, toks);
        let kind = f.name("KIND")?;
        let area = f.name("AREA")?;
        let mut vals = Vec::new();
        while f.remaining() > 0 {
            vals.push(f.real("percentage")?);
        }
        if !parts.contains_key(&area) {
            order.push(area.clone());
        }
        let p = parts.entry(area).or_default();
        let want = |n: usize| -> Result<(), CardError> {
            if vals.len() == n {
                Ok(())
            } else {
                Err(f.err(format!("{kind} needs {n} values, found {}", vals.len())))
            }
        };
        let dup = || f.err(format!("{kind} given twice for the same area"));
        match kind.as_str() {
            "WEEKLY" => {
                want(52)?;
                if p.weekly.replace(vals.clone().try_into().unwrap()).is_some() {
                    return Err(dup());
                }
            }
            "DAILY" => {
                want(7)?;
                if p.daily.replace(vals.clone().try_into().unwrap()).is_some() {
                    return Err(dup());
                }
            }
            "HOURLY1" | "HOURLY2" | "HOURLY3" | "HOURLY4" => {
                want(24)?;
                let s = (kind.as_bytes()[6] - b'1') as usize;
                if p.hourly[s].replace(vals.clone().try_into().unwrap()).is_some() {
                    return Err(dup());
                }
            }
            other => return Err(f.err(format!("unknown load-shape row kind {other}"))),
        }
    }
    let mut complete = |area: &str| -> Result<LoadProfile, CardError> {
        let p = parts.remove(area).expect("area present");
        let missing = || CardError::malformed(CardKind::Zzlp, 0, format!("incomplete load shape for '{area}'"));
        let mut hourly = [[0.0; 24]; 4];
        for (dst, src) in hourly.iter_mut().zip(p.hourly) {
            *dst = src.ok_or_else(missing)?;
        }
        Ok(LoadProfile {
            weekly_pct: p.weekly.ok_or_else(missing)?,
            daily_pct: p.daily.ok_or_else(missing)?,
            hourly_pct_by_season: hourly,
        })
    };
    if !order.iter().any(|a| a == "*") {
        return Err(CardError::malformed(CardKind::Zzlp, 0, "no shared ('*') load shape"));
    }
    let shared = complete("*")?;
    let mut per_area = Vec::new();
    for area in order.iter().filter(|a| *a != "*") {
        per_area.push((area.clone(), complete(area)?));
    }
    Ok(LoadModel { shared, per_area })
}

fn cross_reference(m: &SystemModel) -> Result<(), CardError> {
    let mut seen = HashSet::new();
    for a in &m.areas {
        if !seen.insert(a.name.as_str()) {
            return Err(CardError::DuplicateName(a.name.clone()));
        }
    }
    let mut seen_units = HashSet::new();
    for u in &m.units {
        if !seen_units.insert(u.name.as_str()) {
            return Err(CardError::DuplicateName(u.name.clone()));
        }
    }
    let area = |entity: String, name: &str| -> Result<(), CardError> {
        if seen.contains(name) {
            Ok(())
        } else {
            Err(CardError::DanglingReference { entity, name: name.to_string() })
        }
    };
    for u in &m.units {
        area(format!("unit {} location", u.name), &u.location)?;
    }
    for l in &m.lines {
        area(format!("line {} from-area", l.line_number), &l.from_area)?;
        area(format!("line {} to-area", l.line_number), &l.to_area)?;
    }
    for c in &m.contracts {
        area(format!("contract {} from-area", c.sn), &c.from_area)?;
        area(format!("contract {} to-area", c.sn), &c.to_area)?;
    }
    for o in &m.ownerships {
        if !seen_units.contains(o.unit_name.as_str()) {
            return Err(CardError::DanglingReference {
                entity: format!("ownership {}", o.sn),
                name: o.unit_name.clone(),
            });
        }
    }
    if let Some(lm) = &m.load_card {
        for (name, _) in &lm.per_area {
            area("load shape".to_string(), name)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_I_ROW: &str = "345237,1,13,26,39,1,1,1,2,1,0.025,9999,1,1,1000,0,0,1,5,1,1";

    fn minimal_deck(zzmc: &str, extra: &str) -> String {
        format!(
            "ZZMC\n{zzmc}\nZZLD\n1,'A1',3000,0,1,52,31,32,30000\n2,'A2',3000,0,1,52,0,0,30000\n\
             ZZUD\n1,'A10101','A1',12,12,12,12,0,0.02,0,0,0,0,0,0,0\n\
             ZZTD\n1,1,'A1','A2',\"-120, 300, 300, 0.9216, -60, 150, 150, 0.0768, 0, 0, 0, 0.0016, -80, 150, 150, 0.0000, -40, 100, 100, 0.0000, -20, 50, 50, 0.0000\"\n{extra}"
        )
    }

    #[test]
    fn zzmc_table_row() {
        let deck = parse_deck(&minimal_deck(TABLE_I_ROW, ""), DeckFormat::Csv).unwrap();
        let c = &deck.config;
        assert_eq!(c.seed, 345237);
        assert_eq!(c.loss_sharing, LossSharing::NonLossSharing);
        assert_eq!(c.season_end_weeks, [13, 26, 39]);
        assert_eq!(c.cvt, 0.025);
        assert_eq!(c.fin, 9999);
        assert_eq!(c.convergence_scope, ConvergenceScope::Pool);
        assert_eq!(c.convergence_index, ReliabilityIndex::Hlole);
        assert_eq!(c.collection_frequency, CollectionFrequency::Hourly);
        assert_eq!(c.opaque["MAXE"], "1000");
        assert_eq!(c.opaque["KVT"], "2");
    }

    #[test]
    fn zztd_meta_string() {
        let deck = parse_deck(&minimal_deck(TABLE_I_ROW, ""), DeckFormat::Csv).unwrap();
        let line = &deck.model.lines[0];
        assert_eq!(line.states.len(), 6);
        assert_eq!(
            line.states[0],
            LineState { admittance: -120.0, cap_fwd_mw: 300.0, cap_rev_mw: 300.0, probability: 0.9216 }
        );
        assert_eq!(line.states[2].cap_fwd_mw, 0.0);
    }

    #[test]
    fn table_ii_and_iii_rows() {
        let deck = parse_deck(&minimal_deck(TABLE_I_ROW, ""), DeckFormat::Csv).unwrap();
        let a = &deck.model.areas[0];
        assert_eq!(a.name, "A1");
        assert_eq!(a.forbidden_period, Some(WeekRange::new(31, 32)));
        assert_eq!(deck.model.areas[1].forbidden_period, None);
        let u = &deck.model.units[0];
        assert_eq!(u.plant_id(), "A101");
        assert_eq!(u.for_rate, 0.02);
        assert_eq!(u.mean_down_time_h, Some(0.0));
        assert_eq!(u.effective_mean_down_time(48.0), 48.0);
    }

    #[test]
    fn ownership_sum_must_be_100() {
        let text = minimal_deck(TABLE_I_ROW, "ZZOD\n1,'A10101',49,50\n");
        let err = parse_deck(&text, DeckFormat::Csv).unwrap_err();
        assert_eq!(err, CardError::malformed("ZZOD", 1, "shares sum ≠ 100"));
    }

    #[test]
    fn missing_and_dangling() {
        let no_td = "ZZMC\n345237 1 13 26 39 1 1 1 2 1 0.025 9999 1 1 1000 0 0 1 5 1 1\nZZLD\n1 'A1' 3000 0 1 52 0 0 100\nZZUD\n";
        assert_eq!(parse_deck(no_td, DeckFormat::Txt).unwrap_err(), CardError::MissingCard(CardKind::Zztd));
        let text = minimal_deck(TABLE_I_ROW, "ZZFC\n1,'A1','A9',14,15,630\n");
        assert!(matches!(
            parse_deck(&text, DeckFormat::Csv).unwrap_err(),
            CardError::DanglingReference { name, .. } if name == "A9"
        ));
    }

    #[test]
    fn duplicate_area_name() {
        let text = minimal_deck(TABLE_I_ROW, "").replace("2,'A2'", "2,'A1'");
        assert_eq!(parse_deck(&text, DeckFormat::Csv).unwrap_err(), CardError::DuplicateName("A1".into()));
    }

    #[test]
    fn malformed_number_reports_row() {
        let text = minimal_deck(TABLE_I_ROW, "").replace("2,'A2',3000", "2,'A2',30x0");
        match parse_deck(&text, DeckFormat::Csv).unwrap_err() {
            CardError::MalformedRow { card, row, .. } => {
                assert_eq!(card, "ZZLD");
                assert_eq!(row, 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn areas_sorted_by_serial_number() {
        let text = minimal_deck(TABLE_I_ROW, "")
            .replace("1,'A1',3000,0,1,52,31,32,30000\n2,'A2'", "2,'A2'")
            .replace("0,0,30000\nZZUD", "0,0,30000\n1,'A1',3000,0,1,52,31,32,30000\nZZUD");
        let deck = parse_deck(&text, DeckFormat::Csv).unwrap();
        assert_eq!(deck.model.areas[0].name, "A1");
    }

    #[test]
    fn default_load_card_is_rts79() {
        let p = LoadProfile::rts79();
        assert_eq!(p.weekly_pct[50], 100.0);
        assert_eq!(p.daily_pct[1], 100.0);
        assert_eq!(p.hourly_pct_by_season[0][17], 100.0);
    }
}
