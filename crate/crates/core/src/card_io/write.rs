use std::fmt::Write as _;

use super::model::*;
use super::DeckFormat;

fn real(v: f64) -> String {
    format!("{v}")
}

fn quoted(name: &str) -> String {
    format!("'{name}'")
}

struct Card {
    kind: CardKind,
    /// Comment lines and data rows in output order.
    lines: Vec<Line>,
}

enum Line {
    Comment(String),
    Row(Vec<String>),
}

impl Card {
    fn new(kind: CardKind) -> Self {
        Card { kind, lines: Vec::new() }
    }

    fn comment(&mut self, text: &str) {
        self.lines.push(Line::Comment(text.to_string()));
    }

    fn row(&mut self, fields: Vec<String>) {
        self.lines.push(Line::Row(fields));
    }

    fn render(&self, format: DeckFormat, sentinel: bool) -> String {
        let mut out = String::new();
        if sentinel {
            out.push_str(self.kind.label());
            out.push('\n');
        }
        let mut widths: Vec<usize> = Vec::new();
        for line in &self.lines {
            if let Line::Row(fields) = line {
                for (i, f) in fields.iter().enumerate() {
                    if widths.len() <= i {
                        widths.push(0);
                    }
                    widths[i] = widths[i].max(f.len());
                }
            }
        }
        for line in &self.lines {
            match line {
                Line::Comment(text) => {
                    let _ = writeln!(out, "# {text}");
                }
                Line::Row(fields) => {
                    let joined = match format {
                        DeckFormat::Csv => fields.join(","),
                        DeckFormat::Txt => {
                            let mut s = String::new();
                            for (i, f) in fields.iter().enumerate() {
                                if i + 1 == fields.len() {
                                    s.push_str(f);
                                } else {
                                    let _ = write!(s, "{:<w$}  ", f, w = widths[i]);
                                }
                            }
                            s
                        }
                    };
                    out.push_str(&joined);
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn cards(model: &SystemModel, config: &SimConfig, format: DeckFormat) -> Vec<Card> {
    let mut cards = Vec::new();

    let mut mc = Card::new(CardKind::Zzmc);
    let values: Vec<String> = ZZMC_COLUMNS
        .iter()
        .map(|&col| match col {
            "SEED" => config.seed.to_string(),
            "LS" => config.loss_sharing.code().to_string(),
            "W1" => config.season_end_weeks[0].to_string(),
            "W2" => config.season_end_weeks[1].to_string(),
            "W3" => config.season_end_weeks[2].to_string(),
            "WHERE" => config.convergence_scope.code().to_string(),
            "KVS" => config.convergence_index.code().to_string(),
            "KVL" => config.convergence_area.to_string(),
            "CVT" => real(config.cvt),
            "FIN" => config.fin.to_string(),
            "FREQ" => config.collection_frequency.code().to_string(),
            other => config.opaque.get(other).cloned().unwrap_or_else(|| "0".to_string()),
        })
        .collect();
    match format {
        DeckFormat::Txt => {
            mc.comment(&ZZMC_COLUMNS[..10].join(" "));
            mc.row(values[..10].to_vec());
            mc.comment(&ZZMC_COLUMNS[10..].join(" "));
            mc.row(values[10..].to_vec());
        }
        DeckFormat::Csv => {
            mc.comment(&ZZMC_COLUMNS.join(","));
            mc.row(values);
        }
    }
    cards.push(mc);

    let mut ld = Card::new(CardKind::Zzld);
    ld.comment("SN AREA PEAK LFU WIN_BEG WIN_END FORB_BEG FORB_END SUM_FLOWS");
    for a in &model.areas {
        let (fb, fe) = a.forbidden_period.map_or((0, 0), |r| (r.beg, r.end));
        ld.row(vec![
            a.sn.to_string(),
            quoted(&a.name),
            real(a.peak_mw),
            real(a.lfu_pct),
            a.outage_window.beg.to_string(),
            a.outage_window.end.to_string(),
            fb.to_string(),
            fe.to_string(),
            real(a.sum_flows_limit),
        ]);
    }
    cards.push(ld);

    let mut ud = Card::new(CardKind::Zzud);
    ud.comment("SN NAME LOC CAP1 CAP2 CAP3 CAP4 DFOR FOR DER P/A B1 D1 B2 D2 [MDT_H]");
    for u in &model.units {
        let mut row = vec![u.sn.to_string(), quoted(&u.name), quoted(&u.location)];
        row.extend(u.cap_by_season.iter().map(|&c| real(c)));
        row.extend([real(u.dfor), real(u.for_rate), real(u.der_pct), u.scheduling.code().to_string()]);
        for o in &u.outages {
            row.push(o.beg_week.to_string());
            row.push(o.duration_weeks.to_string());
        }
        if let Some(h) = u.mean_down_time_h {
            row.push(real(h));
        }
        ud.row(row);
    }
    cards.push(ud);

    if !model.contracts.is_empty() {
        let mut fc = Card::new(CardKind::Zzfc);
        fc.comment("SN FROM TO BEG_DAY END_DAY MW");
        for c in &model.contracts {
            fc.row(vec![
                c.sn.to_string(),
                quoted(&c.from_area),
                quoted(&c.to_area),
                c.beg_day.to_string(),
                c.end_day.to_string(),
                real(c.mw),
            ]);
        }
        cards.push(fc);
    }

    if !model.ownerships.is_empty() {
        let mut od = Card::new(CardKind::Zzod);
        od.comment("SN UNIT PERCENT_OWNED_BY_AREA");
        for o in &model.ownerships {
            let shares: Vec<String> = o.shares_pct.iter().map(|&s| real(s)).collect();
            od.row(vec![o.sn.to_string(), quoted(&o.unit_name), shares.join(",")]);
        }
        cards.push(od);
    }

    let mut td = Card::new(CardKind::Zztd);
    td.comment("SN LINE FROM TO \"ADM, CAP, CAPR, PROBL, ...\"");
    for l in &model.lines {
        let meta: Vec<String> = l
            .states
            .iter()
            .flat_map(|s| [s.admittance, s.cap_fwd_mw, s.cap_rev_mw, s.probability])
            .map(real)
            .collect();
        td.row(vec![
            l.sn.to_string(),
            l.line_number.to_string(),
            quoted(&l.from_area),
            quoted(&l.to_area),
            format!("\"{}\"", meta.join(", ")),
        ]);
    }
    cards.push(td);

    if let Some(lm) = &model.load_card {
        let mut lp = Card::new(CardKind::Zzlp);
        lp.comment("KIND AREA PERCENTAGES");
        let profiles = std::iter::once(("*", &lm.shared)).chain(lm.per_area.iter().map(|(n, p)| (n.as_str(), p)));
        for (area, p) in profiles {
            let mut push = |kind: &str, vals: &[f64]| {
                let mut row = vec![kind.to_string(), quoted(area)];
                row.extend(vals.iter().map(|&v| real(v)));
                lp.row(row);
            };
            push("WEEKLY", &p.weekly_pct);
            push("DAILY", &p.daily_pct);
            for (s, h) in p.hourly_pct_by_season.iter().enumerate() {
                push(&format!("HOURLY{}", s + 1), h);
            }
        }
        cards.push(lp);
    }
    cards
}

/// Serialize a deck as one stream with card sentinel lines. Optional cards
/// with no rows are left out.
pub fn write_deck(model: &SystemModel, config: &SimConfig, format: DeckFormat) -> String {
    cards(model, config, format).iter().map(|c| c.render(format, true)).collect()
}

/// Serialize a deck as one csv text per card, named `ZZxx.csv`.
pub fn write_deck_files(model: &SystemModel, config: &SimConfig) -> Vec<(String, String)> {
    cards(model, config, DeckFormat::Csv)
        .iter()
        .map(|c| (format!("{}.csv", c.kind.label()), c.render(DeckFormat::Csv, false)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_io::{parse_card_set, parse_deck, Deck};

    #[test]
    fn table_ii_row_as_csv() {
        let deck = Deck::five_area();
        let text = write_deck(&deck.model, &deck.config, DeckFormat::Csv);
        let ld = text.split("ZZLD\n").nth(1).unwrap();
        let first = ld.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(first, "1,'A1',3000,0,1,52,31,32,30000");
    }

    #[test]
    fn optional_cards_are_omitted() {
        let mut deck = Deck::five_area();
        deck.model.contracts.clear();
        deck.model.ownerships.clear();
        let text = write_deck(&deck.model, &deck.config, DeckFormat::Txt);
        assert!(!text.contains("ZZFC"));
        assert!(!text.contains("ZZOD"));
        assert_eq!(parse_deck(&text, DeckFormat::Txt).unwrap(), deck);
    }

    #[test]
    fn bundled_deck_round_trips_in_both_formats() {
        let deck = Deck::five_area();
        for format in [DeckFormat::Txt, DeckFormat::Csv] {
            let first = write_deck(&deck.model, &deck.config, format);
            let reparsed = parse_deck(&first, format).unwrap();
            assert_eq!(reparsed, deck);
            let second = write_deck(&reparsed.model, &reparsed.config, format);
            assert_eq!(first, second);
        }
    }

    #[test]
    fn file_set_round_trip() {
        let deck = Deck::five_area();
        let files = write_deck_files(&deck.model, &deck.config);
        let cards: Vec<_> = files
            .iter()
            .map(|(name, text)| (CardKind::from_label(&name[..4]).unwrap(), text.clone()))
            .collect();
        assert_eq!(parse_card_set(&cards, DeckFormat::Csv).unwrap(), deck);
    }
}
