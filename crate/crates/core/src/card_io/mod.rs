//! Reading, validating and writing study decks.
//!
//! A deck is a set of data cards. It can be stored as one text file in which
//! each card starts with a sentinel line holding only its name (`ZZMC`,
//! `ZZLD`, ...), or as a directory holding one `ZZxx.csv` file per card.
//! Text decks separate columns with whitespace; csv decks with commas. Lines
//! starting with `#` are comments in both. Names are written in single quotes
//! and the ZZTD state list is one double-quoted string.
//!
//! Required cards: ZZMC, ZZLD, ZZUD, ZZTD. Optional: ZZFC, ZZOD and the ZZLP
//! load-shape card (the RTS-79 shape is used when it is absent).

mod model;
mod parse;
mod tokens;
mod validate;
mod write;

use std::path::Path;

use thiserror::Error;

pub use model::*;
pub use parse::{parse_card_set, parse_deck, parse_deck_bytes};
pub use validate::{validate_deck, Diagnostic, Location, Severity};
pub use write::{write_deck, write_deck_files};

/// The RTS-79 chronological load shape as a ZZLP card.
pub const DEFAULT_LOAD_CARD: &str = include_str!("../../data/rts79_load.txt");

/// The bundled five-area study deck.
pub const FIVE_AREA_DECK: &str = include_str!("../../data/five_area.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeckFormat {
    Txt,
    Csv,
}

impl DeckFormat {
    /// Guess from a file extension; anything but `.csv` is text.
    pub fn from_path(path: &Path) -> DeckFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DeckFormat::Csv,
            _ => DeckFormat::Txt,
        }
    }
}

/// A parsed study: the system and the simulation controls.
#[derive(Clone, Debug, PartialEq)]
pub struct Deck {
    pub model: SystemModel,
    pub config: SimConfig,
}

impl Deck {
    /// The bundled five-area deck.
    pub fn five_area() -> Deck {
        parse_deck(FIVE_AREA_DECK, DeckFormat::Txt).expect("bundled five-area deck parses")
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CardError {
    #[error("input is not valid UTF-8 text (byte offset {0})")]
    Encoding(usize),
    #[error("missing required card {0}")]
    MissingCard(CardKind),
    #[error("{card} row {row}: {reason}")]
    MalformedRow { card: String, row: usize, reason: String },
    #[error("{entity} refers to unknown name '{name}'")]
    DanglingReference { entity: String, name: String },
    #[error("duplicate name '{0}'")]
    DuplicateName(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CardError {
    pub(crate) fn malformed(card: impl ToString, row: usize, reason: impl Into<String>) -> Self {
        CardError::MalformedRow { card: card.to_string(), row, reason: reason.into() }
    }
}

/// Read a deck from a text/csv file or from a directory of `ZZxx.csv` files.
pub fn read_deck(path: &Path) -> Result<Deck, CardError> {
    if path.is_dir() {
        let mut cards = Vec::new();
        for kind in CardKind::ALL {
            let file = path.join(format!("{}.csv", kind.label()));
            if file.exists() {
                let text = std::fs::read_to_string(&file).map_err(|e| CardError::Io(format!("{}: {e}", file.display())))?;
                cards.push((kind, text));
            }
        }
        parse_card_set(&cards, DeckFormat::Csv)
    } else {
        let bytes = std::fs::read(path).map_err(|e| CardError::Io(format!("{}: {e}", path.display())))?;
        parse_deck_bytes(&bytes, DeckFormat::from_path(path))
    }
}
