//! Read a deck, list its diagnostics and check that it survives a write/read
//! cycle in both card formats.
//!
//! ```text
//! cargo run --example validate_deck [-- deck.txt]
//! ```

use std::path::PathBuf;

use narp::card_io::{parse_deck, validate_deck, write_deck, DeckFormat, Severity};
use narp::read_deck;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/five_area.txt"));
    let deck = read_deck(&path)?;
    let m = &deck.model;
    println!(
        "{}: {} areas, {} units, {} tie-lines, {} contracts, {} ownership records",
        path.display(),
        m.areas.len(),
        m.units.len(),
        m.lines.len(),
        m.contracts.len(),
        m.ownerships.len()
    );

    let diags = validate_deck(m, &deck.config);
    for d in &diags {
        println!("  {d}");
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    println!("{} diagnostics, {errors} errors", diags.len());

    for format in [DeckFormat::Txt, DeckFormat::Csv] {
        let text = write_deck(m, &deck.config, format);
        let back = parse_deck(&text, format)?;
        println!("{format:?} round trip: {} ({} bytes)", if back == deck { "identical" } else { "CHANGED" }, text.len());
    }
    Ok(())
}
