//! Regenerates the synthetic fixture set.
//!
//! ```text
//! cargo run --example make_fixtures -- crates/core/fixtures
//! ```

use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let cards = ktpx::synth::write_fixtures(&dir)?;
    for c in &cards {
        println!(
            "{}  {:<7}  face at ({}, {}) {}px",
            c.card_id, c.gold.capture_kind, c.face.left, c.face.top, c.face.width
        );
    }
    println!(
        "wrote {} cards, gold.json and cascade.json to {}",
        cards.len(),
        dir.display()
    );
    Ok(())
}
