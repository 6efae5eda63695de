//! Reads an engine word dump and prints each line with its confidence.
//!
//! ```text
//! cargo run --example parse_dump -- [dump.tsv]
//! ```

use std::path::PathBuf;

use ktpx::ocr::parse_word_dump;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/card01.tsv"));
    let doc = parse_word_dump(&std::fs::read_to_string(&path)?)?;
    for line in &doc.lines {
        let confs: Vec<String> = line.words().iter().map(|w| w.confidence.to_string()).collect();
        println!(
            "{:>3}  {:<48} [{}]",
            line.line_confidence(),
            line.text(),
            confs.join(" ")
        );
    }
    println!("{} lines, {} words", doc.lines.len(), doc.words().count());
    Ok(())
}
