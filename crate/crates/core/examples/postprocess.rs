//! Turns a word dump into named, repaired field values.
//!
//! ```text
//! cargo run --example postprocess -- [dump.tsv]
//! ```

use std::path::PathBuf;

use ktpx::ocr::parse_word_dump;
use ktpx::postproc::{parse_document_with_report, FieldGrammar};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/card10.tsv"));
    let doc = parse_word_dump(&std::fs::read_to_string(&path)?)?;
    let report = parse_document_with_report(&doc, &FieldGrammar::ktp());
    for f in &report.fields {
        let marker = if f.raw_text.trim() == f.value { " " } else { "*" };
        println!(
            "{marker} {:<16} {:>3}  {:<40} <- {}",
            f.field_name,
            f.confidence,
            f.value,
            f.raw_text.trim()
        );
    }
    println!(
        "{} fields, {} unclaimed lines, {} rejected, {} duplicates (* = repaired)",
        report.fields.len(),
        report.unclaimed_lines,
        report.rejected,
        report.duplicates
    );
    Ok(())
}
