//! Full extraction of one card into the 37-key record.
//!
//! Uses the sibling `<stem>.tsv` word dump when present, otherwise runs the
//! OCR engine (`tesseract`, or the command in `KTPX_OCR_CMD`).
//!
//! ```text
//! cargo run --example extract_card -- [image]
//! ```

use std::path::PathBuf;

use ktpx::commands::sibling_dump;
use ktpx::pipeline::{Pipeline, PipelineConfig};

fn main() -> anyhow::Result<()> {
    let image = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/card02.png"));
    let dump = sibling_dump(&image).map(std::fs::read_to_string).transpose()?;
    let pipeline = Pipeline::new(PipelineConfig::default())?;
    let mut ex = pipeline.extract(&std::fs::read(&image)?, dump.as_deref())?;

    // keep the printout readable
    let shorten = |s: &mut String| {
        if s.len() > 40 {
            let n = s.len();
            s.truncate(32);
            s.push_str(&format!("...({n} chars)"));
        }
    };
    shorten(&mut ex.record.card_image);
    shorten(&mut ex.record.face_photo);
    println!("{}", ex.record.to_json());
    println!("flagged: {:?}", ex.flagged);
    println!(
        "{:.1} ms total, {:.1} ms reading words",
        ex.timing.total_ms, ex.timing.engine_ms
    );
    Ok(())
}
