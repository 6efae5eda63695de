//! Runs the fixture batch and scores it against the gold annotations.
//!
//! ```text
//! cargo run --release --example evaluate -- [fixtures-dir] [jobs]
//! ```

use std::path::PathBuf;

use ktpx::commands::{evaluate_dir, run_batch};
use ktpx::pipeline::{Pipeline, PipelineConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let jobs = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let out = tempfile::tempdir()?;

    let pipeline = Pipeline::new(PipelineConfig::default())?;
    let summary = run_batch(&pipeline, &dir, jobs, Some(out.path()))?;
    println!(
        "{} cards, mean {:.1} ms per card, {:.1} ms excluding word reading\n",
        summary.total, summary.mean_latency_ms, summary.mean_excluded_ms
    );
    let report = evaluate_dir(&dir.join("gold.json"), out.path())?;
    print!("{}", report.table());
    Ok(())
}
