//! Thresholds a card image and writes the 0/255 page the OCR engine sees.
//!
//! ```text
//! cargo run --example binarize -- [image] [threshold] [out.png]
//! ```

use std::path::PathBuf;

use ktpx::preproc::{binarize, ensure_grayscale, render_binary, RasterImage, Threshold};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/card02.png"));
    let tr = Threshold(
        args.next()
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(Threshold::DEFAULT.value()),
    );
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ktpx-binary.png"));

    let img = RasterImage::decode(&std::fs::read(&input)?)?;
    let gray = ensure_grayscale(&img)?;
    let bin = binarize(&gray, tr)?;
    let ones = bin.bits().iter().filter(|&&b| b == 1).count();
    println!(
        "{}x{} page, threshold {}: {:.1}% of pixels above it",
        bin.width(),
        bin.height(),
        tr.value(),
        100.0 * ones as f64 / bin.bits().len() as f64
    );
    std::fs::write(&out, render_binary(&bin).encode_png()?)?;
    println!("wrote {}", out.display());
    Ok(())
}
