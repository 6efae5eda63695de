//! Finds the portrait on a card and writes the cropped face.
//!
//! ```text
//! cargo run --example detect_face -- [image] [cascade.json|cascade.xml] [out.png]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use ktpx::facedet::{crop_and_encode, decode_base64, detect_faces, CascadeModel, DetectParams};
use ktpx::preproc::{ensure_grayscale, RasterImage};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/card04.png"));
    let model = match args.next() {
        Some(p) => CascadeModel::load(&PathBuf::from(p))?,
        None => CascadeModel::synthetic_face(),
    };
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ktpx-face.png"));

    let img = RasterImage::decode(&std::fs::read(&input)?)?;
    let gray = ensure_grayscale(&img)?;
    let start = Instant::now();
    let faces = detect_faces(&gray, &model, &DetectParams::default())?;
    println!(
        "{} face(s) in {:.1} ms",
        faces.len(),
        start.elapsed().as_secs_f64() * 1000.0
    );
    for f in &faces {
        println!("  left {} top {} size {}x{}", f.left, f.top, f.width, f.height);
    }
    if let Some(&largest) = faces.first() {
        let crop = crop_and_encode(&img, largest)?;
        std::fs::write(&out, decode_base64(&crop.base64)?)?;
        println!("{} Base64 chars, crop written to {}", crop.base64.len(), out.display());
    }
    Ok(())
}
