//! File-level operations behind the `ktpx` command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{evaluate, load_gold, mean, EvalReport};
use crate::pipeline::{Extraction, ExtractionTiming, Pipeline};
use crate::schema::KtpRecord;

pub const OUTPUT_SUFFIX: &str = ".ktp.json";
pub const BATCH_SUMMARY: &str = "batch_summary.json";
pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// `card.png` becomes `card.png.ktp.json`, in `out_dir` when given.
pub fn output_path(image: &Path, out_dir: Option<&Path>) -> PathBuf {
    let mut name = image.file_name().unwrap_or_default().to_os_string();
    name.push(OUTPUT_SUFFIX);
    match out_dir {
        Some(d) => d.join(name),
        None => image.with_file_name(name),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn write_record(path: &Path, record: &KtpRecord) -> Result<()> {
    let mut json = record.to_json();
    json.push('\n');
    std::fs::write(path, json)?;
    Ok(())
}

/// Extracts one image file and writes its record.
pub fn extract_file(
    pipeline: &Pipeline,
    image: &Path,
    dump: Option<&Path>,
    out: Option<&Path>,
) -> Result<(PathBuf, Extraction)> {
    let bytes = read_file(image)?;
    let dump_text = match dump {
        Some(p) => Some(String::from_utf8_lossy(&read_file(p)?).into_owned()),
        None => None,
    };
    let extraction = pipeline.extract(&bytes, dump_text.as_deref())?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| output_path(image, None));
    write_record(&target, &extraction.record)?;
    Ok((target, extraction))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub image: String,
    pub output: Option<String>,
    pub error: Option<String>,
    pub timing: Option<ExtractionTiming>,
    pub flagged: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub total: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub mean_latency_ms: f64,
    pub mean_excluded_ms: f64,
    pub items: Vec<BatchItem>,
}

impl BatchSummary {
    pub fn all_succeeded(&self) -> bool {
        self.failed == 0
    }
}

/// Image files directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::NotFound(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Sibling `<stem>.tsv` holding a frozen word dump for `image`.
pub fn sibling_dump(image: &Path) -> Option<PathBuf> {
    let p = image.with_extension("tsv");
    p.is_file().then_some(p)
}

/// Extracts every image in `dir` with at most `jobs` workers.
///
/// Outputs go to `out_dir` (created if needed) or next to each image, and a
/// summary is written as `batch_summary.json` beside them. Failures are
/// recorded per image and do not stop the batch.
pub fn run_batch(pipeline: &Pipeline, dir: &Path, jobs: usize, out_dir: Option<&Path>) -> Result<BatchSummary> {
    let images = list_images(dir)?;
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let items: Vec<BatchItem> = pool.install(|| {
        images
            .par_iter()
            .map(|img| {
                let target = output_path(img, out_dir);
                let dump = sibling_dump(img);
                let name = img.file_name().unwrap_or_default().to_string_lossy().into_owned();
                match extract_file(pipeline, img, dump.as_deref(), Some(&target)) {
                    Ok((path, ex)) => BatchItem {
                        image: name,
                        output: Some(path.display().to_string()),
                        error: None,
                        timing: Some(ex.timing),
                        flagged: ex.flagged,
                    },
                    Err(e) => BatchItem {
                        image: name,
                        output: None,
                        error: Some(e.to_string()),
                        timing: None,
                        flagged: vec![],
                    },
                }
            })
            .collect()
    });
    let timings: Vec<ExtractionTiming> = items.iter().filter_map(|i| i.timing).collect();
    let total: Vec<f64> = timings.iter().map(|t| t.total_ms).collect();
    let excluded: Vec<f64> = timings.iter().map(|t| t.excluded_ms).collect();
    let succeeded = timings.len();
    let summary = BatchSummary {
        total: items.len(),
        succeeded,
        failed: items.len() - succeeded,
        mean_latency_ms: mean(&total),
        mean_excluded_ms: mean(&excluded),
        items,
    };
    let summary_dir = out_dir.unwrap_or(dir);
    std::fs::write(
        summary_dir.join(BATCH_SUMMARY),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(summary)
}

/// Card id of a prediction file: its name up to the first `.`.
pub fn card_id(path: &Path) -> String {
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    name.split('.').next().unwrap_or_default().to_string()
}

/// Reads every `*.ktp.json` record in `dir`, keyed by card id.
pub fn load_predictions(dir: &Path) -> Result<BTreeMap<String, KtpRecord>> {
    if !dir.is_dir() {
        return Err(Error::NotFound(dir.to_path_buf()));
    }
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_record = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(OUTPUT_SUFFIX));
        if !is_record {
            continue;
        }
        let rec = KtpRecord::from_json(&std::fs::read_to_string(&path)?)?;
        let id = card_id(&path);
        if out.insert(id.clone(), rec).is_some() {
            return Err(Error::Config(format!(
                "two predictions for card `{id}` in {}",
                dir.display()
            )));
        }
    }
    Ok(out)
}

/// Scores a prediction directory. Latencies come from a batch summary in
/// the same directory when one exists.
pub fn evaluate_dir(gold_path: &Path, pred_dir: &Path) -> Result<EvalReport> {
    let gold = load_gold(gold_path)?;
    let preds = load_predictions(pred_dir)?;
    let latencies: Vec<f64> = match std::fs::read_to_string(pred_dir.join(BATCH_SUMMARY)) {
        Ok(text) => serde_json::from_str::<BatchSummary>(&text)?
            .items
            .iter()
            .filter_map(|i| i.timing.map(|t| t.total_ms))
            .collect(),
        Err(_) => Vec::new(),
    };
    evaluate(&preds, &gold, &latencies)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naming() {
        assert_eq!(
            output_path(Path::new("a/card01.png"), None),
            Path::new("a/card01.png.ktp.json")
        );
        assert_eq!(
            output_path(Path::new("a/x.jpg"), Some(Path::new("o"))),
            Path::new("o/x.jpg.ktp.json")
        );
        assert_eq!(card_id(Path::new("p/card07.png.ktp.json")), "card07");
    }

    #[test]
    fn empty_directory_batch() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(Default::default()).unwrap();
        let s = run_batch(&p, dir.path(), 2, None).unwrap();
        assert_eq!((s.total, s.succeeded, s.failed), (0, 0, 0));
        assert!(dir.path().join(BATCH_SUMMARY).exists());
    }

    #[test]
    fn missing_inputs_are_not_found() {
        let p = Pipeline::new(Default::default()).unwrap();
        let err = extract_file(&p, Path::new("/nonexistent/card.png"), None, None).unwrap_err();
        assert!(err.to_string().contains("file not found"));
        assert!(matches!(
            list_images(Path::new("/nonexistent")),
            Err(Error::NotFound(_))
        ));
    }
}
