#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use ktpx::pipeline::{Pipeline, PipelineConfig};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixed_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 3, 1).unwrap()
}

pub fn pipeline() -> Pipeline {
    Pipeline::new(PipelineConfig {
        fixed_date: Some(fixed_date()),
        ..PipelineConfig::default()
    })
    .unwrap()
}

/// Top-level keys of a pretty-printed JSON object, in document order.
pub fn top_level_keys(json: &str) -> Vec<String> {
    json.lines()
        .filter_map(|l| l.strip_prefix("  \""))
        .filter_map(|l| l.split_once("\":"))
        .map(|(k, _)| k.to_string())
        .collect()
}

/// Copies the fixture images and dumps (not gold or cascade) into `dir`.
pub fn copy_cards(dir: &Path) {
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("card") {
            std::fs::copy(&p, dir.join(&name)).unwrap();
        }
    }
}
