//! End-to-end extraction of one card image.

use std::path::PathBuf;
use std::time::Instant;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facedet::{locate_portrait, CascadeModel, DetectParams};
use crate::ocr::{parse_word_dump, OcrDocument, OcrEngine};
use crate::postproc::{parse_document_with_report, FieldGrammar, ParseReport};
use crate::preproc::{binarize, ensure_grayscale, render_binary, RasterImage, Threshold};
use crate::schema::{assemble, flag_low_confidence, KtpRecord, DEFAULT_REVIEW_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcrMode {
    /// Run the external engine unless a dump is supplied with the request.
    #[default]
    InvokeEngine,
    /// Every request must supply a word dump.
    DumpFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub threshold: u8,
    pub ocr_language: String,
    pub ocr_mode: OcrMode,
    pub grammar_path: Option<PathBuf>,
    /// `.xml` for OpenCV cascades, anything else for the JSON format.
    /// Without one the synthetic-portrait fixture cascade is used.
    pub cascade_path: Option<PathBuf>,
    pub confidence_review_threshold: u8,
    /// Feed the engine the thresholded image rather than grayscale.
    pub binarize: bool,
    /// Overrides the clock for `extractedAt`.
    pub fixed_date: Option<NaiveDate>,
    /// Replaces the engine command line (`{image}` and `{lang}` placeholders).
    pub ocr_command: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::DEFAULT.value(),
            ocr_language: "ind".into(),
            ocr_mode: OcrMode::default(),
            grammar_path: None,
            cascade_path: None,
            confidence_review_threshold: DEFAULT_REVIEW_THRESHOLD,
            binarize: true,
            fixed_date: None,
            ocr_command: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.confidence_review_threshold > 101 {
            return Err(Error::Config(format!(
                "review threshold {} is outside 0..=101",
                self.confidence_review_threshold
            )));
        }
        if self.ocr_language.trim().is_empty() {
            return Err(Error::Config("empty OCR language code".into()));
        }
        Ok(())
    }
}

/// Wall-clock split of one extraction, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtractionTiming {
    pub total_ms: f64,
    /// Time spent obtaining words: engine run or dump parse.
    pub engine_ms: f64,
    /// `total_ms - engine_ms`.
    pub excluded_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub record: KtpRecord,
    pub flagged: Vec<String>,
    pub report: ParseReport,
    pub timing: ExtractionTiming,
}

/// Loaded grammar, cascade and engine. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    grammar: FieldGrammar,
    cascade: CascadeModel,
    engine: OcrEngine,
    detect: DetectParams,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let grammar = match &config.grammar_path {
            Some(p) => FieldGrammar::load(p)?,
            None => FieldGrammar::ktp(),
        };
        let cascade = match &config.cascade_path {
            Some(p) => CascadeModel::load(p)?,
            None => CascadeModel::synthetic_face(),
        };
        let engine = match &config.ocr_command {
            Some(line) => OcrEngine::from_command_line(line),
            None => OcrEngine::from_env(),
        };
        Ok(Self {
            config,
            grammar,
            cascade,
            engine,
            detect: DetectParams::default(),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn grammar(&self) -> &FieldGrammar {
        &self.grammar
    }

    pub fn cascade(&self) -> &CascadeModel {
        &self.cascade
    }

    /// Extracts one card. `dump` is the engine's word output, if already
    /// available; otherwise the engine runs unless the mode forbids it.
    pub fn extract(&self, image_bytes: &[u8], dump: Option<&str>) -> Result<Extraction> {
        let start = Instant::now();
        let img = RasterImage::decode(image_bytes)?;
        let gray = ensure_grayscale(&img)?;

        let ocr_start = Instant::now();
        let doc = self.read_words(&gray, dump)?;
        let engine_ms = ms(ocr_start);

        let report = parse_document_with_report(&doc, &self.grammar);
        let face = locate_portrait(&img, &self.cascade, &self.detect)?;
        let card_b64 = STANDARD.encode(image_bytes);
        let today = self
            .config
            .fixed_date
            .unwrap_or_else(|| chrono::Local::now().date_naive());
        let record = assemble(&report.fields, face.as_ref(), &card_b64, today)?;
        let flagged = flag_low_confidence(&record, self.config.confidence_review_threshold);

        let total_ms = ms(start);
        Ok(Extraction {
            record,
            flagged,
            report,
            timing: ExtractionTiming {
                total_ms,
                engine_ms,
                excluded_ms: (total_ms - engine_ms).max(0.0),
            },
        })
    }

    fn read_words(&self, gray: &RasterImage, dump: Option<&str>) -> Result<OcrDocument> {
        if let Some(text) = dump {
            return parse_word_dump(text);
        }
        if self.config.ocr_mode == OcrMode::DumpFile {
            return Err(Error::Config("dump-file mode needs a word dump for every image".into()));
        }
        let page = if self.config.binarize {
            render_binary(&binarize(gray, Threshold(self.config.threshold))?)
        } else {
            gray.clone()
        };
        self.engine.run(&page, &self.config.ocr_language)
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}
