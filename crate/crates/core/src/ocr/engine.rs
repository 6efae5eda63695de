use std::io::ErrorKind;
use std::process::Command;

use super::{parse_word_dump, OcrDocument, OcrSource};
use crate::error::{Error, Result};
use crate::preproc::RasterImage;

/// Environment variable that replaces the engine command line.
pub const OCR_CMD_ENV: &str = "KTPX_OCR_CMD";

/// `{image}` and `{lang}` are substituted per call.
pub const DEFAULT_COMMAND: &str = "tesseract {image} stdout -l {lang} tsv";

/// External OCR process that prints a TSV word dump on stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcrEngine {
    argv: Vec<String>,
}

impl Default for OcrEngine {
    fn default() -> Self {
        Self::from_command_line(DEFAULT_COMMAND)
    }
}

impl OcrEngine {
    /// Splits a command line on whitespace. No shell quoting is interpreted.
    pub fn from_command_line(line: &str) -> Self {
        Self {
            argv: line.split_whitespace().map(str::to_string).collect(),
        }
    }

    /// Uses `KTPX_OCR_CMD` when set, the tesseract default otherwise.
    pub fn from_env() -> Self {
        match std::env::var(OCR_CMD_ENV) {
            Ok(line) if !line.trim().is_empty() => Self::from_command_line(&line),
            _ => Self::default(),
        }
    }

    pub fn program(&self) -> &str {
        self.argv.first().map(String::as_str).unwrap_or("")
    }

    pub fn run(&self, img: &RasterImage, language: &str) -> Result<OcrDocument> {
        let program = self.program().to_string();
        if program.is_empty() {
            return Err(Error::EngineUnavailable { program });
        }
        let dir = tempfile::tempdir()?;
        let image_path = dir.path().join("page.png");
        std::fs::write(&image_path, img.encode_png()?)?;
        let image_arg = image_path.to_string_lossy();

        let mut has_image = false;
        let args: Vec<String> = self.argv[1..]
            .iter()
            .map(|a| {
                has_image |= a.contains("{image}");
                a.replace("{image}", &image_arg).replace("{lang}", language)
            })
            .collect();
        let mut cmd = Command::new(&program);
        cmd.args(&args);
        if !has_image {
            cmd.arg(image_arg.as_ref());
        }
        let output = match cmd.output() {
            Ok(o) => o,
            Err(e) if e.kind() == ErrorKind::NotFound => return Err(Error::EngineUnavailable { program }),
            Err(e) => return Err(e.into()),
        };
        if !output.status.success() {
            return Err(Error::EngineFailure {
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
            });
        }
        let mut doc = parse_word_dump(&String::from_utf8_lossy(&output.stdout))?;
        doc.source = OcrSource::EngineInvocation;
        Ok(doc)
    }
}
