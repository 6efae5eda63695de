//! Word-level OCR results.
//!
//! Words come either from an external engine run ([`OcrEngine::run`]) or from
//! a pre-computed tab-separated dump ([`parse_word_dump`]). Both paths end in
//! an [`OcrDocument`]: words grouped into lines by their block, paragraph and
//! line ordinals, each line carrying the rounded mean of its word confidences.

mod engine;
mod tsv;

pub use engine::{OcrEngine, DEFAULT_COMMAND, OCR_CMD_ENV};
pub use tsv::{parse_word_dump, write_word_dump, TSV_HEADER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel rectangle of a recognized word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBox {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrWord {
    pub text: String,
    /// Engine certainty, 0..=100.
    pub confidence: u8,
    pub bbox: WordBox,
    pub block_id: u32,
    pub paragraph_id: u32,
    pub line_id: u32,
    pub word_id: u32,
}

impl OcrWord {
    fn line_key(&self) -> (u32, u32, u32) {
        (self.block_id, self.paragraph_id, self.line_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrLine {
    words: Vec<OcrWord>,
    line_confidence: u8,
    text: String,
}

impl OcrLine {
    /// Builds a line from words sharing one (block, paragraph, line) key.
    /// Words are reordered by `word_id`.
    pub fn new(mut words: Vec<OcrWord>) -> Result<Self> {
        let first = words.first().ok_or(Error::EmptyLine)?.line_key();
        if words.iter().any(|w| w.line_key() != first) {
            return Err(Error::Consistency(
                "words of one line must share block, paragraph and line ids".into(),
            ));
        }
        words.sort_by_key(|w| w.word_id);
        let line_confidence = line_confidence(&words)?;
        let text = words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
        Ok(Self {
            words,
            line_confidence,
            text,
        })
    }

    pub fn words(&self) -> &[OcrWord] {
        &self.words
    }

    pub fn line_confidence(&self) -> u8 {
        self.line_confidence
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn key(&self) -> (u32, u32, u32) {
        self.words[0].line_key()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcrSource {
    EngineInvocation,
    DumpFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrDocument {
    pub lines: Vec<OcrLine>,
    pub source: OcrSource,
}

impl OcrDocument {
    /// Groups words into lines ordered by (block, paragraph, line).
    pub fn from_words(words: Vec<OcrWord>, source: OcrSource) -> Result<Self> {
        let mut grouped: std::collections::BTreeMap<(u32, u32, u32), Vec<OcrWord>> = Default::default();
        for w in words {
            grouped.entry(w.line_key()).or_default().push(w);
        }
        let lines = grouped.into_values().map(OcrLine::new).collect::<Result<Vec<_>>>()?;
        Ok(Self { lines, source })
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &OcrWord> {
        self.lines.iter().flat_map(|l| l.words.iter())
    }
}

/// Mean word confidence rounded half up.
pub fn line_confidence(words: &[OcrWord]) -> Result<u8> {
    mean_confidence(words.iter().map(|w| w.confidence))
}

pub(crate) fn mean_confidence(confs: impl IntoIterator<Item = u8>) -> Result<u8> {
    let (sum, count) = confs
        .into_iter()
        .fold((0u64, 0u64), |(s, n), c| (s + u64::from(c), n + 1));
    if count == 0 {
        return Err(Error::EmptyLine);
    }
    // floor(sum / count + 1/2) in integer arithmetic
    Ok(((2 * sum + count) / (2 * count)) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn word(text: &str, conf: u8, line: u32, idx: u32) -> OcrWord {
        OcrWord {
            text: text.into(),
            confidence: conf,
            bbox: WordBox {
                left: idx * 10,
                top: line * 10,
                width: 8,
                height: 8,
            },
            block_id: 1,
            paragraph_id: 1,
            line_id: line,
            word_id: idx,
        }
    }

    fn confs(cs: &[u8]) -> Vec<OcrWord> {
        cs.iter().enumerate().map(|(i, &c)| word("w", c, 1, i as u32)).collect()
    }

    #[test]
    fn province_line_confidence() {
        assert_eq!(line_confidence(&confs(&[92, 89, 91])).unwrap(), 91);
    }

    #[test]
    fn single_and_half_cases() {
        assert_eq!(line_confidence(&confs(&[85])).unwrap(), 85);
        assert_eq!(line_confidence(&confs(&[100])).unwrap(), 100);
        assert_eq!(line_confidence(&confs(&[50, 51])).unwrap(), 51);
    }

    #[test]
    fn empty_line_is_an_error() {
        assert!(matches!(line_confidence(&[]), Err(Error::EmptyLine)));
        assert!(matches!(OcrLine::new(vec![]), Err(Error::EmptyLine)));
    }

    #[test]
    fn line_orders_words_by_id() {
        let line = OcrLine::new(vec![word("b", 90, 1, 2), word("a", 80, 1, 1)]).unwrap();
        assert_eq!(line.text(), "a b");
        assert_eq!(line.line_confidence(), 85);
    }

    #[test]
    fn line_rejects_mixed_keys() {
        assert!(OcrLine::new(vec![word("a", 1, 1, 0), word("b", 1, 2, 1)]).is_err());
    }

    #[test]
    fn document_groups_and_orders_lines() {
        let doc = OcrDocument::from_words(
            vec![word("two", 90, 2, 0), word("one", 90, 1, 0), word("uno", 90, 1, 1)],
            OcrSource::DumpFile,
        )
        .unwrap();
        let texts: Vec<_> = doc.lines.iter().map(|l| l.text()).collect();
        assert_eq!(texts, ["one uno", "two"]);
    }

    proptest! {
        #[test]
        fn confidence_is_bounded_and_order_free(mut cs in proptest::collection::vec(0u8..=100, 1..40)) {
            let c = line_confidence(&confs(&cs)).unwrap();
            prop_assert!(c >= *cs.iter().min().unwrap() && c <= *cs.iter().max().unwrap());
            cs.reverse();
            prop_assert_eq!(line_confidence(&confs(&cs)).unwrap(), c);
        }
    }
}
