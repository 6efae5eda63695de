use std::fmt::Write as _;

use super::{OcrDocument, OcrSource, OcrWord, WordBox};
use crate::error::{Error, Result};

pub const TSV_HEADER: &str =
    "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext";

const COLUMNS: usize = 12;
const WORD_LEVEL: u32 = 5;

/// Parses a Tesseract-style TSV word dump.
///
/// Rows whose confidence is `-1` are layout markers (page, block, paragraph,
/// line) and are skipped. Fractional confidences, as printed by newer engine
/// releases, are rounded half up.
pub fn parse_word_dump(input: &str) -> Result<OcrDocument> {
    let mut words = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let row = idx + 1;
        if raw.trim().is_empty() || (idx == 0 && raw.starts_with("level")) {
            continue;
        }
        let cols: Vec<&str> = raw.splitn(COLUMNS, '\t').collect();
        let marker_without_text = cols.len() == COLUMNS - 1 && cols[10].trim() == "-1";
        if cols.len() != COLUMNS && !marker_without_text {
            return Err(Error::Parse {
                row,
                message: format!("expected {COLUMNS} columns, found {}", cols.len()),
            });
        }
        let num = |i: usize, name: &str| -> Result<u32> {
            cols[i].trim().parse::<u32>().map_err(|_| Error::Parse {
                row,
                message: format!("{name} `{}` is not a non-negative integer", cols[i]),
            })
        };
        let _level = num(0, "level")?;
        let _page = num(1, "page_num")?;
        let block_id = num(2, "block_num")?;
        let paragraph_id = num(3, "par_num")?;
        let line_id = num(4, "line_num")?;
        let word_id = num(5, "word_num")?;
        let bbox = WordBox {
            left: num(6, "left")?,
            top: num(7, "top")?,
            width: num(8, "width")?,
            height: num(9, "height")?,
        };
        let conf = parse_confidence(cols[10], row)?;
        let Some(confidence) = conf else { continue };
        let text = cols.get(11).copied().unwrap_or("");
        if text.trim().is_empty() {
            continue;
        }
        if bbox.width == 0 || bbox.height == 0 {
            return Err(Error::Parse {
                row,
                message: "word box has zero width or height".into(),
            });
        }
        words.push(OcrWord {
            text: text.to_string(),
            confidence,
            bbox,
            block_id,
            paragraph_id,
            line_id,
            word_id,
        });
    }
    OcrDocument::from_words(words, OcrSource::DumpFile)
}

fn parse_confidence(raw: &str, row: usize) -> Result<Option<u8>> {
    let value: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("conf `{raw}` is not numeric"),
    })?;
    if value == -1.0 {
        return Ok(None);
    }
    if !(0.0..=100.0).contains(&value) {
        return Err(Error::Parse {
            row,
            message: format!("conf {value} outside -1..=100"),
        });
    }
    Ok(Some((value + 0.5).floor() as u8))
}

/// Serializes word rows (level 5, page 1) in the same layout
/// [`parse_word_dump`] reads.
pub fn write_word_dump(doc: &OcrDocument) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for w in doc.words() {
        let _ = writeln!(
            out,
            "{WORD_LEVEL}\t1\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            w.block_id,
            w.paragraph_id,
            w.line_id,
            w.word_id,
            w.bbox.left,
            w.bbox.top,
            w.bbox.width,
            w.bbox.height,
            w.confidence,
            w.text
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dump(rows: &[&str]) -> String {
        let mut s = String::from(TSV_HEADER);
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s
    }

    #[test]
    fn province_words_make_one_line() {
        let doc = parse_word_dump(&dump(&[
            "1\t1\t0\t0\t0\t0\t0\t0\t480\t300\t-1\t",
            "4\t1\t1\t1\t1\t0\t20\t10\t300\t14\t-1\t",
            "5\t1\t1\t1\t1\t1\t20\t10\t60\t14\t92\tDAERAH",
            "5\t1\t1\t1\t1\t2\t90\t10\t70\t14\t89\tISTIMEWA",
            "5\t1\t1\t1\t1\t3\t170\t10\t90\t14\t91\tYOGYAKARTA",
        ]))
        .unwrap();
        assert_eq!(doc.lines.len(), 1);
        assert_eq!(doc.lines[0].text(), "DAERAH ISTIMEWA YOGYAKARTA");
        assert_eq!(doc.lines[0].line_confidence(), 91);
        assert_eq!(doc.source, OcrSource::DumpFile);
    }

    #[test]
    fn single_word_full_confidence() {
        let doc = parse_word_dump(&dump(&["5\t1\t1\t1\t1\t1\t0\t0\t5\t5\t100\tNIK"])).unwrap();
        assert_eq!(doc.lines[0].line_confidence(), 100);
    }

    #[test]
    fn markers_only_is_empty() {
        let doc = parse_word_dump(&dump(&[
            "1\t1\t0\t0\t0\t0\t0\t0\t480\t300\t-1\t",
            "2\t1\t1\t0\t0\t0\t0\t0\t480\t300\t-1",
        ]))
        .unwrap();
        assert!(doc.is_empty());
    }

    #[test]
    fn fractional_confidence_rounds_half_up() {
        let doc = parse_word_dump(&dump(&[
            "5\t1\t1\t1\t1\t1\t0\t0\t5\t5\t95.5\tA",
            "5\t1\t1\t1\t2\t1\t0\t9\t5\t5\t95.499\tB",
        ]))
        .unwrap();
        assert_eq!(doc.lines[0].words()[0].confidence, 96);
        assert_eq!(doc.lines[1].words()[0].confidence, 95);
    }

    #[test]
    fn malformed_rows_report_row_number() {
        let err = parse_word_dump(&dump(&["5\t1\t1\t1"])).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        let err = parse_word_dump(&dump(&[
            "5\t1\t1\t1\t1\t1\t0\t0\t5\t5\t90\tok",
            "5\t1\t1\tx\t1\t1\t0\t0\t5\t5\t90\tbad",
        ]))
        .unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
        let err = parse_word_dump(&dump(&["5\t1\t1\t1\t1\t1\t0\t0\t5\t5\thigh\tx"])).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        let err = parse_word_dump(&dump(&["5\t1\t1\t1\t1\t1\t0\t0\t5\t5\t101\tx"])).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn whitespace_words_are_skipped() {
        let doc = parse_word_dump(&dump(&["5\t1\t1\t1\t1\t1\t0\t0\t5\t5\t95\t   "])).unwrap();
        assert!(doc.is_empty());
    }

    #[test]
    fn words_follow_word_id_order() {
        let doc = parse_word_dump(&dump(&[
            "5\t1\t1\t1\t1\t2\t50\t0\t5\t5\t90\tMAULANA",
            "5\t1\t1\t1\t1\t1\t0\t0\t5\t5\t90\tFIRHAN",
        ]))
        .unwrap();
        assert_eq!(doc.lines[0].text(), "FIRHAN MAULANA");
    }

    fn arb_word() -> impl Strategy<Value = OcrWord> {
        (
            "[A-Za-z0-9:.,!?/-]{1,12}",
            0u8..=100,
            (0u32..500, 0u32..300, 1u32..100, 1u32..40),
            (0u32..3, 0u32..3, 0u32..20, 0u32..10),
        )
            .prop_map(|(text, confidence, (l, t, w, h), (b, p, ln, wd))| OcrWord {
                text,
                confidence,
                bbox: WordBox {
                    left: l,
                    top: t,
                    width: w,
                    height: h,
                },
                block_id: b,
                paragraph_id: p,
                line_id: ln,
                word_id: wd,
            })
    }

    proptest! {
        #[test]
        fn parse_write_parse_is_fixed_point(words in proptest::collection::vec(arb_word(), 0..30)) {
            let doc = OcrDocument::from_words(words, OcrSource::DumpFile).unwrap();
            let once = parse_word_dump(&write_word_dump(&doc)).unwrap();
            let twice = parse_word_dump(&write_word_dump(&once)).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.words().count(), doc.words().count());
        }
    }
}
