//! Rule-based repair of OCR lines into named card fields.
//!
//! Each line is cleaned of stray punctuation, split at its first colon into
//! label and content, matched against a [`FieldGrammar`], and the content is
//! repaired according to its field: look-alike letters become digits for the
//! NIK, dates are located by pattern, and closed-vocabulary fields (gender,
//! blood type, religion, marital status, nationality) are snapped to their
//! nearest legal value. Every field inherits the confidence of the line it
//! came from.

mod grammar;
mod parse;
mod text;

pub use grammar::{
    normalize_label, ContentKind, CorrectionPolicy, FieldGrammar, FieldSpec, HeadlineRule, BLOOD_TYPES, GENDER_CODES,
    MARITAL_CODES, MARITAL_STATUSES, NATIONALITIES, RELIGIONS,
};
pub use parse::{parse_document, parse_document_with_report, split_field_line, ExtractedField, ParseReport};
pub use text::{
    chars_to_digits, collapse_whitespace, edit_distance, extract_date, extract_gender, match_closed_set,
    strip_punctuation, DigitMap, CLOSED_SET_MAX_DISTANCE, GENDER_PATTERN, KEPT_PUNCTUATION,
};
