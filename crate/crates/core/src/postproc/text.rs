//! Character- and string-level repair rules applied to OCR content.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Characters that survive [`strip_punctuation`] besides letters, digits and
/// whitespace. They are part of printed card content (dates, RT/RW, labels).
pub const KEPT_PUNCTUATION: [char; 4] = [':', '.', ',', '-'];

static DATE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9]{2}-[0-9]{2}-[0-9]{4}").expect("static regex"));

pub const GENDER_PATTERN: &str = "(LAKI-LAKI|LAKI|LELAKI|PEREMPUAN)";

static GENDER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(GENDER_PATTERN).expect("static regex"));

/// Removes punctuation other than `: . , -`, replacing each removed run with
/// a space, then collapses whitespace and trims.
pub fn strip_punctuation(s: &str) -> String {
    let spaced: String = s
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() || KEPT_PUNCTUATION.contains(&c) {
                c
            } else {
                ' '
            }
        })
        .collect();
    collapse_whitespace(&spaced)
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Look-alike character to digit substitutions used on numeric fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DigitMap(BTreeMap<char, char>);

impl DigitMap {
    pub const DEFAULT_ENTRIES: [(char, char); 13] = [
        ('L', '1'),
        ('l', '1'),
        ('O', '0'),
        ('o', '0'),
        ('?', '7'),
        ('A', '4'),
        ('Z', '2'),
        ('z', '2'),
        ('S', '5'),
        ('s', '5'),
        ('b', '6'),
        ('B', '8'),
        ('G', '6'),
    ];

    pub fn new(entries: impl IntoIterator<Item = (char, char)>) -> Self {
        Self(entries.into_iter().collect())
    }

    /// Adds or overrides entries, e.g. `I -> 1`.
    pub fn extend(&mut self, entries: impl IntoIterator<Item = (char, char)>) {
        self.0.extend(entries);
    }

    pub fn get(&self, c: char) -> Option<char> {
        self.0.get(&c).copied()
    }

    pub fn apply(&self, s: &str) -> String {
        s.chars().map(|c| self.get(c).unwrap_or(c)).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

impl Default for DigitMap {
    fn default() -> Self {
        Self::new(Self::DEFAULT_ENTRIES)
    }
}

static DEFAULT_DIGITS: LazyLock<DigitMap> = LazyLock::new(DigitMap::default);

/// Applies the default look-alike map character by character.
pub fn chars_to_digits(s: &str) -> String {
    DEFAULT_DIGITS.apply(s)
}

/// First `DD-MM-YYYY` shaped substring, verbatim.
pub fn extract_date(s: &str) -> Option<&str> {
    DATE_RE.find(s).map(|m| m.as_str())
}

pub(crate) fn find_date(s: &str) -> Option<regex::Match<'_>> {
    DATE_RE.find(s)
}

/// `M` for LAKI-LAKI / LAKI / LELAKI, `F` for PEREMPUAN.
pub fn extract_gender(s: &str) -> Option<&'static str> {
    let upper = s.to_uppercase();
    GENDER_RE.find(&upper).map(|m| gender_code(m.as_str()))
}

fn gender_code(matched: &str) -> &'static str {
    if matched == "PEREMPUAN" {
        "F"
    } else {
        "M"
    }
}

pub fn edit_distance(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

/// Maximum edit distance accepted by [`match_closed_set`].
pub const CLOSED_SET_MAX_DISTANCE: usize = 2;

/// Resolves `s` to one entry of `vocabulary`.
///
/// An entry occurring verbatim in the uppercased input wins, longest first.
/// Otherwise the nearest entry within edit distance 2 is returned. Ties on
/// distance prefer the entry whose digit-folded spelling is nearest to the
/// digit-folded input (so `0` resolves to `O` rather than `A`), then
/// vocabulary order.
pub fn match_closed_set<'v>(s: &str, vocabulary: &'v [String]) -> Option<&'v str> {
    let upper = collapse_whitespace(&s.to_uppercase());
    if upper.is_empty() {
        return None;
    }
    let mut best_sub: Option<&String> = None;
    for entry in vocabulary {
        if upper.contains(entry.as_str()) && best_sub.is_none_or(|b| entry.len() > b.len()) {
            best_sub = Some(entry);
        }
    }
    if let Some(entry) = best_sub {
        return Some(entry);
    }
    let folded = chars_to_digits(&upper);
    vocabulary
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let d = edit_distance(&upper, entry);
            let fd = edit_distance(&folded, &chars_to_digits(entry));
            (d, fd, i, entry)
        })
        .filter(|(d, ..)| *d <= CLOSED_SET_MAX_DISTANCE)
        .min_by_key(|(d, fd, i, _)| (*d, *fd, *i))
        .map(|(.., entry)| entry.as_str())
}
