//! Declarative description of card fields.
//!
//! Every printed field is `label : content`. A [`FieldSpec`] lists the label
//! spellings, what kind of content follows the colon and how it is repaired.
//! Header lines without a colon (province, city, issue date) are claimed by a
//! [`HeadlineRule`] instead of a label.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::text::{strip_punctuation, DigitMap, GENDER_PATTERN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentKind {
    FreeText,
    Numeric,
    Date,
    ClosedSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionPolicy {
    None,
    CharToDigit,
    #[default]
    PunctuationOnly,
}

/// Claims a colon-less line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadlineRule {
    /// First word of the line must be one of these keywords.
    pub starts_with: Vec<String>,
    /// Some word of the line must be one of these keywords.
    pub contains_word: Vec<String>,
    /// Drop the matched leading keyword from the value.
    pub strip_keyword: bool,
    /// The line must hold a `DD-MM-YYYY` date, which becomes the value.
    pub bare_date: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub field_name: String,
    #[serde(default)]
    pub label_aliases: Vec<String>,
    pub content_kind: ContentKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vocabulary: Vec<String>,
    #[serde(default)]
    pub correction_policy: CorrectionPolicy,
    /// Alternation searched before fuzzy vocabulary matching.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    /// Canonical vocabulary entry to emitted code, e.g. `PEREMPUAN -> F`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub codes: BTreeMap<String, String>,
    /// Exact digit count for numeric content.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Literal values accepted instead of a date (e.g. `SEUMUR HIDUP`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub literals: Vec<String>,
    /// For date content: the text before the date is emitted under this name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_field: Option<String>,
    /// This field is a component of another field's composite value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compose_into: Option<String>,
    /// Rendering of the component; each `{}` takes the next content word,
    /// the last one takes the rest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compose_template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headline: Option<HeadlineRule>,
}

impl FieldSpec {
    fn new(field_name: &str, aliases: &[&str], content_kind: ContentKind) -> Self {
        Self {
            field_name: field_name.into(),
            label_aliases: aliases.iter().map(|s| s.to_string()).collect(),
            content_kind,
            vocabulary: Vec::new(),
            correction_policy: CorrectionPolicy::PunctuationOnly,
            pattern: None,
            codes: BTreeMap::new(),
            length: None,
            literals: Vec::new(),
            prefix_field: None,
            compose_into: None,
            compose_template: None,
            headline: None,
        }
    }

    fn closed(field_name: &str, aliases: &[&str], vocabulary: &[&str]) -> Self {
        Self {
            vocabulary: vocabulary.iter().map(|s| s.to_string()).collect(),
            ..Self::new(field_name, aliases, ContentKind::ClosedSet)
        }
    }

    fn with_codes(mut self, codes: &[(&str, &str)]) -> Self {
        self.codes = codes.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        self
    }

    fn component(mut self, into: &str, template: &str) -> Self {
        self.compose_into = Some(into.into());
        self.compose_template = Some(template.into());
        self
    }

    fn headline(field_name: &str, kind: ContentKind, rule: HeadlineRule) -> Self {
        Self {
            headline: Some(rule),
            ..Self::new(field_name, &[], kind)
        }
    }

    /// Emitted value for a matched vocabulary entry.
    pub fn code_for<'a>(&'a self, entry: &'a str) -> &'a str {
        self.codes.get(entry).map(String::as_str).unwrap_or(entry)
    }
}

/// Official KTP value sets.
pub const RELIGIONS: [&str; 6] = ["ISLAM", "KRISTEN", "KATOLIK", "HINDU", "BUDDHA", "KONGHUCU"];
pub const BLOOD_TYPES: [&str; 5] = ["A", "B", "AB", "O", "-"];
pub const NATIONALITIES: [&str; 2] = ["WNI", "WNA"];
pub const MARITAL_STATUSES: [&str; 4] = ["KAWIN", "BELUM KAWIN", "CERAI HIDUP", "CERAI MATI"];
pub const MARITAL_CODES: [(&str, &str); 4] = [
    ("KAWIN", "M"),
    ("BELUM KAWIN", "S"),
    ("CERAI HIDUP", "D"),
    ("CERAI MATI", "W"),
];
pub const GENDER_CODES: [(&str, &str); 4] = [("LAKI-LAKI", "M"), ("LAKI", "M"), ("LELAKI", "M"), ("PEREMPUAN", "F")];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GrammarFile {
    specs: Vec<FieldSpec>,
    #[serde(default = "default_max_distance")]
    label_match_max_distance: usize,
    #[serde(default)]
    digit_map: Option<DigitMap>,
    /// Extra look-alike entries merged over the default map.
    #[serde(default)]
    digit_map_extra: BTreeMap<char, char>,
}

fn default_max_distance() -> usize {
    2
}

/// Validated, immutable set of field specs.
#[derive(Debug, Clone)]
pub struct FieldGrammar {
    specs: Vec<FieldSpec>,
    label_match_max_distance: usize,
    digit_map: DigitMap,
    patterns: Vec<Option<Regex>>,
}

impl FieldGrammar {
    pub fn new(mut specs: Vec<FieldSpec>, label_match_max_distance: usize, digit_map: DigitMap) -> Result<Self> {
        let mut seen = HashSet::new();
        for spec in &mut specs {
            if !seen.insert(spec.field_name.clone()) {
                return Err(Error::Grammar(format!("duplicate field_name `{}`", spec.field_name)));
            }
            if spec.label_aliases.is_empty() && spec.headline.is_none() {
                return Err(Error::Grammar(format!(
                    "`{}` needs label aliases or a headline rule",
                    spec.field_name
                )));
            }
            if spec.content_kind == ContentKind::ClosedSet && spec.vocabulary.is_empty() {
                return Err(Error::Grammar(format!(
                    "closed-set field `{}` has an empty vocabulary",
                    spec.field_name
                )));
            }
            spec.label_aliases = spec
                .label_aliases
                .iter()
                .map(|a| normalize_label(a))
                .filter(|a| !a.is_empty())
                .collect();
            spec.vocabulary = spec.vocabulary.iter().map(|v| v.trim().to_uppercase()).collect();
            if let Some(rule) = &mut spec.headline {
                for kw in rule.starts_with.iter_mut().chain(rule.contains_word.iter_mut()) {
                    *kw = kw.trim().to_uppercase();
                }
            }
        }
        let names: HashSet<&str> = specs.iter().map(|s| s.field_name.as_str()).collect();
        for spec in &specs {
            if let Some(target) = &spec.compose_into {
                if !names.contains(target.as_str()) {
                    return Err(Error::Grammar(format!(
                        "`{}` composes into unknown field `{target}`",
                        spec.field_name
                    )));
                }
            }
        }
        let patterns = specs
            .iter()
            .map(|s| {
                s.pattern
                    .as_deref()
                    .map(|p| Regex::new(p).map_err(|e| Error::Grammar(format!("pattern of `{}`: {e}", s.field_name))))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            specs,
            label_match_max_distance,
            digit_map,
            patterns,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: GrammarFile = serde_json::from_str(json)?;
        let mut digits = file.digit_map.unwrap_or_default();
        digits.extend(file.digit_map_extra);
        Self::new(file.specs, file.label_match_max_distance, digits)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::NotFound(path.to_path_buf()));
        }
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = GrammarFile {
            specs: self.specs.clone(),
            label_match_max_distance: self.label_match_max_distance,
            digit_map: Some(self.digit_map.clone()),
            digit_map_extra: BTreeMap::new(),
        };
        serde_json::to_string_pretty(&file).expect("grammar serializes")
    }

    pub fn specs(&self) -> &[FieldSpec] {
        &self.specs
    }

    pub fn spec(&self, field_name: &str) -> Option<&FieldSpec> {
        self.specs.iter().find(|s| s.field_name == field_name)
    }

    pub fn label_match_max_distance(&self) -> usize {
        self.label_match_max_distance
    }

    pub fn digit_map(&self) -> &DigitMap {
        &self.digit_map
    }

    pub(crate) fn pattern(&self, index: usize) -> Option<&Regex> {
        self.patterns[index].as_ref()
    }

    /// Built-in KTP layout.
    pub fn ktp() -> Self {
        use ContentKind::*;
        let mut identifier = FieldSpec::new("identifier", &["NIK"], Numeric);
        identifier.correction_policy = CorrectionPolicy::CharToDigit;
        identifier.length = Some(16);

        let mut birth = FieldSpec::new(
            "birthDate",
            &["Tempat/Tgl Lahir", "Tempat/Tanggal Lahir", "Tempat Lahir"],
            Date,
        );
        birth.prefix_field = Some("birthPlace".into());

        let mut gender = FieldSpec::closed(
            "gender",
            &["Jenis Kelamin"],
            &["LAKI-LAKI", "LAKI", "LELAKI", "PEREMPUAN"],
        )
        .with_codes(&GENDER_CODES);
        gender.pattern = Some(GENDER_PATTERN.into());

        let mut rt_rw = FieldSpec::new("rtRw", &["RT/RW"], FreeText).component("address", "RT : {} RW : {}");
        rt_rw.correction_policy = CorrectionPolicy::CharToDigit;

        let mut expiry = FieldSpec::new("expiryDate", &["Berlaku Hingga"], Date);
        expiry.literals = vec!["SEUMUR HIDUP".into()];

        let specs = vec![
            identifier,
            FieldSpec::new("name", &["Nama"], FreeText),
            birth,
            gender,
            FieldSpec::closed(
                "bloodType",
                &["Gol. Darah", "Gol Darah", "Golongan Darah"],
                &BLOOD_TYPES,
            ),
            FieldSpec::new("address", &["Alamat"], FreeText),
            rt_rw,
            FieldSpec::new("village", &["Kel/Desa", "Kelurahan/Desa"], FreeText)
                .component("address", "KELURAHAN/DESA : {}"),
            FieldSpec::new("district", &["Kecamatan"], FreeText).component("address", "KECAMATAN : {}"),
            FieldSpec::closed("religion", &["Agama"], &RELIGIONS),
            FieldSpec::closed("marriageStatus", &["Status Perkawinan"], &MARITAL_STATUSES).with_codes(&MARITAL_CODES),
            FieldSpec::new("occupation", &["Pekerjaan"], FreeText),
            FieldSpec::closed("nationalityCode", &["Kewarganegaraan"], &NATIONALITIES).with_codes(&[("WNI", "IND")]),
            expiry,
            FieldSpec::headline(
                "issuedProvince",
                FreeText,
                HeadlineRule {
                    starts_with: vec!["PROVINSI".into()],
                    strip_keyword: true,
                    ..Default::default()
                },
            ),
            FieldSpec::headline(
                "issuedCity",
                FreeText,
                HeadlineRule {
                    contains_word: vec!["KABUPATEN".into(), "KOTA".into()],
                    ..Default::default()
                },
            ),
            FieldSpec::headline(
                "issuedDate",
                Date,
                HeadlineRule {
                    bare_date: true,
                    ..Default::default()
                },
            ),
        ];
        Self::new(specs, default_max_distance(), DigitMap::default()).expect("built-in grammar is valid")
    }
}

impl Default for FieldGrammar {
    fn default() -> Self {
        Self::ktp()
    }
}

/// Uppercase, punctuation-stripped label form used for alias comparison.
pub fn normalize_label(s: &str) -> String {
    strip_punctuation(s).to_uppercase()
}
