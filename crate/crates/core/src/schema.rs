//! The 37-key KTP output record.
//!
//! Keys serialize in a fixed order: 24 values followed by 13 confidences.
//! Only the 13 fields read from labelled card lines carry a confidence;
//! constants, images, face geometry and the extraction date do not.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::facedet::FaceCrop;
use crate::postproc::{extract_date, ExtractedField, BLOOD_TYPES, RELIGIONS};

pub const DEFAULT_REVIEW_THRESHOLD: u8 = 85;
pub const CARD_KIND: &str = "C";
pub const DEFAULT_COUNTRY: &str = "IND";
pub const LIFETIME_EXPIRY: &str = "SEUMUR HIDUP";
pub const DATE_FORMAT: &str = "%d-%m-%Y";

/// Serialized keys in output order.
pub const RECORD_KEYS: [&str; 37] = [
    "kind",
    "identifier",
    "name",
    "birthPlace",
    "birthDate",
    "gender",
    "bloodType",
    "address",
    "religion",
    "marriageStatus",
    "occupation",
    "nationalityCode",
    "expiryDate",
    "facePhoto",
    "cardImage",
    "issuerCountryCode",
    "issuedProvince",
    "issuedCity",
    "issuedDate",
    "faceTop",
    "faceLeft",
    "faceWidth",
    "faceHeight",
    "extractedAt",
    "identifierconf",
    "nameconf",
    "birthPlaceconf",
    "birthDateconf",
    "genderconf",
    "bloodTypeconf",
    "addressconf",
    "religionconf",
    "marriageStatusconf",
    "occupationconf",
    "issuedProvinceconf",
    "issuedCityconf",
    "issuedDateconf",
];

/// Value fields that have a `<field>conf` twin, in output order.
pub const CONFIDENCE_FIELDS: [&str; 13] = [
    "identifier",
    "name",
    "birthPlace",
    "birthDate",
    "gender",
    "bloodType",
    "address",
    "religion",
    "marriageStatus",
    "occupation",
    "issuedProvince",
    "issuedCity",
    "issuedDate",
];

/// Text fields an operator may correct.
pub const EDITABLE_FIELDS: [&str; 16] = [
    "identifier",
    "name",
    "birthPlace",
    "birthDate",
    "gender",
    "bloodType",
    "address",
    "religion",
    "marriageStatus",
    "occupation",
    "nationalityCode",
    "expiryDate",
    "issuerCountryCode",
    "issuedProvince",
    "issuedCity",
    "issuedDate",
];

pub const GENDERS: [&str; 2] = ["M", "F"];
pub const MARITAL_STATUS_CODES: [&str; 4] = ["M", "S", "D", "W"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct KtpRecord {
    pub kind: String,
    pub identifier: String,
    pub name: String,
    pub birth_place: String,
    pub birth_date: String,
    pub gender: String,
    pub blood_type: String,
    pub address: String,
    pub religion: String,
    pub marriage_status: String,
    pub occupation: String,
    pub nationality_code: String,
    pub expiry_date: String,
    pub face_photo: String,
    pub card_image: String,
    pub issuer_country_code: String,
    pub issued_province: String,
    pub issued_city: String,
    pub issued_date: String,
    pub face_top: i64,
    pub face_left: i64,
    pub face_width: i64,
    pub face_height: i64,
    pub extracted_at: String,
    #[serde(rename = "identifierconf", deserialize_with = "confidence")]
    pub identifier_conf: u8,
    #[serde(rename = "nameconf", deserialize_with = "confidence")]
    pub name_conf: u8,
    #[serde(rename = "birthPlaceconf", deserialize_with = "confidence")]
    pub birth_place_conf: u8,
    #[serde(rename = "birthDateconf", deserialize_with = "confidence")]
    pub birth_date_conf: u8,
    #[serde(rename = "genderconf", deserialize_with = "confidence")]
    pub gender_conf: u8,
    #[serde(rename = "bloodTypeconf", deserialize_with = "confidence")]
    pub blood_type_conf: u8,
    #[serde(rename = "addressconf", deserialize_with = "confidence")]
    pub address_conf: u8,
    #[serde(rename = "religionconf", deserialize_with = "confidence")]
    pub religion_conf: u8,
    #[serde(rename = "marriageStatusconf", deserialize_with = "confidence")]
    pub marriage_status_conf: u8,
    #[serde(rename = "occupationconf", deserialize_with = "confidence")]
    pub occupation_conf: u8,
    #[serde(rename = "issuedProvinceconf", deserialize_with = "confidence")]
    pub issued_province_conf: u8,
    #[serde(rename = "issuedCityconf", deserialize_with = "confidence")]
    pub issued_city_conf: u8,
    #[serde(rename = "issuedDateconf", deserialize_with = "confidence")]
    pub issued_date_conf: u8,
}

/// Accepts integers and integral floats (`68.0`) in 0..=100.
fn confidence<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u8, D::Error> {
    use serde::de::Error as _;
    let v = f64::deserialize(d)?;
    if v.fract() != 0.0 || !(0.0..=100.0).contains(&v) {
        return Err(D::Error::custom(format!("confidence {v} is not an integer in 0..=100")));
    }
    Ok(v as u8)
}

impl Default for KtpRecord {
    fn default() -> Self {
        Self {
            kind: CARD_KIND.into(),
            identifier: String::new(),
            name: String::new(),
            birth_place: String::new(),
            birth_date: String::new(),
            gender: String::new(),
            blood_type: String::new(),
            address: String::new(),
            religion: String::new(),
            marriage_status: String::new(),
            occupation: String::new(),
            nationality_code: DEFAULT_COUNTRY.into(),
            expiry_date: String::new(),
            face_photo: String::new(),
            card_image: String::new(),
            issuer_country_code: DEFAULT_COUNTRY.into(),
            issued_province: String::new(),
            issued_city: String::new(),
            issued_date: String::new(),
            face_top: -1,
            face_left: -1,
            face_width: -1,
            face_height: -1,
            extracted_at: String::new(),
            identifier_conf: 0,
            name_conf: 0,
            birth_place_conf: 0,
            birth_date_conf: 0,
            gender_conf: 0,
            blood_type_conf: 0,
            address_conf: 0,
            religion_conf: 0,
            marriage_status_conf: 0,
            occupation_conf: 0,
            issued_province_conf: 0,
            issued_city_conf: 0,
            issued_date_conf: 0,
        }
    }
}

impl KtpRecord {
    /// Text value of a string field by its serialized key.
    pub fn text(&self, field: &str) -> Option<&str> {
        let v = match field {
            "kind" => &self.kind,
            "identifier" => &self.identifier,
            "name" => &self.name,
            "birthPlace" => &self.birth_place,
            "birthDate" => &self.birth_date,
            "gender" => &self.gender,
            "bloodType" => &self.blood_type,
            "address" => &self.address,
            "religion" => &self.religion,
            "marriageStatus" => &self.marriage_status,
            "occupation" => &self.occupation,
            "nationalityCode" => &self.nationality_code,
            "expiryDate" => &self.expiry_date,
            "facePhoto" => &self.face_photo,
            "cardImage" => &self.card_image,
            "issuerCountryCode" => &self.issuer_country_code,
            "issuedProvince" => &self.issued_province,
            "issuedCity" => &self.issued_city,
            "issuedDate" => &self.issued_date,
            "extractedAt" => &self.extracted_at,
            _ => return None,
        };
        Some(v)
    }

    fn text_mut(&mut self, field: &str) -> Option<&mut String> {
        let v = match field {
            "identifier" => &mut self.identifier,
            "name" => &mut self.name,
            "birthPlace" => &mut self.birth_place,
            "birthDate" => &mut self.birth_date,
            "gender" => &mut self.gender,
            "bloodType" => &mut self.blood_type,
            "address" => &mut self.address,
            "religion" => &mut self.religion,
            "marriageStatus" => &mut self.marriage_status,
            "occupation" => &mut self.occupation,
            "nationalityCode" => &mut self.nationality_code,
            "expiryDate" => &mut self.expiry_date,
            "issuerCountryCode" => &mut self.issuer_country_code,
            "issuedProvince" => &mut self.issued_province,
            "issuedCity" => &mut self.issued_city,
            "issuedDate" => &mut self.issued_date,
            _ => return None,
        };
        Some(v)
    }

    /// Confidence paired with a value field.
    pub fn confidence(&self, field: &str) -> Option<u8> {
        self.confidence_slot(field).copied()
    }

    fn confidence_slot(&self, field: &str) -> Option<&u8> {
        let c = match field {
            "identifier" => &self.identifier_conf,
            "name" => &self.name_conf,
            "birthPlace" => &self.birth_place_conf,
            "birthDate" => &self.birth_date_conf,
            "gender" => &self.gender_conf,
            "bloodType" => &self.blood_type_conf,
            "address" => &self.address_conf,
            "religion" => &self.religion_conf,
            "marriageStatus" => &self.marriage_status_conf,
            "occupation" => &self.occupation_conf,
            "issuedProvince" => &self.issued_province_conf,
            "issuedCity" => &self.issued_city_conf,
            "issuedDate" => &self.issued_date_conf,
            _ => return None,
        };
        Some(c)
    }

    pub fn set_confidence(&mut self, field: &str, conf: u8) -> Result<()> {
        let slot = match field {
            "identifier" => &mut self.identifier_conf,
            "name" => &mut self.name_conf,
            "birthPlace" => &mut self.birth_place_conf,
            "birthDate" => &mut self.birth_date_conf,
            "gender" => &mut self.gender_conf,
            "bloodType" => &mut self.blood_type_conf,
            "address" => &mut self.address_conf,
            "religion" => &mut self.religion_conf,
            "marriageStatus" => &mut self.marriage_status_conf,
            "occupation" => &mut self.occupation_conf,
            "issuedProvince" => &mut self.issued_province_conf,
            "issuedCity" => &mut self.issued_city_conf,
            "issuedDate" => &mut self.issued_date_conf,
            _ => return Err(unknown(field)),
        };
        if conf > 100 {
            return Err(Error::Validation {
                field: format!("{field}conf"),
                message: format!("{conf} exceeds 100"),
            });
        }
        *slot = conf;
        Ok(())
    }

    /// Replaces an editable value after checking it against the field rule.
    pub fn set_text(&mut self, field: &str, value: &str) -> Result<()> {
        validate_value(field, value)?;
        let slot = self.text_mut(field).ok_or_else(|| unknown(field))?;
        *slot = value.to_string();
        Ok(())
    }

    pub fn face_box(&self) -> Option<crate::facedet::FaceBox> {
        let g = [self.face_left, self.face_top, self.face_width, self.face_height];
        if g.iter().all(|&v| v >= 0) {
            Some(crate::facedet::FaceBox::new(
                g[0] as u32,
                g[1] as u32,
                g[2] as u32,
                g[3] as u32,
            ))
        } else {
            None
        }
    }

    /// Checks every record invariant.
    pub fn validate(&self) -> Result<()> {
        for field in EDITABLE_FIELDS {
            validate_value(field, self.text(field).unwrap_or_default())?;
        }
        if self.kind != CARD_KIND {
            return Err(invalid("kind", format!("`{}` is not `{CARD_KIND}`", self.kind)));
        }
        if !self.extracted_at.is_empty() && !is_date(&self.extracted_at) {
            return Err(invalid("extractedAt", "expected DD-MM-YYYY"));
        }
        for field in CONFIDENCE_FIELDS {
            let c = self.confidence(field).expect("paired");
            if c > 100 {
                return Err(invalid(&format!("{field}conf"), format!("{c} exceeds 100")));
            }
        }
        let g = [self.face_top, self.face_left, self.face_width, self.face_height];
        let absent = g.iter().all(|&v| v == -1);
        let present = g.iter().all(|&v| v >= 0) && self.face_width > 0 && self.face_height > 0;
        if !absent && !present {
            return Err(invalid("faceTop", "face geometry must be all -1 or a non-empty box"));
        }
        if absent != self.face_photo.is_empty() {
            return Err(invalid("facePhoto", "photo and geometry must be present together"));
        }
        Ok(())
    }

    /// Serialized JSON in key order, pretty-printed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(json)?;
        Ok(rec)
    }
}

fn unknown(field: &str) -> Error {
    invalid(field, "not an editable record field")
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

fn is_date(s: &str) -> bool {
    s.len() == 10 && extract_date(s) == Some(s)
}

/// Checks one editable value. Empty means "not read" and is always allowed.
pub fn validate_value(field: &str, value: &str) -> Result<()> {
    if value.is_empty() {
        return Ok(());
    }
    let rule = FieldRule::for_field(field).ok_or_else(|| unknown(field))?;
    if let Some(vocab) = &rule.vocabulary {
        if !vocab.iter().any(|v| v == value) {
            return Err(invalid(field, format!("`{value}` is not one of {}", vocab.join(", "))));
        }
    }
    let ok = match rule.format {
        ValueFormat::Text => true,
        ValueFormat::Digits16 => value.len() == 16 && value.bytes().all(|b| b.is_ascii_digit()),
        ValueFormat::Date => is_date(value),
        ValueFormat::DateOrLifetime => value == LIFETIME_EXPIRY || is_date(value),
        ValueFormat::CountryCode => value.len() == 3 && value.bytes().all(|b| b.is_ascii_uppercase()),
    };
    if !ok {
        return Err(invalid(
            field,
            format!("`{value}` does not match {}", rule.format.describe()),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueFormat {
    Text,
    Digits16,
    Date,
    DateOrLifetime,
    CountryCode,
}

impl ValueFormat {
    pub fn describe(self) -> &'static str {
        match self {
            ValueFormat::Text => "free text",
            ValueFormat::Digits16 => "exactly 16 digits",
            ValueFormat::Date => "DD-MM-YYYY",
            ValueFormat::DateOrLifetime => "DD-MM-YYYY or SEUMUR HIDUP",
            ValueFormat::CountryCode => "three uppercase letters",
        }
    }

    /// Anchored regular expression equivalent of the format check.
    pub fn pattern(self) -> Option<&'static str> {
        match self {
            ValueFormat::Text => None,
            ValueFormat::Digits16 => Some("^[0-9]{16}$"),
            ValueFormat::Date => Some("^[0-9]{2}-[0-9]{2}-[0-9]{4}$"),
            ValueFormat::DateOrLifetime => Some("^([0-9]{2}-[0-9]{2}-[0-9]{4}|SEUMUR HIDUP)$"),
            ValueFormat::CountryCode => Some("^[A-Z]{3}$"),
        }
    }
}

/// Validation rule for one editable field, as published to review clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRule {
    pub field: String,
    pub format: ValueFormat,
    pub pattern: Option<String>,
    pub vocabulary: Option<Vec<String>>,
    pub confidence_key: Option<String>,
}

impl FieldRule {
    pub fn for_field(field: &str) -> Option<Self> {
        if !EDITABLE_FIELDS.contains(&field) {
            return None;
        }
        let format = match field {
            "identifier" => ValueFormat::Digits16,
            "birthDate" | "issuedDate" => ValueFormat::Date,
            "expiryDate" => ValueFormat::DateOrLifetime,
            "nationalityCode" | "issuerCountryCode" => ValueFormat::CountryCode,
            _ => ValueFormat::Text,
        };
        let vocab: Option<&[&str]> = match field {
            "gender" => Some(&GENDERS),
            "bloodType" => Some(&BLOOD_TYPES),
            "religion" => Some(&RELIGIONS),
            "marriageStatus" => Some(&MARITAL_STATUS_CODES),
            _ => None,
        };
        Some(Self {
            field: field.to_string(),
            format,
            pattern: format.pattern().map(str::to_string),
            vocabulary: vocab.map(|v| v.iter().map(|s| s.to_string()).collect()),
            confidence_key: CONFIDENCE_FIELDS.contains(&field).then(|| format!("{field}conf")),
        })
    }
}

/// Everything a review client needs to validate edits locally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDescription {
    pub review_threshold: u8,
    pub keys: Vec<String>,
    pub confidence_fields: Vec<String>,
    pub rules: Vec<FieldRule>,
}

pub fn describe(review_threshold: u8) -> SchemaDescription {
    SchemaDescription {
        review_threshold,
        keys: RECORD_KEYS.iter().map(|s| s.to_string()).collect(),
        confidence_fields: CONFIDENCE_FIELDS.iter().map(|s| s.to_string()).collect(),
        rules: EDITABLE_FIELDS
            .iter()
            .map(|f| FieldRule::for_field(f).expect("editable"))
            .collect(),
    }
}

/// Routes parsed fields into a record.
///
/// Field names outside the record (e.g. from a custom grammar) are ignored.
/// A name occurring twice is an internal-consistency error.
pub fn assemble(
    fields: &[ExtractedField],
    face: Option<&FaceCrop>,
    card_b64: &str,
    now: NaiveDate,
) -> Result<KtpRecord> {
    let mut rec = KtpRecord {
        card_image: card_b64.to_string(),
        extracted_at: now.format(DATE_FORMAT).to_string(),
        ..KtpRecord::default()
    };
    let mut seen = BTreeSet::new();
    for f in fields {
        if !seen.insert(f.field_name.as_str()) {
            return Err(Error::Consistency(format!("field `{}` extracted twice", f.field_name)));
        }
        let Some(slot) = rec.text_mut(&f.field_name) else {
            continue;
        };
        *slot = f.value.clone();
        if CONFIDENCE_FIELDS.contains(&f.field_name.as_str()) {
            rec.set_confidence(&f.field_name, f.confidence.min(100))?;
        }
    }
    if let Some(face) = face {
        rec.face_photo = face.base64.clone();
        rec.face_top = i64::from(face.face_box.top);
        rec.face_left = i64::from(face.face_box.left);
        rec.face_width = i64::from(face.face_box.width);
        rec.face_height = i64::from(face.face_box.height);
    }
    Ok(rec)
}

/// Value fields whose confidence is below `threshold`, in output order.
pub fn flag_low_confidence(rec: &KtpRecord, threshold: u8) -> Vec<String> {
    CONFIDENCE_FIELDS
        .iter()
        .filter(|f| rec.confidence(f).expect("paired") < threshold)
        .map(|f| f.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facedet::FaceBox;
    use proptest::prelude::*;

    fn field(name: &str, value: &str, confidence: u8) -> ExtractedField {
        ExtractedField {
            field_name: name.into(),
            raw_text: value.into(),
            value: value.into(),
            confidence,
            source_line: 0,
        }
    }

    fn keys(json: &str) -> Vec<String> {
        // serde_json's default map is sorted, so read the key order off the text
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        let mut ks: Vec<(usize, String)> = v
            .as_object()
            .unwrap()
            .keys()
            .map(|k| (json.find(&format!("\"{k}\":")).unwrap(), k.clone()))
            .collect();
        ks.sort();
        ks.into_iter().map(|(_, k)| k).collect()
    }

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 11, 30).unwrap()
    }

    fn reference_fields() -> Vec<ExtractedField> {
        vec![
            field("identifier", "3471111111111111", 0),
            field("name", "FIRHAN MAULANA", 91),
            field("birthPlace", "GROBOGAN", 54),
            field("birthDate", "02-09-1979", 95),
            field("gender", "M", 71),
            field("bloodType", "O", 76),
            field(
                "address",
                "PRM PURI DOMAS RT : 001 RW : 024 KELURAHAN/DESA : WEDOMARTANI KECAMATAN : NGEMPLAK",
                68,
            ),
            field("religion", "ISLAM", 18),
            field("marriageStatus", "M", 95),
            field("occupation", "PEDAGANG", 95),
            field("nationalityCode", "IND", 95),
            field("expiryDate", "SEUMUR HIDUP", 95),
            field("issuedProvince", "DAERAH ISTIMEWA YOGYAKARTA", 95),
            field("issuedCity", "KABUPATEN SLEMAN", 95),
            field("issuedDate", "05-06-2012", 83),
        ]
    }

    #[test]
    fn reference_shape() {
        let face = FaceCrop {
            base64: "iVBORw0KGgo=".into(),
            face_box: FaceBox::new(212, 786, 163, 163),
        };
        let rec = assemble(&reference_fields(), Some(&face), "Yg==", day()).unwrap();
        rec.validate().unwrap();
        let json = rec.to_json();
        assert_eq!(keys(&json), RECORD_KEYS);
        assert_eq!(rec.kind, "C");
        assert_eq!(rec.extracted_at, "30-11-2020");
        assert_eq!((rec.face_top, rec.face_left, rec.face_width), (786, 212, 163));
        assert_eq!(rec.name_conf, 91);
        assert_eq!(rec.issuer_country_code, "IND");
        assert_eq!(KtpRecord::from_json(&json).unwrap(), rec);
    }

    #[test]
    fn empty_fields_give_empty_record() {
        let rec = assemble(&[], None, "", day()).unwrap();
        rec.validate().unwrap();
        assert_eq!(keys(&rec.to_json()).len(), 37);
        assert!(CONFIDENCE_FIELDS.iter().all(|f| rec.confidence(f) == Some(0)));
        assert_eq!([rec.face_top, rec.face_left, rec.face_width, rec.face_height], [-1; 4]);
        assert!(rec.face_photo.is_empty());
        assert_eq!(rec.nationality_code, "IND");
    }

    #[test]
    fn duplicate_field_is_inconsistent() {
        let fs = vec![field("name", "A", 90), field("name", "B", 90)];
        assert!(matches!(assemble(&fs, None, "", day()), Err(Error::Consistency(_))));
    }

    #[test]
    fn flag_rule() {
        let rec = assemble(&reference_fields(), None, "", day()).unwrap();
        assert_eq!(
            flag_low_confidence(&rec, 85),
            [
                "identifier",
                "birthPlace",
                "gender",
                "bloodType",
                "address",
                "religion",
                "issuedDate"
            ]
        );
        assert!(flag_low_confidence(&rec, 0).is_empty());
        assert_eq!(flag_low_confidence(&rec, 101).len(), 13);
        let mut at85 = rec.clone();
        at85.set_confidence("religion", 85).unwrap();
        assert!(!flag_low_confidence(&at85, 85).contains(&"religion".to_string()));
    }

    #[test]
    fn integral_float_confidence_accepted() {
        let rec = assemble(&reference_fields(), None, "", day()).unwrap();
        let json = rec.to_json().replace("\"addressconf\": 68", "\"addressconf\": 68.0");
        assert_eq!(KtpRecord::from_json(&json).unwrap().address_conf, 68);
        let bad = rec.to_json().replace("\"addressconf\": 68", "\"addressconf\": 68.5");
        assert!(KtpRecord::from_json(&bad).is_err());
        let extra = rec.to_json().replacen('{', "{\"extra\": 1,", 1);
        assert!(KtpRecord::from_json(&extra).is_err());
    }

    #[test]
    fn value_rules() {
        assert!(validate_value("identifier", "3471111111111111").is_ok());
        assert!(validate_value("identifier", "347111111111111").is_err());
        assert!(validate_value("bloodType", "0").is_err());
        assert!(validate_value("bloodType", "O").is_ok());
        assert!(validate_value("expiryDate", "SEUMUR HIDUP").is_ok());
        assert!(validate_value("birthDate", "2-9-1979").is_err());
        assert!(validate_value("faceTop", "1").is_err());
        assert!(validate_value("religion", "").is_ok());
        let d = describe(85);
        assert_eq!(d.rules.len(), EDITABLE_FIELDS.len());
        assert_eq!(d.review_threshold, 85);
    }

    fn arb_record() -> impl Strategy<Value = KtpRecord> {
        (
            proptest::option::of("[0-9]{16}"),
            "[A-Z ]{0,20}",
            proptest::collection::vec(0u8..=100, 13),
            proptest::option::of((0i64..500, 0i64..500, 1i64..200)),
            0usize..6,
        )
            .prop_map(|(nik, name, confs, face, rel)| {
                let mut r = KtpRecord {
                    identifier: nik.unwrap_or_default(),
                    name,
                    religion: RELIGIONS[rel % 6].into(),
                    extracted_at: "01-01-2024".into(),
                    ..KtpRecord::default()
                };
                for (f, c) in CONFIDENCE_FIELDS.iter().zip(confs) {
                    r.set_confidence(f, c).unwrap();
                }
                if let Some((t, l, s)) = face {
                    r.face_top = t;
                    r.face_left = l;
                    r.face_width = s;
                    r.face_height = s;
                    r.face_photo = "AA==".into();
                }
                r
            })
    }

    proptest! {
        #[test]
        fn json_roundtrip(rec in arb_record()) {
            prop_assert!(rec.validate().is_ok());
            let json = rec.to_json();
            prop_assert_eq!(keys(&json), RECORD_KEYS);
            prop_assert_eq!(KtpRecord::from_json(&json).unwrap(), rec);
        }

        #[test]
        fn flag_extremes(rec in arb_record()) {
            prop_assert!(flag_low_confidence(&rec, 0).is_empty());
            prop_assert_eq!(flag_low_confidence(&rec, 101).len(), 13);
        }
    }
}
