use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::grammar::{normalize_label, ContentKind, CorrectionPolicy, FieldGrammar, FieldSpec};
use super::text::{collapse_whitespace, edit_distance, find_date, match_closed_set, strip_punctuation};
use crate::ocr::{mean_confidence, OcrDocument, OcrLine};

/// One named value recovered from the card.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedField {
    pub field_name: String,
    /// Content as read by the engine, before repair.
    pub raw_text: String,
    pub value: String,
    pub confidence: u8,
    /// Index into [`OcrDocument::lines`]. For composite fields, the first
    /// contributing line.
    pub source_line: usize,
}

/// Fields plus a tally of what could not be used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub fields: Vec<ExtractedField>,
    /// Lines no label or headline rule claimed.
    pub unclaimed_lines: usize,
    /// Claimed content that failed its pattern (e.g. a NIK that is not 16 digits).
    pub rejected: usize,
    /// Claims dropped because the field was already taken by an earlier line.
    pub duplicates: usize,
}

/// Splits `label : content` and identifies the label.
///
/// Returns the matched spec and the punctuation-stripped content after the
/// first colon.
pub fn split_field_line<'g>(line: &OcrLine, grammar: &'g FieldGrammar) -> Option<(&'g FieldSpec, String)> {
    let (label, content) = line.text().split_once(':')?;
    let idx = match_label(label, grammar)?;
    Some((&grammar.specs()[idx], strip_punctuation(content)))
}

pub fn parse_document(doc: &OcrDocument, grammar: &FieldGrammar) -> Vec<ExtractedField> {
    parse_document_with_report(doc, grammar).fields
}

struct Component {
    rendered: String,
    raw: String,
    line: usize,
}

pub fn parse_document_with_report(doc: &OcrDocument, grammar: &FieldGrammar) -> ParseReport {
    let mut report = ParseReport::default();
    let mut claimed: HashSet<String> = HashSet::new();
    let mut components: BTreeMap<String, Vec<(usize, Component)>> = BTreeMap::new();
    // position in `report.fields` reserved for composite targets
    let mut composite_slots: BTreeMap<String, usize> = BTreeMap::new();

    for (line_idx, line) in doc.lines.iter().enumerate() {
        let text = line.text();
        let mut claimed_any = false;

        let first = text
            .split_once(':')
            .and_then(|(label, rest)| match_label(label, grammar).map(|idx| (idx, rest)));
        if let Some((first_idx, rest)) = first {
            for (spec_idx, raw) in segments(first_idx, rest, grammar) {
                let spec = &grammar.specs()[spec_idx];
                if let Some(target) = &spec.compose_into {
                    let content = repaired_content(spec, raw, grammar);
                    let rendered = render_template(spec.compose_template.as_deref(), &content);
                    if rendered.is_empty() {
                        report.rejected += 1;
                        continue;
                    }
                    if !claimed.insert(spec.field_name.clone()) {
                        report.duplicates += 1;
                        continue;
                    }
                    claimed_any = true;
                    components.entry(target.clone()).or_default().push((
                        spec_idx,
                        Component {
                            rendered,
                            raw: raw.trim().to_string(),
                            line: line_idx,
                        },
                    ));
                    composite_slots
                        .entry(target.clone())
                        .or_insert_with(|| push_placeholder(&mut report.fields, target, line_idx));
                    continue;
                }
                let resolved = resolve(spec_idx, raw, grammar);
                if resolved.rejected {
                    report.rejected += 1;
                }
                for (name, value) in resolved.values {
                    if !claimed.insert(name.clone()) {
                        report.duplicates += 1;
                        continue;
                    }
                    claimed_any = true;
                    let field = ExtractedField {
                        field_name: name.clone(),
                        raw_text: raw.trim().to_string(),
                        value,
                        confidence: line.line_confidence(),
                        source_line: line_idx,
                    };
                    if let Some(&slot) = composite_slots.get(&name) {
                        report.fields[slot] = field;
                    } else {
                        if is_composite_target(&name, grammar) {
                            composite_slots.insert(name.clone(), report.fields.len());
                        }
                        report.fields.push(field);
                    }
                }
            }
        } else if !text.contains(':') {
            if let Some((name, value)) = claim_headline(text, grammar, &claimed) {
                claimed.insert(name.clone());
                claimed_any = true;
                report.fields.push(ExtractedField {
                    field_name: name,
                    raw_text: text.to_string(),
                    value,
                    confidence: line.line_confidence(),
                    source_line: line_idx,
                });
            }
        }
        if !claimed_any {
            report.unclaimed_lines += 1;
        }
    }

    for (target, slot) in composite_slots {
        let base = &report.fields[slot];
        let has_base = !base.raw_text.is_empty();
        let mut parts: Vec<String> = Vec::new();
        let mut raws: Vec<String> = Vec::new();
        let mut lines: Vec<usize> = Vec::new();
        if has_base {
            parts.push(base.value.clone());
            raws.push(base.raw_text.clone());
            lines.push(base.source_line);
        }
        let mut comps = components.remove(&target).unwrap_or_default();
        comps.sort_by_key(|(spec_idx, _)| *spec_idx);
        for (_, c) in comps {
            parts.push(c.rendered);
            raws.push(c.raw);
            if !lines.contains(&c.line) {
                lines.push(c.line);
            }
        }
        let confidence = mean_confidence(
            lines
                .iter()
                .flat_map(|&i| doc.lines[i].words().iter().map(|w| w.confidence)),
        )
        .unwrap_or(0);
        let field = &mut report.fields[slot];
        field.value = collapse_whitespace(&parts.join(" "));
        field.raw_text = raws.join(" | ");
        field.confidence = confidence;
        field.source_line = lines.iter().copied().min().unwrap_or(field.source_line);
    }
    report.fields.retain(|f| !f.value.is_empty());
    report
}

fn is_composite_target(name: &str, grammar: &FieldGrammar) -> bool {
    grammar.specs().iter().any(|s| s.compose_into.as_deref() == Some(name))
}

fn push_placeholder(fields: &mut Vec<ExtractedField>, target: &str, line: usize) -> usize {
    fields.push(ExtractedField {
        field_name: target.to_string(),
        raw_text: String::new(),
        value: String::new(),
        confidence: 0,
        source_line: line,
    });
    fields.len() - 1
}

/// Index of the spec whose alias is nearest to `label`, within the grammar's
/// distance bound. Ties go to the earlier spec.
fn match_label(label: &str, grammar: &FieldGrammar) -> Option<usize> {
    let norm = normalize_label(label);
    if norm.is_empty() {
        return None;
    }
    grammar
        .specs()
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let norm = &norm;
            s.label_aliases.iter().map(move |a| (edit_distance(norm, a), i))
        })
        .filter(|(d, _)| *d <= grammar.label_match_max_distance())
        .min()
        .map(|(_, i)| i)
}

/// Cuts content that carries a second `label : content` pair, as in
/// `LAKI-LAKI Gol. Darah : O`, into one segment per field.
fn segments<'t>(first: usize, content: &'t str, grammar: &FieldGrammar) -> Vec<(usize, &'t str)> {
    let mut out = Vec::new();
    let mut current = first;
    let mut rest = content;
    let mut search_from = 0;
    while let Some(pos) = rest[search_from..].find(':').map(|p| p + search_from) {
        let before = &rest[..pos];
        let starts: Vec<usize> = word_starts(before);
        let mut split = None;
        for k in (1..=starts.len().min(3)).rev() {
            let start = starts[starts.len() - k];
            if let Some(idx) = match_label(&before[start..], grammar) {
                let used = idx == current || out.iter().any(|(i, _)| *i == idx);
                if !used {
                    split = Some((start, idx));
                    break;
                }
            }
        }
        match split {
            Some((start, idx)) => {
                out.push((current, &before[..start]));
                current = idx;
                rest = &rest[pos + 1..];
                search_from = 0;
            }
            None => search_from = pos + 1,
        }
    }
    out.push((current, rest));
    out
}

fn word_starts(s: &str) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut prev_space = true;
    for (i, c) in s.char_indices() {
        if !c.is_whitespace() && prev_space {
            starts.push(i);
        }
        prev_space = c.is_whitespace();
    }
    starts
}

fn repaired_content(spec: &FieldSpec, raw: &str, grammar: &FieldGrammar) -> String {
    match spec.correction_policy {
        CorrectionPolicy::CharToDigit => strip_punctuation(&grammar.digit_map().apply(raw)),
        CorrectionPolicy::PunctuationOnly => strip_punctuation(raw),
        CorrectionPolicy::None => collapse_whitespace(raw),
    }
}

fn trim_edges(s: &str) -> String {
    s.trim_matches(|c: char| c.is_whitespace() || matches!(c, ':' | '.' | ',' | '-'))
        .to_string()
}

fn render_template(template: Option<&str>, content: &str) -> String {
    let content = trim_edges(content);
    let Some(template) = template else {
        return content;
    };
    if content.is_empty() {
        return String::new();
    }
    let slots = template.matches("{}").count();
    let words: Vec<&str> = content.split_whitespace().collect();
    let mut out = String::new();
    let mut rest = template;
    for slot in 0..slots {
        let (head, tail) = rest.split_once("{}").expect("counted above");
        out.push_str(head);
        let fill = if slot + 1 == slots {
            words.get(slot..).map(|w| w.join(" ")).unwrap_or_default()
        } else {
            words.get(slot).copied().unwrap_or_default().to_string()
        };
        out.push_str(&fill);
        rest = tail;
    }
    out.push_str(rest);
    collapse_whitespace(&out)
}

struct Resolved {
    values: Vec<(String, String)>,
    rejected: bool,
}

fn resolve(idx: usize, raw: &str, grammar: &FieldGrammar) -> Resolved {
    let spec = &grammar.specs()[idx];
    let content = repaired_content(spec, raw, grammar);
    let name = spec.field_name.clone();
    let mut values = Vec::new();
    let mut rejected = false;
    match spec.content_kind {
        ContentKind::FreeText => {
            let v = trim_edges(&content);
            if v.is_empty() {
                rejected = true;
            } else {
                values.push((name, v));
            }
        }
        ContentKind::Numeric => {
            let v: String = content.chars().filter(|c| !c.is_whitespace()).collect();
            let ok = !v.is_empty() && v.chars().all(|c| c.is_ascii_digit()) && spec.length.is_none_or(|n| v.len() == n);
            if ok {
                values.push((name, v));
            } else {
                rejected = true;
            }
        }
        ContentKind::Date => {
            let upper = content.to_uppercase();
            let literal = spec
                .literals
                .iter()
                .find(|l| upper.contains(l.as_str()) || edit_distance(&upper, l) <= grammar.label_match_max_distance());
            if let Some(lit) = literal {
                values.push((name, lit.clone()));
            } else if let Some(m) = find_date(&content) {
                values.push((name, m.as_str().to_string()));
                if let Some(prefix) = &spec.prefix_field {
                    let place = trim_edges(&content[..m.start()]);
                    if !place.is_empty() {
                        values.push((prefix.clone(), place));
                    }
                }
            } else {
                rejected = true;
                if let Some(prefix) = &spec.prefix_field {
                    let place = trim_edges(
                        &content
                            .split_whitespace()
                            .take_while(|w| !w.chars().any(|c| c.is_ascii_digit()))
                            .collect::<Vec<_>>()
                            .join(" "),
                    );
                    if !place.is_empty() {
                        values.push((prefix.clone(), place));
                    }
                }
            }
        }
        ContentKind::ClosedSet => {
            let upper = content.to_uppercase();
            let entry = grammar
                .pattern(idx)
                .and_then(|re| re.find(&upper))
                .map(|m| m.as_str().to_string())
                .or_else(|| match_closed_set(&content, &spec.vocabulary).map(str::to_string));
            match entry {
                Some(e) => values.push((name, spec.code_for(&e).to_string())),
                None => rejected = true,
            }
        }
    }
    Resolved { values, rejected }
}

/// Keywords shorter than this must match exactly.
const FUZZY_KEYWORD_MIN_LEN: usize = 6;

fn keyword_matches(word: &str, keyword: &str, max: usize) -> bool {
    if keyword.chars().count() >= FUZZY_KEYWORD_MIN_LEN {
        edit_distance(word, keyword) <= max
    } else {
        word == keyword
    }
}

fn claim_headline(text: &str, grammar: &FieldGrammar, claimed: &HashSet<String>) -> Option<(String, String)> {
    let clean = strip_punctuation(text);
    let upper = clean.to_uppercase();
    let words: Vec<&str> = upper.split_whitespace().collect();
    let orig_words: Vec<&str> = clean.split_whitespace().collect();
    let max = grammar.label_match_max_distance();
    for spec in grammar.specs() {
        let Some(rule) = &spec.headline else { continue };
        if claimed.contains(&spec.field_name) || words.is_empty() {
            continue;
        }
        if rule.bare_date {
            if let Some(m) = find_date(&clean) {
                return Some((spec.field_name.clone(), m.as_str().to_string()));
            }
            continue;
        }
        if !rule.starts_with.is_empty() {
            if rule.starts_with.iter().any(|kw| keyword_matches(words[0], kw, max)) {
                let value = if rule.strip_keyword {
                    orig_words[1..].join(" ")
                } else {
                    clean.clone()
                };
                if !value.is_empty() {
                    return Some((spec.field_name.clone(), value));
                }
            }
            continue;
        }
        if !rule.contains_word.is_empty()
            && words
                .iter()
                .any(|w| rule.contains_word.iter().any(|kw| keyword_matches(w, kw, max)))
        {
            return Some((spec.field_name.clone(), clean.clone()));
        }
    }
    None
}
