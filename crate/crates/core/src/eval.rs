//! Field-level scoring against gold annotations.
//!
//! Every `(card, field)` pair in the gold file is one slot. Values compare by
//! exact equality after uppercasing and whitespace normalisation. Scores are
//! micro-averaged over slots; confidence keys never participate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{ExtractionTiming, Pipeline};
use crate::postproc::collapse_whitespace;
use crate::schema::KtpRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptureKind {
    Camera,
    Scanner,
}

impl std::fmt::Display for CaptureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaptureKind::Camera => "camera",
            CaptureKind::Scanner => "scanner",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub card_id: String,
    pub capture_kind: CaptureKind,
    pub expected: BTreeMap<String, String>,
}

pub fn canonicalize(s: &str) -> String {
    collapse_whitespace(&s.to_uppercase())
}

/// Reads a JSON array of annotations, canonicalising expected values.
pub fn load_gold(path: &Path) -> Result<Vec<GoldAnnotation>> {
    if !path.exists() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let gold: Vec<GoldAnnotation> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let mut ids = BTreeSet::new();
    for g in &gold {
        if !ids.insert(g.card_id.as_str()) {
            return Err(Error::Config(format!("duplicate card id `{}` in gold file", g.card_id)));
        }
    }
    Ok(gold
        .into_iter()
        .map(|mut g| {
            for v in g.expected.values_mut() {
                *v = canonicalize(v);
            }
            g
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotOutcome {
    TruePositive,
    /// Wrong non-empty prediction: one false positive and one false negative.
    Substitution,
    FalseNegative,
    FalsePositive,
    TrueNegative,
}

/// Compares canonicalised values.
pub fn score_field(predicted: &str, expected: &str) -> SlotOutcome {
    match (predicted.is_empty(), expected.is_empty()) {
        (true, true) => SlotOutcome::TrueNegative,
        (false, true) => SlotOutcome::FalsePositive,
        (true, false) => SlotOutcome::FalseNegative,
        (false, false) if predicted == expected => SlotOutcome::TruePositive,
        (false, false) => SlotOutcome::Substitution,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Tally {
    pub fn record(&mut self, outcome: SlotOutcome) {
        match outcome {
            SlotOutcome::TruePositive => self.tp += 1,
            SlotOutcome::Substitution => {
                self.fp += 1;
                self.fn_ += 1;
            }
            SlotOutcome::FalseNegative => self.fn_ += 1,
            SlotOutcome::FalsePositive => self.fp += 1,
            SlotOutcome::TrueNegative => {}
        }
    }

    pub fn add(&mut self, other: Tally) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn scores(&self) -> Scores {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f_score = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Scores {
            precision,
            recall,
            f_score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub cards: usize,
    #[serde(flatten)]
    pub tally: Tally,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cards: usize,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub per_capture_kind: BTreeMap<CaptureKind, KindReport>,
    pub per_field_breakdown: BTreeMap<String, Tally>,
    pub mean_latency_ms: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Scores predictions keyed by card id.
///
/// Every gold card needs a prediction and vice versa. Gold keys must name
/// text fields of the record.
pub fn evaluate(
    predictions: &BTreeMap<String, KtpRecord>,
    gold: &[GoldAnnotation],
    latencies_ms: &[f64],
) -> Result<EvalReport> {
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.card_id.as_str()).collect();
    let missing: Vec<String> = gold_ids
        .iter()
        .filter(|id| !predictions.contains_key(**id))
        .map(|s| s.to_string())
        .collect();
    let extra: Vec<String> = predictions
        .keys()
        .filter(|id| !gold_ids.contains(id.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::Dataset { missing, extra });
    }

    let mut total = Tally::default();
    let mut per_kind: BTreeMap<CaptureKind, (usize, Tally)> = BTreeMap::new();
    let mut per_field: BTreeMap<String, Tally> = BTreeMap::new();
    for g in gold {
        let rec = &predictions[&g.card_id];
        let kind = per_kind.entry(g.capture_kind).or_default();
        kind.0 += 1;
        for (field, expected) in &g.expected {
            let predicted = rec.text(field).ok_or_else(|| {
                Error::Config(format!(
                    "gold field `{field}` of card `{}` is not a record text field",
                    g.card_id
                ))
            })?;
            let outcome = score_field(&canonicalize(predicted), &canonicalize(expected));
            total.record(outcome);
            kind.1.record(outcome);
            per_field.entry(field.clone()).or_default().record(outcome);
        }
    }
    let s = total.scores();
    Ok(EvalReport {
        cards: gold.len(),
        true_positives: total.tp,
        false_positives: total.fp,
        false_negatives: total.fn_,
        precision: s.precision,
        recall: s.recall,
        f_score: s.f_score,
        per_capture_kind: per_kind
            .into_iter()
            .map(|(k, (cards, tally))| {
                (
                    k,
                    KindReport {
                        cards,
                        tally,
                        scores: tally.scores(),
                    },
                )
            })
            .collect(),
        per_field_breakdown: per_field,
        mean_latency_ms: mean(latencies_ms),
    })
}

impl EvalReport {
    /// Plain-text summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>5} {:>5} {:>5} {:>9} {:>7} {:>7}",
            "split", "cards", "tp", "fp", "fn", "precision", "recall", "f"
        );
        let row = |out: &mut String, name: &str, cards: usize, t: Tally, s: Scores| {
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>5} {:>5} {:>5} {:>9.3} {:>7.3} {:>7.3}",
                name, cards, t.tp, t.fp, t.fn_, s.precision, s.recall, s.f_score
            );
        };
        let total = Tally {
            tp: self.true_positives,
            fp: self.false_positives,
            fn_: self.false_negatives,
        };
        let scores = Scores {
            precision: self.precision,
            recall: self.recall,
            f_score: self.f_score,
        };
        row(&mut out, "all", self.cards, total, scores);
        for (kind, r) in &self.per_capture_kind {
            row(&mut out, &kind.to_string(), r.cards, r.tally, r.scores);
        }
        out.push('\n');
        for (field, t) in &self.per_field_breakdown {
            row(&mut out, field, self.cards, *t, t.scores());
        }
        let _ = writeln!(out, "\nmean latency: {:.1} ms", self.mean_latency_ms);
        out
    }
}

/// Runs one extraction and reports its timing split. The total includes
/// decoding, word acquisition, parsing, face detection and assembly.
pub fn time_extraction(pipeline: &Pipeline, image_bytes: &[u8], dump: Option<&str>) -> Result<ExtractionTiming> {
    let start = Instant::now();
    let extraction = pipeline.extract(image_bytes, dump)?;
    let wall = start.elapsed().as_secs_f64() * 1000.0;
    let mut timing = extraction.timing;
    timing.total_ms = timing.total_ms.max(wall);
    timing.excluded_ms = (timing.total_ms - timing.engine_ms).max(0.0);
    Ok(timing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(name: &str, religion: &str) -> KtpRecord {
        KtpRecord {
            name: name.into(),
            religion: religion.into(),
            ..KtpRecord::default()
        }
    }

    fn gold(id: &str, kind: CaptureKind, name: &str, religion: &str) -> GoldAnnotation {
        GoldAnnotation {
            card_id: id.into(),
            capture_kind: kind,
            expected: [
                ("name".to_string(), name.to_string()),
                ("religion".to_string(), religion.to_string()),
            ]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn slot_outcomes() {
        assert_eq!(score_field("ISLAM", "ISLAM"), SlotOutcome::TruePositive);
        assert_eq!(score_field("", "ISLAM"), SlotOutcome::FalseNegative);
        assert_eq!(score_field("KRISTEN", "ISLAM"), SlotOutcome::Substitution);
        assert_eq!(score_field("ISLAM", ""), SlotOutcome::FalsePositive);
        assert_eq!(score_field("", ""), SlotOutcome::TrueNegative);
    }

    #[test]
    fn single_wrong_field_scores_zero() {
        let mut t = Tally::default();
        t.record(score_field("KRISTEN", "ISLAM"));
        assert_eq!(t, Tally { tp: 0, fp: 1, fn_: 1 });
        assert_eq!(t.scores(), Scores::default());
    }

    #[test]
    fn perfect_and_half() {
        let g = vec![
            gold("a", CaptureKind::Camera, "Ani", "ISLAM"),
            gold("b", CaptureKind::Scanner, "Budi", "HINDU"),
        ];
        let perfect: BTreeMap<_, _> = [
            ("a".to_string(), rec("ANI", "islam")),
            ("b".to_string(), rec("budi ", "HINDU")),
        ]
        .into();
        assert_eq!(evaluate(&perfect, &g, &[]).unwrap().f_score, 1.0);

        let half: BTreeMap<_, _> = [
            ("a".to_string(), rec("ANI", "KRISTEN")),
            ("b".to_string(), rec("BUDY", "HINDU")),
        ]
        .into();
        let r = evaluate(&half, &g, &[4000.0, 5020.0]).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score), (0.5, 0.5, 0.5));
        assert_eq!(r.mean_latency_ms, 4510.0);
        assert_eq!(r.per_field_breakdown["religion"], Tally { tp: 1, fp: 1, fn_: 1 });
        assert!(r.table().contains("camera"));
    }

    #[test]
    fn id_mismatch_lists_both_sides() {
        let g = vec![gold("a", CaptureKind::Camera, "X", "ISLAM")];
        let p: BTreeMap<_, _> = [("z".to_string(), rec("X", "ISLAM"))].into();
        match evaluate(&p, &g, &[]) {
            Err(Error::Dataset { missing, extra }) => {
                assert_eq!(missing, ["a"]);
                assert_eq!(extra, ["z"]);
            }
            other => panic!("{other:?}"),
        }
    }

    fn arb_case() -> impl Strategy<Value = Vec<(String, String, bool)>> {
        proptest::collection::vec(("[A-C]{0,2}", "[A-C]{0,2}", any::<bool>()), 1..20)
    }

    fn build(case: &[(String, String, bool)]) -> (BTreeMap<String, KtpRecord>, Vec<GoldAnnotation>) {
        let mut preds = BTreeMap::new();
        let mut gs = Vec::new();
        for (i, (p, e, cam)) in case.iter().enumerate() {
            let id = format!("c{i:02}");
            preds.insert(id.clone(), rec(p, ""));
            let kind = if *cam {
                CaptureKind::Camera
            } else {
                CaptureKind::Scanner
            };
            gs.push(GoldAnnotation {
                card_id: id,
                capture_kind: kind,
                expected: [("name".to_string(), e.clone())].into(),
            });
        }
        (preds, gs)
    }

    proptest! {
        #[test]
        fn order_invariant_and_kinds_sum(case in arb_case()) {
            let (p, mut g) = build(&case);
            let a = evaluate(&p, &g, &[]).unwrap();
            g.reverse();
            let b = evaluate(&p, &g, &[]).unwrap();
            prop_assert_eq!(&a, &b);
            let mut sum = Tally::default();
            for k in a.per_capture_kind.values() {
                sum.add(k.tally);
            }
            prop_assert_eq!(sum, Tally { tp: a.true_positives, fp: a.false_positives, fn_: a.false_negatives });
            if a.precision + a.recall > 0.0 {
                prop_assert!((a.f_score - 2.0 * a.precision * a.recall / (a.precision + a.recall)).abs() < 1e-12);
            }
        }

        #[test]
        fn removing_a_hit_lowers_recall(case in arb_case()) {
            let (mut p, g) = build(&case);
            let before = evaluate(&p, &g, &[]).unwrap();
            let hit = g.iter().find(|x| {
                let e = &x.expected["name"];
                !e.is_empty() && p[&x.card_id].name == *e
            });
            if let Some(hit) = hit {
                p.get_mut(&hit.card_id).unwrap().name.clear();
                let after = evaluate(&p, &g, &[]).unwrap();
                prop_assert!(after.recall < before.recall);
            }
        }

        #[test]
        fn adding_a_false_positive_lowers_precision(case in arb_case()) {
            let (mut p, g) = build(&case);
            let before = evaluate(&p, &g, &[]).unwrap();
            let empty = g.iter().find(|x| x.expected["name"].is_empty() && p[&x.card_id].name.is_empty());
            if let Some(slot) = empty {
                if before.true_positives > 0 {
                    p.get_mut(&slot.card_id).unwrap().name = "ZZ".into();
                    let after = evaluate(&p, &g, &[]).unwrap();
                    prop_assert!(after.precision < before.precision);
                }
            }
        }
    }
}
