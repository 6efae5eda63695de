//! Staged Haar classifier description.
//!
//! The native format is JSON:
//!
//! ```json
//! {
//!   "window": {"w": 24, "h": 24},
//!   "stages": [{
//!     "stage_threshold": 0.5,
//!     "features": [{
//!       "rects": [{"x": 3, "y": 8, "w": 18, "h": 4, "weight": -1.0},
//!                 {"x": 3, "y": 12, "w": 18, "h": 4, "weight": 1.0}],
//!       "threshold": 0.05, "pass_value": 1.0, "fail_value": 0.0
//!     }]
//!   }]
//! }
//! ```
//!
//! Rect coordinates are pixels of the base window. A stump-based OpenCV
//! cascade XML (such as the published frontal-face cascade) converts with
//! [`CascadeModel::from_opencv_xml`]: each weak classifier's left leaf
//! becomes `fail_value`, its right leaf `pass_value`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarFeature {
    pub rects: Vec<FeatureRect>,
    pub threshold: f64,
    pub pass_value: f64,
    pub fail_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeStage {
    pub features: Vec<HaarFeature>,
    pub stage_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSize {
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel {
    pub window: WindowSize,
    pub stages: Vec<CascadeStage>,
}

pub const MIN_WINDOW: u32 = 8;

impl CascadeModel {
    pub fn new(window: WindowSize, stages: Vec<CascadeStage>) -> Result<Self> {
        let model = Self { window, stages };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let WindowSize { w, h } = self.window;
        if w < MIN_WINDOW || h < MIN_WINDOW {
            return Err(Error::Cascade(format!("window {w}x{h} is smaller than 8x8")));
        }
        if self.stages.is_empty() {
            return Err(Error::Cascade("no stages".into()));
        }
        for (si, stage) in self.stages.iter().enumerate() {
            if stage.features.is_empty() {
                return Err(Error::Cascade(format!("stage {si} has no features")));
            }
            for (fi, f) in stage.features.iter().enumerate() {
                if f.rects.is_empty() {
                    return Err(Error::Cascade(format!("stage {si} feature {fi} has no rects")));
                }
                for r in &f.rects {
                    if r.w == 0 || r.h == 0 || r.x + r.w > w || r.y + r.h > h {
                        return Err(Error::Cascade(format!(
                            "stage {si} feature {fi}: rect {r:?} leaves the {w}x{h} window"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cascade serializes")
    }

    /// Loads `.xml` files as OpenCV cascades and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::NotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let is_xml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml"));
        if is_xml {
            Self::from_opencv_xml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    /// Converts an OpenCV `opencv-cascade-classifier` file with HAAR stumps.
    pub fn from_opencv_xml(xml: &str) -> Result<Self> {
        let doc = roxmltree::Document::parse(xml).map_err(|e| Error::Cascade(format!("xml: {e}")))?;
        let cascade = doc
            .descendants()
            .find(|n| n.has_tag_name("cascade"))
            .ok_or_else(|| Error::Cascade("no <cascade> element".into()))?;
        if let Some(kind) = child_text(cascade, "featureType") {
            if kind != "HAAR" {
                return Err(Error::Cascade(format!("feature type {kind} is not HAAR")));
            }
        }
        let w: u32 = parse_num(child_text(cascade, "width"), "width")?;
        let h: u32 = parse_num(child_text(cascade, "height"), "height")?;

        let features_node = child(cascade, "features").ok_or_else(|| Error::Cascade("no <features>".into()))?;
        let mut rect_sets = Vec::new();
        for feat in items(features_node) {
            if child_text(feat, "tilted").is_some_and(|t| t != "0") {
                return Err(Error::Cascade("tilted features are not supported".into()));
            }
            let rects_node = child(feat, "rects").ok_or_else(|| Error::Cascade("feature without <rects>".into()))?;
            let mut rects = Vec::new();
            for r in items(rects_node) {
                let nums = numbers(r.text().unwrap_or(""))?;
                if nums.len() != 5 {
                    return Err(Error::Cascade(format!("rect needs 5 numbers, got {}", nums.len())));
                }
                rects.push(FeatureRect {
                    x: nums[0] as u32,
                    y: nums[1] as u32,
                    w: nums[2] as u32,
                    h: nums[3] as u32,
                    weight: nums[4],
                });
            }
            rect_sets.push(rects);
        }

        let stages_node = child(cascade, "stages").ok_or_else(|| Error::Cascade("no <stages>".into()))?;
        let mut stages = Vec::new();
        for stage in items(stages_node) {
            let stage_threshold: f64 = parse_num(child_text(stage, "stageThreshold"), "stageThreshold")?;
            let weak = child(stage, "weakClassifiers")
                .ok_or_else(|| Error::Cascade("stage without <weakClassifiers>".into()))?;
            let mut features = Vec::new();
            for wc in items(weak) {
                let nodes = numbers(child_text(wc, "internalNodes").unwrap_or(""))?;
                let leaves = numbers(child_text(wc, "leafValues").unwrap_or(""))?;
                if nodes.len() != 4 || leaves.len() != 2 {
                    return Err(Error::Cascade(
                        "only single-split (stump) weak classifiers are supported".into(),
                    ));
                }
                let idx = nodes[2] as usize;
                let rects = rect_sets
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| Error::Cascade(format!("feature index {idx} out of range")))?;
                features.push(HaarFeature {
                    rects,
                    threshold: nodes[3],
                    fail_value: leaves[0],
                    pass_value: leaves[1],
                });
            }
            stages.push(CascadeStage {
                features,
                stage_threshold,
            });
        }
        Self::new(WindowSize { w, h }, stages)
    }

    /// Hand-built two-stage cascade for the synthetic portrait drawn by
    /// [`crate::synth::draw_face`]. Stage one rejects windows whose eye row
    /// is not darker than the cheeks. Stage two requires four intensity
    /// steps at their layout positions: the outer corners of both eyes,
    /// the hairline and the lower lip. Portraits narrower than about 40 px
    /// are missed.
    pub fn synthetic_face() -> Self {
        let rect = |x, y, w, h, weight| FeatureRect { x, y, w, h, weight };
        let stump = |rects: Vec<FeatureRect>, threshold| HaarFeature {
            rects,
            threshold,
            pass_value: 1.0,
            fail_value: 0.0,
        };
        let stages = vec![
            CascadeStage {
                features: vec![stump(vec![rect(3, 8, 18, 4, -1.0), rect(3, 12, 18, 4, 1.0)], 0.06)],
                stage_threshold: 0.5,
            },
            CascadeStage {
                features: vec![
                    stump(vec![rect(3, 9, 2, 3, 1.0), rect(5, 9, 2, 3, -1.0)], EDGE_EYE),
                    stump(vec![rect(19, 9, 2, 3, 1.0), rect(17, 9, 2, 3, -1.0)], EDGE_EYE),
                    stump(vec![rect(2, 4, 20, 2, 1.0), rect(2, 2, 20, 2, -1.0)], EDGE_HAIR),
                    stump(vec![rect(8, 19, 8, 2, 1.0), rect(8, 17, 8, 2, -1.0)], EDGE_MOUTH),
                ],
                stage_threshold: 3.5,
            },
        ];
        Self::new(WindowSize { w: 24, h: 24 }, stages).expect("fixture cascade is valid")
    }

    /// 8x8 cascade accepting a window only when a bright 4x4 square sits
    /// exactly at its centre on a darker background.
    pub fn bright_square() -> Self {
        let r = |x, y, w, h, weight| FeatureRect { x, y, w, h, weight };
        let stump = |rects: Vec<FeatureRect>, threshold| HaarFeature {
            rects,
            threshold,
            pass_value: 1.0,
            fail_value: 0.0,
        };
        let stages = vec![
            CascadeStage {
                features: vec![stump(vec![r(0, 0, 8, 8, -1.0), r(2, 2, 4, 4, 4.0)], 0.3)],
                stage_threshold: 0.5,
            },
            CascadeStage {
                features: vec![
                    stump(vec![r(1, 2, 1, 4, -1.0), r(2, 2, 1, 4, 1.0)], 0.02),
                    stump(vec![r(6, 2, 1, 4, -1.0), r(5, 2, 1, 4, 1.0)], 0.02),
                    stump(vec![r(2, 1, 4, 1, -1.0), r(2, 2, 4, 1, 1.0)], 0.02),
                    stump(vec![r(2, 6, 4, 1, -1.0), r(2, 5, 4, 1, 1.0)], 0.02),
                ],
                stage_threshold: 3.5,
            },
        ];
        Self::new(WindowSize { w: 8, h: 8 }, stages).expect("fixture cascade is valid")
    }
}

const EDGE_EYE: f64 = 0.014;
const EDGE_HAIR: f64 = 0.11;
const EDGE_MOUTH: f64 = 0.036;

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(tag))
}

fn child_text<'a>(node: roxmltree::Node<'a, '_>, tag: &str) -> Option<&'a str> {
    child(node, tag).and_then(|c| c.text()).map(str::trim)
}

/// `<_>` list entries.
fn items<'a, 'i>(node: roxmltree::Node<'a, 'i>) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Cascade(format!("`{t}` is not a number")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Cascade(format!("missing or invalid <{what}>")))
}
