use rayon::prelude::*;

use super::cascade::{CascadeModel, HaarFeature};
use super::integral::IntegralImage;
use super::FaceBox;
use crate::error::Result;
use crate::preproc::{ensure_grayscale, RasterImage};

/// Sum and squared-sum tables over one grayscale image.
#[derive(Debug, Clone)]
pub struct Integrals {
    pub sum: IntegralImage,
    pub squared: IntegralImage,
}

impl Integrals {
    pub fn new(gray: &RasterImage) -> Result<Self> {
        Ok(Self {
            sum: IntegralImage::new(gray)?,
            squared: IntegralImage::squared(gray)?,
        })
    }

    pub fn width(&self) -> u32 {
        self.sum.width()
    }

    pub fn height(&self) -> u32 {
        self.sum.height()
    }

    /// Standard deviation of the window, floored at 1 so flat regions
    /// compare raw responses against the raw threshold.
    fn sigma(&self, w: FaceBox) -> f64 {
        let (x1, y1) = (w.left + w.width, w.top + w.height);
        let n = f64::from(w.width) * f64::from(w.height);
        let s = self.sum.sum_unchecked(w.left, w.top, x1, y1) as f64;
        let sq = self.squared.sum_unchecked(w.left, w.top, x1, y1) as f64;
        let var = (sq / n - (s / n) * (s / n)).max(0.0);
        var.sqrt().max(1.0)
    }
}

/// Outcome of running the cascade on one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowVerdict {
    pub accepted: bool,
    /// Stages actually evaluated; evaluation stops at the first failure.
    pub stages_evaluated: usize,
}

/// Rect of a feature placed in a window of one pyramid level.
#[derive(Debug, Clone, Copy)]
struct ScaledRect {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
    /// `weight * base_rect_area / (scaled_rect_area * base_window_area)`
    coef: f64,
}

#[derive(Debug, Clone)]
struct ScaledFeature {
    rects: Vec<ScaledRect>,
    threshold: f64,
    pass_value: f64,
    fail_value: f64,
}

#[derive(Debug, Clone)]
struct ScaledStage {
    features: Vec<ScaledFeature>,
    stage_threshold: f64,
}

/// Cascade with rect coordinates resolved for a `width` x `height` window.
///
/// A feature's response is the sum over its rects of
/// `weight * mean(scaled rect) * base rect area`, divided by the base window
/// area. Using the mean of the scaled rect keeps the response independent of
/// rounding at larger scales, so zero-sum features stay zero on flat regions.
#[derive(Debug, Clone)]
struct ScaledCascade {
    width: u32,
    height: u32,
    stages: Vec<ScaledStage>,
}

fn scaled(v: u32, scale: f64) -> u32 {
    (f64::from(v) * scale).round() as u32
}

impl ScaledCascade {
    fn new(model: &CascadeModel, width: u32, height: u32) -> Self {
        let scale = f64::from(width) / f64::from(model.window.w);
        let base_area = f64::from(model.window.w) * f64::from(model.window.h);
        let scale_feature = |f: &HaarFeature| ScaledFeature {
            rects: f
                .rects
                .iter()
                .map(|r| {
                    let x0 = scaled(r.x, scale).min(width - 1);
                    let y0 = scaled(r.y, scale).min(height - 1);
                    let x1 = scaled(r.x + r.w, scale).clamp(x0 + 1, width);
                    let y1 = scaled(r.y + r.h, scale).clamp(y0 + 1, height);
                    let area = f64::from(x1 - x0) * f64::from(y1 - y0);
                    ScaledRect {
                        x0,
                        y0,
                        x1,
                        y1,
                        coef: r.weight * f64::from(r.w * r.h) / (area * base_area),
                    }
                })
                .collect(),
            threshold: f.threshold,
            pass_value: f.pass_value,
            fail_value: f.fail_value,
        };
        Self {
            width,
            height,
            stages: model
                .stages
                .iter()
                .map(|s| ScaledStage {
                    features: s.features.iter().map(scale_feature).collect(),
                    stage_threshold: s.stage_threshold,
                })
                .collect(),
        }
    }

    fn classify(&self, ints: &Integrals, left: u32, top: u32) -> WindowVerdict {
        let sigma = ints.sigma(FaceBox::new(left, top, self.width, self.height));
        for (i, stage) in self.stages.iter().enumerate() {
            let mut score = 0.0;
            for f in &stage.features {
                let response: f64 = f
                    .rects
                    .iter()
                    .map(|r| r.coef * ints.sum.sum_unchecked(left + r.x0, top + r.y0, left + r.x1, top + r.y1) as f64)
                    .sum();
                score += if response >= f.threshold * sigma {
                    f.pass_value
                } else {
                    f.fail_value
                };
            }
            if score < stage.stage_threshold {
                return WindowVerdict {
                    accepted: false,
                    stages_evaluated: i + 1,
                };
            }
        }
        WindowVerdict {
            accepted: true,
            stages_evaluated: self.stages.len(),
        }
    }
}

/// Runs every stage on `window` and reports how far evaluation got.
///
/// The window must lie inside the image; its scale relative to the model's
/// base window is taken from its width.
pub fn classify_window(ints: &Integrals, model: &CascadeModel, window: FaceBox) -> WindowVerdict {
    debug_assert!(window.left + window.width <= ints.width());
    debug_assert!(window.top + window.height <= ints.height());
    ScaledCascade::new(model, window.width, window.height).classify(ints, window.left, window.top)
}

pub fn evaluate_window(ints: &Integrals, model: &CascadeModel, window: FaceBox) -> bool {
    classify_window(ints, model, window).accepted
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    /// Window growth per pyramid level.
    pub scale_factor: f64,
    /// Smallest window side in pixels.
    pub min_size: u32,
    /// Raw hits a group needs to survive merging.
    pub min_neighbors: usize,
    /// Relative tolerance of the overlap-grouping predicate.
    pub group_eps: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            scale_factor: 1.1,
            min_size: 24,
            min_neighbors: 3,
            group_eps: 0.2,
        }
    }
}

/// One level of the scale pyramid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidLevel {
    pub scale: f64,
    pub width: u32,
    pub height: u32,
    pub stride: u32,
}

/// Levels whose window fits inside a `width` x `height` image, smallest first.
pub fn pyramid(model: &CascadeModel, params: &DetectParams, width: u32, height: u32) -> Vec<PyramidLevel> {
    assert!(params.scale_factor > 1.0, "scale factor must exceed 1");
    let mut levels = Vec::new();
    let mut scale = 1.0f64;
    loop {
        let w = (f64::from(model.window.w) * scale).round() as u32;
        let h = (f64::from(model.window.h) * scale).round() as u32;
        if w > width || h > height {
            break;
        }
        if w >= params.min_size && h >= params.min_size {
            levels.push(PyramidLevel {
                scale,
                width: w,
                height: h,
                stride: ((scale / 10.0).round() as u32).max(1),
            });
        }
        scale *= params.scale_factor;
    }
    levels
}

/// Every accepted window before grouping, in a canonical order.
pub fn raw_detections(ints: &Integrals, model: &CascadeModel, params: &DetectParams) -> Vec<FaceBox> {
    let levels = pyramid(model, params, ints.width(), ints.height());
    let rows: Vec<(usize, u32)> = levels
        .iter()
        .enumerate()
        .flat_map(|(i, lvl)| {
            (0..=ints.height() - lvl.height)
                .step_by(lvl.stride as usize)
                .map(move |top| (i, top))
        })
        .collect();
    let scaled: Vec<ScaledCascade> = levels
        .iter()
        .map(|l| ScaledCascade::new(model, l.width, l.height))
        .collect();
    let mut hits: Vec<FaceBox> = rows
        .par_iter()
        .flat_map_iter(|&(i, top)| {
            let (lvl, cascade) = (&levels[i], &scaled[i]);
            (0..=ints.width() - lvl.width)
                .step_by(lvl.stride as usize)
                .filter(move |&left| cascade.classify(ints, left, top).accepted)
                .map(move |left| FaceBox::new(left, top, lvl.width, lvl.height))
        })
        .collect();
    hits.sort_unstable_by_key(FaceBox::sort_key);
    hits
}

/// Scans the pyramid and returns merged boxes, largest first.
///
/// Colour input is converted to luma first. Images smaller than the base
/// window yield no boxes.
pub fn detect_faces(img: &RasterImage, model: &CascadeModel, params: &DetectParams) -> Result<Vec<FaceBox>> {
    let gray = ensure_grayscale(img)?;
    let ints = Integrals::new(&gray)?;
    let hits = raw_detections(&ints, model, params);
    Ok(group_rectangles(&hits, params.min_neighbors, params.group_eps))
}

fn similar(a: &FaceBox, b: &FaceBox, eps: f64) -> bool {
    let delta = eps * f64::from(a.width.min(b.width) + a.height.min(b.height)) * 0.5;
    let close = |p: u32, q: u32| f64::from(p.abs_diff(q)) <= delta;
    close(a.left, b.left)
        && close(a.top, b.top)
        && close(a.left + a.width, b.left + b.width)
        && close(a.top + a.height, b.top + b.height)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Partitions hits by the overlap predicate, drops groups with fewer than
/// `min_neighbors` members, averages each survivor, and removes boxes lying
/// inside a stronger one. Output is sorted by area descending.
pub fn group_rectangles(hits: &[FaceBox], min_neighbors: usize, eps: f64) -> Vec<FaceBox> {
    let n = hits.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if similar(&hits[i], &hits[j], eps) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<&FaceBox>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(&hits[i]);
    }
    let merged: Vec<(FaceBox, usize)> = groups
        .values()
        .filter(|g| g.len() >= min_neighbors.max(1))
        .map(|g| {
            let k = g.len() as f64;
            let avg = |f: fn(&FaceBox) -> u32| (g.iter().map(|b| f64::from(f(b))).sum::<f64>() / k).round() as u32;
            (
                FaceBox::new(avg(|b| b.left), avg(|b| b.top), avg(|b| b.width), avg(|b| b.height)),
                g.len(),
            )
        })
        .collect();

    let mut out: Vec<FaceBox> = merged
        .iter()
        .filter(|(b, count)| {
            !merged
                .iter()
                .any(|(o, oc)| o != b && oc >= count && contains_with_margin(o, b))
        })
        .map(|(b, _)| *b)
        .collect();
    out.sort_by(|a, b| b.area().cmp(&a.area()).then(a.sort_key().cmp(&b.sort_key())));
    out
}

fn contains_with_margin(outer: &FaceBox, inner: &FaceBox) -> bool {
    let dx = (f64::from(outer.width) * 0.2).round() as i64;
    let dy = (f64::from(outer.height) * 0.2).round() as i64;
    let (ol, ot) = (i64::from(outer.left), i64::from(outer.top));
    let (il, it) = (i64::from(inner.left), i64::from(inner.top));
    il >= ol - dx
        && it >= ot - dy
        && il + i64::from(inner.width) <= ol + i64::from(outer.width) + dx
        && it + i64::from(inner.height) <= ot + i64::from(outer.height) + dy
}
