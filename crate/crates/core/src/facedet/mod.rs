//! Portrait localisation with a boosted Haar cascade.
//!
//! Windows are scored against summed-area tables so every rectangle costs
//! four lookups regardless of size. The window grows by a fixed factor per
//! pyramid level, accepted windows are merged by overlap grouping, and the
//! largest surviving box is cropped and shipped as Base64 PNG.

mod cascade;
mod detect;
mod integral;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preproc::RasterImage;

pub use cascade::{CascadeModel, CascadeStage, FeatureRect, HaarFeature, WindowSize, MIN_WINDOW};
pub use detect::{
    classify_window, detect_faces, evaluate_window, group_rectangles, pyramid, raw_detections, DetectParams, Integrals,
    PyramidLevel, WindowVerdict,
};
pub use integral::{IntegralImage, Rect};

/// Detected portrait in card-image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceBox {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
}

impl FaceBox {
    pub fn new(left: u32, top: u32, width: u32, height: u32) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn right(&self) -> u32 {
        self.left + self.width
    }

    pub fn bottom(&self) -> u32 {
        self.top + self.height
    }

    pub(crate) fn sort_key(&self) -> (u32, u32, u32, u32) {
        (self.top, self.left, self.width, self.height)
    }
}

/// Base64 PNG crop together with the box it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCrop {
    pub base64: String,
    pub face_box: FaceBox,
}

/// Crops `face_box` out of `img`, encodes it as PNG, then as padded
/// standard-alphabet Base64.
pub fn crop_and_encode(img: &RasterImage, face_box: FaceBox) -> Result<FaceCrop> {
    let crop = img.crop(face_box.left, face_box.top, face_box.width, face_box.height)?;
    Ok(FaceCrop {
        base64: STANDARD.encode(crop.encode_png()?),
        face_box,
    })
}

/// Detects faces and crops the largest one, if any.
pub fn locate_portrait(img: &RasterImage, model: &CascadeModel, params: &DetectParams) -> Result<Option<FaceCrop>> {
    match detect_faces(img, model, params)?.first() {
        Some(b) => crop_and_encode(img, *b).map(Some),
        None => Ok(None),
    }
}

pub fn decode_base64(s: &str) -> Result<Vec<u8>> {
    STANDARD.decode(s).map_err(|e| Error::Validation {
        field: "base64".into(),
        message: e.to_string(),
    })
}
