//! Grayscale conversion and fixed-threshold binarization.
//!
//! A card photo enters as an 8-bit [`RasterImage`] (1 or 3 channels), is
//! reduced to luma with BT.601 weights, and is then thresholded so that a
//! pixel becomes `1` only when it is strictly brighter than the threshold.
//! [`render_binary`] maps the bits back to 0/255 so an OCR engine that
//! expects ordinary 8-bit images can consume the result.

use std::io::Cursor;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};

/// Row-major 8-bit pixel buffer with one (gray) or three (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Geometry(format!("{width}x{height} has no pixels")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Geometry(format!("{channels} channels (must be 1 or 3)")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::Geometry(format!(
                "buffer holds {} bytes, {width}x{height}x{channels} needs {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Uniform single-channel image.
    pub fn filled_gray(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, 1, vec![value; width as usize * height as usize])
    }

    /// Decodes PNG or JPEG bytes. Alpha is dropped; 16-bit and float inputs
    /// are rejected rather than truncated.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes)?;
        Self::from_dynamic(img)
    }

    pub fn from_dynamic(img: DynamicImage) -> Result<Self> {
        let (width, height) = (img.width(), img.height());
        match img {
            DynamicImage::ImageLuma8(buf) => Self::new(width, height, 1, buf.into_raw()),
            DynamicImage::ImageLumaA8(_) => Self::new(width, height, 1, img.to_luma8().into_raw()),
            DynamicImage::ImageRgb8(buf) => Self::new(width, height, 3, buf.into_raw()),
            DynamicImage::ImageRgba8(_) => Self::new(width, height, 3, img.to_rgb8().into_raw()),
            other => Err(Error::UnsupportedDepth(format!("{:?}", other.color()))),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Channel values of the pixel at `(x, y)`.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let start = (y as usize * self.width as usize + x as usize) * c;
        &self.data[start..start + c]
    }

    /// Copies the `width`x`height` region whose top-left corner is `(left, top)`.
    pub fn crop(&self, left: u32, top: u32, width: u32, height: u32) -> Result<Self> {
        if width == 0
            || height == 0
            || left.checked_add(width).is_none_or(|r| r > self.width)
            || top.checked_add(height).is_none_or(|b| b > self.height)
        {
            return Err(Error::Bounds(format!(
                "crop ({left},{top}) {width}x{height} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let c = self.channels as usize;
        let mut data = Vec::with_capacity(width as usize * height as usize * c);
        for y in top..top + height {
            let row = (y as usize * self.width as usize + left as usize) * c;
            data.extend_from_slice(&self.data[row..row + width as usize * c]);
        }
        Self::new(width, height, self.channels, data)
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        match self.channels {
            1 => DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(self.width, self.height, self.data.clone())
                    .expect("dimensions checked at construction"),
            ),
            _ => DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(self.width, self.height, self.data.clone())
                    .expect("dimensions checked at construction"),
            ),
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        self.to_dynamic().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }
}

/// Row-major grid of `{0, 1}` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: u32, height: u32, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width as usize * height as usize {
            return Err(Error::Geometry(format!(
                "{} bits do not describe a {width}x{height} image",
                bits.len()
            )));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Geometry(format!("binary image contains value {bad}")));
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// Binarization cut-off. Pixels strictly above it become `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Threshold(pub u8);

impl Threshold {
    pub const DEFAULT: Threshold = Threshold(127);

    pub fn value(self) -> u8 {
        self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// BT.601 luma of one RGB pixel, rounded to nearest.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage> {
    if img.channels != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: img.channels,
        });
    }
    let data = img.data.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
    RasterImage::new(img.width, img.height, 1, data)
}

/// Gray passthrough for 1-channel input, luma conversion otherwise.
pub fn ensure_grayscale(img: &RasterImage) -> Result<RasterImage> {
    match img.channels {
        1 => Ok(img.clone()),
        _ => to_grayscale(img),
    }
}

pub fn binarize(img: &RasterImage, tr: Threshold) -> Result<BinaryImage> {
    if img.channels != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: img.channels,
        });
    }
    let bits = img.data.iter().map(|&p| u8::from(p > tr.0)).collect();
    Ok(BinaryImage {
        width: img.width,
        height: img.height,
        bits,
    })
}

pub fn render_binary(bin: &BinaryImage) -> RasterImage {
    let data = bin.bits.iter().map(|&b| if b == 1 { 255 } else { 0 }).collect();
    RasterImage {
        width: bin.width,
        height: bin.height,
        channels: 1,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rgb1(r: u8, g: u8, b: u8) -> RasterImage {
        RasterImage::new(1, 1, 3, vec![r, g, b]).unwrap()
    }

    #[test]
    fn grayscale_examples() {
        assert_eq!(to_grayscale(&rgb1(255, 255, 255)).unwrap().data(), &[255]);
        assert_eq!(to_grayscale(&rgb1(0, 0, 0)).unwrap().data(), &[0]);
        // round(0.299 * 255) = round(76.245)
        assert_eq!(to_grayscale(&rgb1(255, 0, 0)).unwrap().data(), &[76]);
    }

    #[test]
    fn grayscale_rejects_gray_input() {
        let gray = RasterImage::filled_gray(2, 2, 9).unwrap();
        assert!(matches!(
            to_grayscale(&gray),
            Err(Error::Dimension { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn binarize_boundary() {
        let img = RasterImage::new(2, 1, 1, vec![128, 127]).unwrap();
        let bin = binarize(&img, Threshold(127)).unwrap();
        assert_eq!(bin.bits(), &[1, 0]);
    }

    #[test]
    fn binarize_all_zero() {
        let img = RasterImage::filled_gray(4, 4, 0).unwrap();
        let bin = binarize(&img, Threshold::default()).unwrap();
        assert_eq!(bin.bits(), &[0u8; 16][..]);
        assert_eq!((bin.width(), bin.height()), (4, 4));
    }

    #[test]
    fn binarize_rejects_color() {
        assert!(matches!(
            binarize(&rgb1(1, 2, 3), Threshold(127)),
            Err(Error::Dimension { expected: 1, found: 3 })
        ));
    }

    #[test]
    fn render_examples() {
        let bin = BinaryImage::new(2, 1, vec![0, 1]).unwrap();
        assert_eq!(render_binary(&bin).data(), &[0, 255]);
        let ones = BinaryImage::new(3, 2, vec![1; 6]).unwrap();
        assert!(render_binary(&ones).data().iter().all(|&p| p == 255));
    }

    #[test]
    fn render_roundtrip_exhaustive_1x2() {
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let b = BinaryImage::new(2, 1, bits.to_vec()).unwrap();
            assert_eq!(binarize(&render_binary(&b), Threshold(127)).unwrap(), b);
        }
    }

    #[test]
    fn raster_rejects_bad_geometry() {
        assert!(RasterImage::new(0, 3, 1, vec![]).is_err());
        assert!(RasterImage::new(2, 2, 1, vec![0; 3]).is_err());
        assert!(RasterImage::new(1, 1, 2, vec![0; 2]).is_err());
        assert!(BinaryImage::new(1, 1, vec![2]).is_err());
    }

    #[test]
    fn crop_bounds() {
        let img = RasterImage::new(3, 2, 1, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(img.crop(1, 0, 2, 2).unwrap().data(), &[2, 3, 5, 6]);
        assert!(img.crop(2, 0, 2, 1).is_err());
        assert!(img.crop(0, 0, 0, 1).is_err());
    }

    #[test]
    fn decode_rejects_16_bit() {
        let img = DynamicImage::ImageLuma16(image::ImageBuffer::new(2, 2));
        let mut bytes = Cursor::new(Vec::new());
        img.write_to(&mut bytes, ImageFormat::Png).unwrap();
        assert!(matches!(
            RasterImage::decode(bytes.get_ref()),
            Err(Error::UnsupportedDepth(_))
        ));
    }

    #[test]
    fn png_roundtrip() {
        let img = RasterImage::new(2, 1, 3, vec![1, 2, 3, 250, 251, 252]).unwrap();
        let back = RasterImage::decode(&img.encode_png().unwrap()).unwrap();
        assert_eq!(back, img);
    }

    proptest! {
        #[test]
        fn binarize_output_is_binary(px in proptest::collection::vec(any::<u8>(), 1..64), tr in any::<u8>()) {
            let img = RasterImage::new(px.len() as u32, 1, 1, px).unwrap();
            let bin = binarize(&img, Threshold(tr)).unwrap();
            prop_assert!(bin.bits().iter().all(|&b| b <= 1));
        }

        #[test]
        fn raising_threshold_is_monotone(px in proptest::collection::vec(any::<u8>(), 1..64), a in any::<u8>(), b in any::<u8>()) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let img = RasterImage::new(px.len() as u32, 1, 1, px).unwrap();
            let low = binarize(&img, Threshold(lo)).unwrap();
            let high = binarize(&img, Threshold(hi)).unwrap();
            for (l, h) in low.bits().iter().zip(high.bits()) {
                prop_assert!(h <= l);
            }
        }

        #[test]
        fn render_then_binarize_is_identity(bits in proptest::collection::vec(0u8..=1, 1..64), tr in 0u8..=254) {
            let b = BinaryImage::new(bits.len() as u32, 1, bits).unwrap();
            prop_assert_eq!(binarize(&render_binary(&b), Threshold(tr)).unwrap(), b);
        }

        #[test]
        fn achromatic_luma_is_identity(v in any::<u8>()) {
            prop_assert_eq!(luma(v, v, v), v);
        }
    }
}
