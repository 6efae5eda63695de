use crate::error::{Error, Result};
use crate::preproc::RasterImage;

/// Summed-area table with a zero top row and left column.
///
/// `at(x, y)` is the sum of every pixel strictly above and to the left of
/// `(x, y)`, so any rectangle sum costs four lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: u32,
    height: u32,
    table: Vec<u64>,
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn new(left: u32, top: u32, width: u32, height: u32) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }
}

impl IntegralImage {
    pub fn new(img: &RasterImage) -> Result<Self> {
        Self::build(img, u64::from)
    }

    /// Table of squared intensities, used for window variance.
    pub fn squared(img: &RasterImage) -> Result<Self> {
        Self::build(img, |p| u64::from(p) * u64::from(p))
    }

    fn build(img: &RasterImage, f: impl Fn(u8) -> u64) -> Result<Self> {
        if img.channels() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: img.channels(),
            });
        }
        let (w, h) = (img.width() as usize, img.height() as usize);
        let stride = w + 1;
        let mut table = vec![0u64; stride * (h + 1)];
        let data = img.data();
        for y in 0..h {
            let mut row_sum = 0u64;
            for x in 0..w {
                row_sum += f(data[y * w + x]);
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row_sum;
            }
        }
        Ok(Self {
            width: img.width(),
            height: img.height(),
            table,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Sum of pixels in columns `0..x` and rows `0..y`.
    pub fn at(&self, x: u32, y: u32) -> u64 {
        self.table[y as usize * (self.width as usize + 1) + x as usize]
    }

    pub fn rect_sum(&self, rect: Rect) -> Result<u64> {
        let fits = rect.width > 0
            && rect.height > 0
            && rect.left.checked_add(rect.width).is_some_and(|r| r <= self.width)
            && rect.top.checked_add(rect.height).is_some_and(|b| b <= self.height);
        if !fits {
            return Err(Error::Bounds(format!(
                "rect {rect:?} outside {}x{} image",
                self.width, self.height
            )));
        }
        Ok(self.sum_unchecked(rect.left, rect.top, rect.left + rect.width, rect.top + rect.height))
    }

    /// Sum over columns `x0..x1`, rows `y0..y1`. Caller guarantees bounds.
    #[inline]
    pub(crate) fn sum_unchecked(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> u64 {
        let stride = self.width as usize + 1;
        let (x0, y0, x1, y1) = (x0 as usize, y0 as usize, x1 as usize, y1 as usize);
        let t = &self.table;
        t[y1 * stride + x1] + t[y0 * stride + x0] - t[y0 * stride + x1] - t[y1 * stride + x0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(img: &RasterImage, r: Rect) -> u64 {
        let mut s = 0;
        for y in r.top..r.top + r.height {
            for x in r.left..r.left + r.width {
                s += u64::from(img.pixel(x, y)[0]);
            }
        }
        s
    }

    #[test]
    fn ones_2x2() {
        let img = RasterImage::filled_gray(2, 2, 1).unwrap();
        let ii = IntegralImage::new(&img).unwrap();
        assert_eq!([ii.at(1, 1), ii.at(2, 1), ii.at(1, 2), ii.at(2, 2)], [1, 2, 2, 4]);
        assert_eq!(ii.at(0, 2), 0);
        assert_eq!(ii.at(2, 0), 0);
        assert_eq!(ii.rect_sum(Rect::new(0, 0, 2, 2)).unwrap(), 4);
    }

    #[test]
    fn single_pixel() {
        let img = RasterImage::filled_gray(1, 1, 7).unwrap();
        assert_eq!(IntegralImage::new(&img).unwrap().at(1, 1), 7);
    }

    #[test]
    fn degenerate_and_outside_rects_rejected() {
        let ii = IntegralImage::new(&RasterImage::filled_gray(3, 3, 1).unwrap()).unwrap();
        assert!(ii.rect_sum(Rect::new(0, 0, 0, 2)).is_err());
        assert!(ii.rect_sum(Rect::new(0, 0, 2, 0)).is_err());
        assert!(ii.rect_sum(Rect::new(2, 2, 2, 1)).is_err());
        assert!(ii.rect_sum(Rect::new(u32::MAX, 0, 2, 1)).is_err());
    }

    #[test]
    fn color_input_rejected() {
        let img = RasterImage::new(1, 1, 3, vec![1, 2, 3]).unwrap();
        assert!(IntegralImage::new(&img).is_err());
    }

    #[test]
    fn squared_table() {
        let img = RasterImage::new(2, 1, 1, vec![3, 4]).unwrap();
        assert_eq!(IntegralImage::squared(&img).unwrap().at(2, 1), 25);
    }

    #[test]
    fn every_rect_of_a_5x5_matches_brute_force() {
        let data: Vec<u8> = (0..25u32).map(|i| ((i * 97 + 13) % 256) as u8).collect();
        let img = RasterImage::new(5, 5, 1, data).unwrap();
        let ii = IntegralImage::new(&img).unwrap();
        let mut n = 0;
        for top in 0..5 {
            for left in 0..5 {
                for h in 1..=5 - top {
                    for w in 1..=5 - left {
                        let r = Rect::new(left, top, w, h);
                        assert_eq!(ii.rect_sum(r).unwrap(), brute(&img, r));
                        n += 1;
                    }
                }
            }
        }
        assert_eq!(n, 225);
    }

    proptest! {
        #[test]
        fn table_is_monotone(w in 1u32..10, h in 1u32..10, seed in any::<u64>()) {
            let data: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 7) as u8).collect();
            let ii = IntegralImage::new(&RasterImage::new(w, h, 1, data).unwrap()).unwrap();
            for y in 0..=h {
                for x in 0..=w {
                    if x > 0 { prop_assert!(ii.at(x, y) >= ii.at(x - 1, y)); }
                    if y > 0 { prop_assert!(ii.at(x, y) >= ii.at(x, y - 1)); }
                }
            }
        }
    }
}
