//! Grayscale and binary pixel grids plus the resampling operations on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::BBox;

/// Single-channel 8-bit image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

fn check_dims(width: u32, height: u32) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(CoreError::InvalidDimensions { width, height });
    }
    Ok(width as usize * height as usize)
}

impl Raster {
    /// Image of the given size filled with `value`.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![value; n],
        })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        let n = check_dims(width, height)?;
        if pixels.len() != n {
            return Err(CoreError::BufferLength {
                expected: n,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let n = check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        let start = y as usize * w;
        &self.pixels[start..start + w]
    }

    /// Box covering the whole image.
    pub fn bounds(&self) -> BBox {
        BBox::new(0, 0, self.width, self.height).expect("raster dimensions are positive")
    }

    pub fn map(&self, mut f: impl FnMut(u8) -> u8) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn invert(&self) -> Raster {
        self.map(|p| 255 - p)
    }

    pub fn transpose(&self) -> Raster {
        Raster::from_fn(self.height, self.width, |x, y| self.get(y, x))
            .expect("transposed dimensions are positive")
    }
}

/// Row-major foreground mask; `true` marks ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryRaster {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryRaster {
    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let n = check_dims(width, height)?;
        if bits.len() != n {
            return Err(CoreError::BufferLength {
                expected: n,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn count_ink(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of ink pixels in each column.
    pub fn column_ink(&self) -> Vec<u32> {
        let w = self.width as usize;
        let mut counts = vec![0u32; w];
        for row in self.bits.chunks_exact(w) {
            for (c, &b) in counts.iter_mut().zip(row) {
                *c += u32::from(b);
            }
        }
        counts
    }
}

/// Interleaved 8-bit RGB image, used for annotated overlays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbRaster {
    width: u32,
    height: u32,
    data: Vec<[u8; 3]>,
}

impl RgbRaster {
    pub fn from_gray(gray: &Raster) -> Self {
        Self {
            width: gray.width,
            height: gray.height,
            data: gray.pixels.iter().map(|&p| [p, p, p]).collect(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = rgb;
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    /// Flattened `r, g, b, r, g, b, ...` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().flatten().copied().collect()
    }
}

/// Copies the pixels under `bbox` into a new image.
pub fn crop(image: &Raster, bbox: &BBox) -> Result<Raster> {
    bbox.check_within(image.width, image.height)?;
    let mut pixels = Vec::with_capacity(bbox.area() as usize);
    for y in bbox.y()..bbox.bottom() {
        let row = image.row(y);
        pixels.extend_from_slice(&row[bbox.x() as usize..bbox.right() as usize]);
    }
    Raster::from_pixels(bbox.w(), bbox.h(), pixels)
}

/// Rounds a non-negative value half-up and saturates to `u8`.
#[inline]
pub(crate) fn round_to_u8(v: f64) -> u8 {
    if v <= 0.0 {
        0
    } else if v >= 255.0 {
        255
    } else {
        libm::floor(v + 0.5) as u8
    }
}

/// Source coordinate and blend weight for bilinear sampling along one axis,
/// using pixel-centre alignment.
fn sample_axis(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = f64::from(src) / f64::from(dst);
    let max = (src - 1) as f64;
    (0..dst)
        .map(|d| {
            let s = ((f64::from(d) + 0.5) * scale - 0.5).clamp(0.0, max);
            let i0 = libm::floor(s) as usize;
            let i1 = (i0 + 1).min(src as usize - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Bilinear resample to `target_w` x `target_h`.
///
/// Output pixel centres map onto input pixel centres, so resizing to the
/// source size reproduces the input exactly and an integer 2:1 reduction
/// averages pixel pairs.
pub fn resize(image: &Raster, target_w: u32, target_h: u32) -> Result<Raster> {
    check_dims(target_w, target_h)?;
    if target_w == image.width && target_h == image.height {
        return Ok(image.clone());
    }
    let xs = sample_axis(image.width, target_w);
    let ys = sample_axis(image.height, target_h);
    let mut out = Vec::with_capacity(target_w as usize * target_h as usize);
    for &(y0, y1, fy) in &ys {
        let r0 = image.row(y0 as u32);
        let r1 = image.row(y1 as u32);
        for &(x0, x1, fx) in &xs {
            let top = f64::from(r0[x0]) * (1.0 - fx) + f64::from(r0[x1]) * fx;
            let bottom = f64::from(r1[x0]) * (1.0 - fx) + f64::from(r1[x1]) * fx;
            out.push(round_to_u8(top * (1.0 - fy) + bottom * fy));
        }
    }
    Raster::from_pixels(target_w, target_h, out)
}

/// `round_half_up(v * num / den)` in exact integer arithmetic.
fn scale_coord(v: u32, num: u32, den: u32) -> u32 {
    let v = u64::from(v);
    ((2 * v * u64::from(num) + u64::from(den)) / (2 * u64::from(den))) as u32
}

/// Maps a box from a `src_w`x`src_h` frame onto `dst_w`x`dst_h`.
///
/// Both corners are scaled and rounded half-up, then clamped to the
/// destination. Boxes that collapse keep a width and height of at least one
/// pixel.
pub fn scale_box(b: &BBox, src_w: u32, src_h: u32, dst_w: u32, dst_h: u32) -> BBox {
    let axis = |lo: u32, hi: u32, src: u32, dst: u32| -> (u32, u32) {
        let mut a = scale_coord(lo, dst, src).min(dst - 1);
        let b = scale_coord(hi, dst, src).min(dst);
        let len = b.saturating_sub(a).max(1);
        if a + len > dst {
            a = dst - len;
        }
        (a, len)
    };
    let (x, w) = axis(b.x(), b.right(), src_w, dst_w);
    let (y, h) = axis(b.y(), b.bottom(), src_h, dst_h);
    BBox::new(x, y, w, h).expect("scaled box keeps positive size")
}

/// Resamples a page and carries its boxes into the new frame.
pub fn rescale_page(
    page: &Raster,
    boxes: &[BBox],
    target_w: u32,
    target_h: u32,
) -> Result<(Raster, Vec<BBox>)> {
    let image = resize(page, target_w, target_h)?;
    let boxes = boxes
        .iter()
        .map(|b| scale_box(b, page.width, page.height, target_w, target_h))
        .collect();
    Ok((image, boxes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: u32, h: u32) -> Raster {
        Raster::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 256) as u8).unwrap()
    }

    #[test]
    fn rejects_zero_dims_and_bad_buffers() {
        assert!(Raster::filled(0, 3, 0).is_err());
        assert!(Raster::from_pixels(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn crop_full_image_is_identity() {
        let img = gradient(12, 9);
        assert_eq!(crop(&img, &img.bounds()).unwrap(), img);
    }

    #[test]
    fn crop_single_pixel() {
        let img = gradient(12, 9);
        let c = crop(&img, &BBox::new(3, 4, 1, 1).unwrap()).unwrap();
        assert_eq!(c.pixels(), &[img.get(3, 4)]);
    }

    #[test]
    fn crop_out_of_bounds_is_range_error() {
        let img = gradient(12, 9);
        let err = crop(&img, &BBox::new(10, 0, 3, 2).unwrap()).unwrap_err();
        assert!(matches!(err, CoreError::OutOfBounds { .. }));
    }

    #[test]
    fn crop_composition() {
        let img = gradient(30, 20);
        let outer = BBox::new(4, 3, 20, 15).unwrap();
        let inner = BBox::new(2, 5, 7, 6).unwrap();
        let twice = crop(&crop(&img, &outer).unwrap(), &inner).unwrap();
        let once = crop(&img, &inner.translate(4, 3).unwrap()).unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = Raster::filled(37, 23, 128).unwrap();
        for (w, h) in [(1, 1), (5, 80), (227, 227), (36, 22)] {
            let r = resize(&img, w, h).unwrap();
            assert!(r.pixels().iter().all(|&p| p == 128), "{w}x{h}");
        }
    }

    #[test]
    fn resize_identity_is_bit_identical() {
        let img = gradient(31, 17);
        assert_eq!(resize(&img, 31, 17).unwrap(), img);
    }

    #[test]
    fn resize_halving_columns_matches_pair_average() {
        let img = gradient(454, 227);
        let out = resize(&img, 227, 227).unwrap();
        for x in 0..227u32 {
            let mut out_sum = 0.0;
            let mut in_sum = 0.0;
            for y in 0..227u32 {
                out_sum += f64::from(out.get(x, y));
                in_sum += (f64::from(img.get(2 * x, y)) + f64::from(img.get(2 * x + 1, y))) / 2.0;
            }
            let diff = (out_sum - in_sum) / 227.0;
            assert!(diff.abs() <= 1.0, "column {x}: {diff}");
        }
    }

    #[test]
    fn rescale_exact_halving() {
        let page = Raster::filled(700, 1000, 10).unwrap();
        let b = BBox::new(100, 200, 50, 60).unwrap();
        let (img, boxes) = rescale_page(&page, &[b], 350, 500).unwrap();
        assert_eq!((img.width(), img.height()), (350, 500));
        assert_eq!(boxes, vec![BBox::new(50, 100, 25, 30).unwrap()]);
    }

    #[test]
    fn rescale_identity() {
        let page = gradient(40, 30);
        let boxes = [BBox::new(1, 2, 3, 4).unwrap(), BBox::new(0, 0, 40, 30).unwrap()];
        let (img, out) = rescale_page(&page, &boxes, 40, 30).unwrap();
        assert_eq!(img, page);
        assert_eq!(out, boxes);
    }

    #[test]
    fn rescale_keeps_tiny_boxes_inside() {
        let b = BBox::new(999, 999, 1, 1).unwrap();
        let s = scale_box(&b, 1000, 1000, 10, 10);
        assert!(s.fits_within(10, 10));
        assert_eq!((s.w(), s.h()), (1, 1));
    }

    #[test]
    fn column_ink_counts() {
        let m = BinaryRaster::from_bits(3, 2, vec![true, false, true, true, false, false]).unwrap();
        assert_eq!(m.column_ink(), vec![2, 0, 1]);
        assert_eq!(m.count_ink(), 3);
    }
}
