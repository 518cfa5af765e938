//! Line and word segmentation of a marginalia crop by projection profiles.
//!
//! Lines: Sobel edge magnitude, summed per row; rows whose sum reaches the
//! midpoint between the profile's maximum and minimum belong to a line.
//! Words: each line is binarized with Otsu's threshold, ink is counted per
//! column, and the line is cut at every blank gap strictly longer than the
//! mean interior gap.

use alloc::vec;
use alloc::vec::Vec;

use crate::raster::{crop, BinaryRaster, Raster};
use crate::BBox;

/// Sobel magnitude `min(255, |gx| + |gy|)` with edge-replicated borders.
pub fn sobel_magnitude(gray: &Raster) -> Raster {
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let at = |x: i64, y: i64| -> i32 {
        i32::from(gray.get(x.clamp(0, w - 1) as u32, y.clamp(0, h - 1) as u32))
    };
    Raster::from_fn(gray.width(), gray.height(), |x, y| {
        let (x, y) = (i64::from(x), i64::from(y));
        let gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
        let gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
        (gx.abs() + gy.abs()).min(255) as u8
    })
    .expect("same dimensions as the input")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axis {
    /// One value per row.
    Horizontal,
    /// One value per column.
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionProfile {
    pub axis: Axis,
    pub values: Vec<u64>,
}

impl ProjectionProfile {
    pub fn max(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> u64 {
        self.values.iter().copied().min().unwrap_or(0)
    }
}

/// Sum of intensities along each row.
pub fn horizontal_projection(image: &Raster) -> ProjectionProfile {
    ProjectionProfile {
        axis: Axis::Horizontal,
        values: (0..image.height())
            .map(|y| image.row(y).iter().map(|&p| u64::from(p)).sum())
            .collect(),
    }
}

/// Sum of intensities along each column.
pub fn vertical_projection(image: &Raster) -> ProjectionProfile {
    let mut values = vec![0u64; image.width() as usize];
    for y in 0..image.height() {
        for (v, &p) in values.iter_mut().zip(image.row(y)) {
            *v += u64::from(p);
        }
    }
    ProjectionProfile {
        axis: Axis::Vertical,
        values,
    }
}

/// Half-open index range `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(start: u32, end: u32) -> Self {
        debug_assert!(start < end);
        Self { start, end }
    }

    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

/// Why a segmentation step produced nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Diagnostic {
    /// The row profile is flat, so no threshold separates lines.
    NoTextStructure,
    /// The line contains no ink after binarization.
    NoInk,
}

/// Maximal runs of profile values at or above the midpoint
/// `(max + min) / 2`. A flat profile has no runs.
pub fn line_spans_from_profile(profile: &[u64]) -> Vec<Span> {
    let (Some(&max), Some(&min)) = (profile.iter().max(), profile.iter().min()) else {
        return Vec::new();
    };
    if max == min {
        return Vec::new();
    }
    // v >= (max + min) / 2  <=>  2v >= max + min
    let threshold = u128::from(max) + u128::from(min);
    runs(profile.iter().map(|&v| 2 * u128::from(v) >= threshold))
}

fn runs(flags: impl Iterator<Item = bool>) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start = None;
    let mut n = 0u32;
    for (i, on) in flags.enumerate() {
        let i = i as u32;
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(Span::new(s, i));
                start = None;
            }
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = start {
        out.push(Span::new(s, n));
    }
    out
}

/// Grows each span by up to `pad` rows per side without leaving
/// `0..limit` or touching a neighbouring span.
pub fn pad_spans(spans: &[Span], pad: u32, limit: u32) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::with_capacity(spans.len());
    for (i, s) in spans.iter().enumerate() {
        let floor = out.last().map_or(0, |p: &Span| p.end);
        let ceil = spans.get(i + 1).map_or(limit, |n| n.start);
        let start = s.start.saturating_sub(pad).max(floor);
        let end = (s.end + pad).min(ceil);
        out.push(Span::new(start, end));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSegment {
    /// Rows of the parent crop covered by the line.
    pub rows: Span,
    pub image: Raster,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordSegment {
    /// Rows of the parent crop (the line's span).
    pub rows: Span,
    /// Columns within the line.
    pub cols: Span,
    pub image: Raster,
}

impl WordSegment {
    /// Location of the word inside the segmented crop.
    pub fn bbox(&self) -> BBox {
        BBox::new(self.cols.start, self.rows.start, self.cols.len(), self.rows.len())
            .expect("spans are non-empty")
    }
}

/// Segmentation result together with the reason it is empty, if it is.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub items: Vec<T>,
    pub diagnostic: Option<Diagnostic>,
}

/// Line rows before padding: midpoint-thresholded row profile of the Sobel
/// image.
pub fn line_rows(crop_image: &Raster) -> Vec<Span> {
    line_spans_from_profile(&horizontal_projection(&sobel_magnitude(crop_image)).values)
}

/// Splits a crop into text lines, top to bottom. Each line is padded by one
/// row on either side where there is room.
pub fn split_lines(crop_image: &Raster) -> Outcome<LineSegment> {
    let rows = line_rows(crop_image);
    if rows.is_empty() {
        return Outcome {
            items: Vec::new(),
            diagnostic: Some(Diagnostic::NoTextStructure),
        };
    }
    let items = pad_spans(&rows, 1, crop_image.height())
        .into_iter()
        .map(|rows| LineSegment {
            rows,
            image: crop(
                crop_image,
                &BBox::new(0, rows.start, crop_image.width(), rows.len()).expect("non-empty span"),
            )
            .expect("span lies within the crop"),
        })
        .collect();
    Outcome {
        items,
        diagnostic: None,
    }
}

/// Otsu threshold: the `t` maximizing between-class variance of
/// `{p <= t}` versus `{p > t}`, smallest `t` on ties. `None` when the
/// image has a single intensity.
pub fn otsu_threshold(gray: &Raster) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &p in gray.pixels() {
        hist[usize::from(p)] += 1;
    }
    let total = gray.len() as u64;
    let sum_all: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();

    // sigma_b^2 * N^2 = (s0 * N - S * n0)^2 / (n0 * n1); compare exactly as
    // quotient and remainder of the integer fraction
    let mut best: Option<(u8, u128, u128, u128)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 0..255usize {
        n0 += hist[t];
        s0 += t as u64 * hist[t];
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (i128::from(s0) * i128::from(total) - i128::from(sum_all) * i128::from(n0))
            .unsigned_abs();
        let num = d * d;
        let den = u128::from(n0) * u128::from(n1);
        let (q, r) = (num / den, num % den);
        let better = match best {
            None => true,
            Some((_, bq, br, bden)) => q > bq || (q == bq && r * bden > br * den),
        };
        if better {
            best = Some((t as u8, q, r, den));
        }
    }
    best.map(|(t, ..)| t)
}

/// Otsu binarization; ink is the darker class (`p <= threshold`). A
/// single-intensity image has no ink.
pub fn binarize(gray: &Raster) -> BinaryRaster {
    let bits = match otsu_threshold(gray) {
        Some(t) => gray.pixels().iter().map(|&p| p <= t).collect(),
        None => vec![false; gray.len()],
    };
    BinaryRaster::from_bits(gray.width(), gray.height(), bits).expect("same dimensions")
}

/// Blank runs strictly between the first and last ink column.
pub fn interior_gaps(column_ink: &[u32]) -> Vec<Span> {
    let Some(first) = column_ink.iter().position(|&c| c > 0) else {
        return Vec::new();
    };
    let last = column_ink.iter().rposition(|&c| c > 0).expect("some ink");
    runs(column_ink[first..=last].iter().map(|&c| c == 0))
        .into_iter()
        .map(|s| Span::new(s.start + first as u32, s.end + first as u32))
        .collect()
}

/// Gaps longer than the mean interior gap length.
pub fn cut_gaps(column_ink: &[u32]) -> Vec<Span> {
    let gaps = interior_gaps(column_ink);
    let count = gaps.len() as u64;
    let total: u64 = gaps.iter().map(|g| u64::from(g.len())).sum();
    // len > total / count  <=>  len * count > total
    gaps.into_iter()
        .filter(|g| u64::from(g.len()) * count > total)
        .collect()
}

/// Word column spans from per-column ink counts, trimmed to ink.
pub fn word_spans(column_ink: &[u32]) -> Vec<Span> {
    let Some(first) = column_ink.iter().position(|&c| c > 0) else {
        return Vec::new();
    };
    let last = column_ink.iter().rposition(|&c| c > 0).expect("some ink") as u32;
    let mut out = Vec::new();
    let mut start = first as u32;
    for gap in cut_gaps(column_ink) {
        out.push(Span::new(start, gap.start));
        start = gap.end;
    }
    out.push(Span::new(start, last + 1));
    out
}

/// Splits a line image into words, left to right.
pub fn split_words(line: &Raster) -> Outcome<WordSegment> {
    split_words_in(line, Span::new(0, line.height()))
}

fn split_words_in(line: &Raster, rows: Span) -> Outcome<WordSegment> {
    let ink = binarize(line).column_ink();
    let spans = word_spans(&ink);
    if spans.is_empty() {
        return Outcome {
            items: Vec::new(),
            diagnostic: Some(Diagnostic::NoInk),
        };
    }
    let items = spans
        .into_iter()
        .map(|cols| WordSegment {
            rows,
            cols,
            image: crop(
                line,
                &BBox::new(cols.start, 0, cols.len(), line.height()).expect("non-empty span"),
            )
            .expect("span lies within the line"),
        })
        .collect();
    Outcome {
        items,
        diagnostic: None,
    }
}

/// Words of one detected line, with the line's row span.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedLine {
    pub rows: Span,
    pub words: Vec<WordSegment>,
    pub diagnostic: Option<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub lines: Vec<SegmentedLine>,
    pub diagnostic: Option<Diagnostic>,
}

impl Segmentation {
    /// Word segments grouped by line.
    pub fn words(&self) -> Vec<Vec<&WordSegment>> {
        self.lines.iter().map(|l| l.words.iter().collect()).collect()
    }

    pub fn word_count(&self) -> usize {
        self.lines.iter().map(|l| l.words.len()).sum()
    }
}

/// Lines, then words within each line, in reading order.
pub fn segment_marginalia(crop_image: &Raster) -> Segmentation {
    let lines = split_lines(crop_image);
    Segmentation {
        lines: lines
            .items
            .iter()
            .map(|line| {
                let words = split_words_in(&line.image, line.rows);
                SegmentedLine {
                    rows: line.rows,
                    words: words.items,
                    diagnostic: words.diagnostic,
                }
            })
            .collect(),
        diagnostic: lines.diagnostic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobel_constant_is_zero() {
        let img = Raster::filled(9, 7, 140).unwrap();
        assert!(sobel_magnitude(&img).pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn sobel_vertical_step() {
        // columns 0..2 are 0, columns 2..5 are 200
        let img = Raster::from_fn(5, 5, |x, _| if x < 2 { 0 } else { 200 }).unwrap();
        let s = sobel_magnitude(&img);
        for y in 0..5 {
            let row: Vec<u8> = (0..5).map(|x| s.get(x, y)).collect();
            // hand convolution: gx = 4 * 200 at columns 1 and 2, 0 elsewhere
            assert_eq!(row, vec![0, 255, 255, 0, 0], "row {y}");
        }
    }

    #[test]
    fn sobel_weak_step_exact_value() {
        let img = Raster::from_fn(5, 5, |x, _| if x < 2 { 0 } else { 20 }).unwrap();
        let s = sobel_magnitude(&img);
        assert_eq!(s.get(1, 2), 80);
        assert_eq!(s.get(2, 0), 80);
        assert_eq!(s.get(3, 4), 0);
    }

    #[test]
    fn projection_basics() {
        let zero = Raster::filled(4, 3, 0).unwrap();
        assert_eq!(horizontal_projection(&zero).values, vec![0, 0, 0]);
        let mut one = zero.clone();
        one.set(2, 1, 255);
        assert_eq!(horizontal_projection(&one).values, vec![0, 255, 0]);
        let img = Raster::from_fn(6, 5, |x, y| (x * 9 + y * 31) as u8).unwrap();
        let total: u64 = img.pixels().iter().map(|&p| u64::from(p)).sum();
        assert_eq!(horizontal_projection(&img).values.iter().sum::<u64>(), total);
        assert_eq!(vertical_projection(&img).values.iter().sum::<u64>(), total);
    }

    #[test]
    fn profile_hand_trace() {
        assert_eq!(
            line_spans_from_profile(&[0, 10, 10, 0, 0, 8, 8, 0]),
            vec![Span::new(1, 3), Span::new(5, 7)]
        );
    }

    #[test]
    fn flat_profile_has_no_lines() {
        assert!(line_spans_from_profile(&[5, 5, 5]).is_empty());
        let out = split_lines(&Raster::filled(10, 10, 200).unwrap());
        assert!(out.items.is_empty());
        assert_eq!(out.diagnostic, Some(Diagnostic::NoTextStructure));
    }

    #[test]
    fn padding_never_overlaps() {
        let spans = [Span::new(1, 3), Span::new(4, 6), Span::new(8, 9)];
        let padded = pad_spans(&spans, 1, 9);
        assert_eq!(padded, vec![Span::new(0, 4), Span::new(4, 7), Span::new(7, 9)]);
    }

    #[test]
    fn otsu_two_levels() {
        // 40% at 50, 60% at 200
        let img = Raster::from_fn(10, 10, |x, _| if x < 4 { 50 } else { 200 }).unwrap();
        let t = otsu_threshold(&img).unwrap();
        assert!((50..200).contains(&t));
        let b = binarize(&img);
        for y in 0..10 {
            for x in 0..10 {
                assert_eq!(b.get(x, y), x < 4);
            }
        }
    }

    #[test]
    fn constant_image_has_no_ink() {
        let b = binarize(&Raster::filled(6, 6, 90).unwrap());
        assert_eq!(b.count_ink(), 0);
        assert_eq!(otsu_threshold(&Raster::filled(2, 2, 0).unwrap()), None);
    }

    #[test]
    fn gap_rule_traces() {
        // gaps 1, 1, 4 -> mean 2 -> cut only at the 4-gap
        let ink = [0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 1, 0];
        assert_eq!(cut_gaps(&ink), vec![Span::new(6, 10)]);
        assert_eq!(word_spans(&ink), vec![Span::new(1, 6), Span::new(10, 11)]);
        // equal gaps: nothing strictly above the mean
        let even = [1, 0, 0, 1, 0, 0, 1, 0, 0, 1];
        assert_eq!(word_spans(&even), vec![Span::new(0, 10)]);
        // no interior gap
        assert_eq!(word_spans(&[0, 2, 3, 0]), vec![Span::new(1, 3)]);
        assert!(word_spans(&[0, 0]).is_empty());
    }

    #[test]
    fn blank_line_reports_no_ink() {
        let out = split_words(&Raster::filled(12, 5, 255).unwrap());
        assert!(out.items.is_empty());
        assert_eq!(out.diagnostic, Some(Diagnostic::NoInk));
    }

    #[test]
    fn blank_crop_segments_to_nothing() {
        let seg = segment_marginalia(&Raster::filled(30, 30, 255).unwrap());
        assert!(seg.lines.is_empty());
        assert_eq!(seg.word_count(), 0);
    }
}
