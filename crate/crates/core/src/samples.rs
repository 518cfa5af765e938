//! Region-of-interest samples for the marginalia classifier.
//!
//! Positive samples come from ground-truth boxes, negative samples from
//! region proposals that do not overlap any ground truth at all. A box is
//! cut into `k = max(1, round(longer / shorter))` tiles along its longer
//! side so that elongated notes become roughly square pieces, and every
//! tile is resized to the classifier input size.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::BBox;
use crate::raster::{crop, resize, Raster};
use crate::rng::CounterRng;

/// Default classifier input side.
pub const ROI_SIZE: u32 = 227;

/// Default number of negative boxes per page.
pub const NEGATIVES_PER_PAGE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RoiLabel {
    Marginalia,
    NonMarginalia,
}

impl RoiLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoiLabel::Marginalia => "marginalia",
            RoiLabel::NonMarginalia => "non_marginalia",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiSample {
    pub page_id: String,
    pub label: RoiLabel,
    pub source_box: BBox,
    pub tile_index: u32,
    pub image: Raster,
}

/// `max(1, round_half_up(longer / shorter))`.
pub fn tile_count(b: &BBox) -> u32 {
    let (long, short) = if b.w() >= b.h() {
        (b.w(), b.h())
    } else {
        (b.h(), b.w())
    };
    let k = (2 * u64::from(long) + u64::from(short)) / (2 * u64::from(short));
    (k as u32).max(1)
}

/// Splits a box into [`tile_count`] pieces along its longer side. Pieces
/// are `floor(len / k)` long; the last one absorbs the remainder.
pub fn tile_box(b: &BBox) -> Vec<BBox> {
    let k = tile_count(b);
    let horizontal = b.w() >= b.h();
    let len = if horizontal { b.w() } else { b.h() };
    let step = len / k;
    (0..k)
        .map(|i| {
            let off = i * step;
            let piece = if i + 1 == k { len - off } else { step };
            if horizontal {
                BBox::new(b.x() + off, b.y(), piece, b.h())
            } else {
                BBox::new(b.x(), b.y() + off, b.w(), piece)
            }
            .expect("tiles have positive size")
        })
        .collect()
}

/// Crops, tiles and resizes one box.
pub fn box_rois(
    page_id: &str,
    page: &Raster,
    b: &BBox,
    label: RoiLabel,
    roi_size: u32,
) -> Result<Vec<RoiSample>> {
    b.check_within(page.width(), page.height())?;
    tile_box(b)
        .iter()
        .enumerate()
        .map(|(i, tile)| {
            Ok(RoiSample {
                page_id: String::from(page_id),
                label,
                source_box: *b,
                tile_index: i as u32,
                image: resize(&crop(page, tile)?, roi_size, roi_size)?,
            })
        })
        .collect()
}

/// Marginalia samples for every ground-truth box.
pub fn positive_rois(
    page_id: &str,
    page: &Raster,
    gt: &[BBox],
    roi_size: u32,
) -> Result<Vec<RoiSample>> {
    let mut out = Vec::new();
    for b in gt {
        out.extend(box_rois(page_id, page, b, RoiLabel::Marginalia, roi_size)?);
    }
    Ok(out)
}

/// Fewer negative candidates than requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shortfall {
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSelection {
    /// Chosen proposal boxes, in selection order.
    pub boxes: Vec<BBox>,
    pub samples: Vec<RoiSample>,
    pub shortfall: Option<Shortfall>,
}

/// Proposals with zero overlap against every ground-truth box, duplicates
/// removed, in first-seen order.
pub fn negative_candidates(gt: &[BBox], proposals: &[BBox]) -> Vec<BBox> {
    let mut out: Vec<BBox> = Vec::new();
    for p in proposals {
        if gt.iter().all(|g| g.intersection_area(p) == 0) && !out.contains(p) {
            out.push(*p);
        }
    }
    out
}

/// Draws `n` candidates uniformly without replacement under `seed`.
pub fn choose_negatives(candidates: &[BBox], n: usize, seed: u64) -> Vec<BBox> {
    let mut pool = candidates.to_vec();
    let take = n.min(pool.len());
    let mut rng = CounterRng::new(seed);
    // partial Fisher-Yates: the first `take` slots are the sample
    for i in 0..take {
        let j = i + rng.below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}

/// Non-marginalia samples: `n` proposals with IoU exactly zero against all
/// ground truth, cut and resized like positives.
pub fn negative_rois(
    page_id: &str,
    page: &Raster,
    gt: &[BBox],
    proposals: &[BBox],
    n: usize,
    seed: u64,
    roi_size: u32,
) -> Result<NegativeSelection> {
    let candidates = negative_candidates(gt, proposals);
    let shortfall = (candidates.len() < n).then_some(Shortfall {
        requested: n,
        available: candidates.len(),
    });
    let boxes = choose_negatives(&candidates, n, seed);
    let mut samples = Vec::new();
    for b in &boxes {
        samples.extend(box_rois(
            page_id,
            page,
            b,
            RoiLabel::NonMarginalia,
            roi_size,
        )?);
    }
    Ok(NegativeSelection {
        boxes,
        samples,
        shortfall,
    })
}

/// All samples generated for one page.
#[derive(Debug, Clone, PartialEq)]
pub struct PageSamples {
    pub positives: Vec<RoiSample>,
    pub negatives: NegativeSelection,
}

impl PageSamples {
    pub fn all(&self) -> impl Iterator<Item = &RoiSample> {
        self.positives.iter().chain(&self.negatives.samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SampleParams {
    pub negatives_per_page: usize,
    pub roi_size: u32,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            negatives_per_page: NEGATIVES_PER_PAGE,
            roi_size: ROI_SIZE,
        }
    }
}

pub fn page_samples(
    page_id: &str,
    page: &Raster,
    gt: &[BBox],
    proposals: &[BBox],
    params: &SampleParams,
    seed: u64,
) -> Result<PageSamples> {
    Ok(PageSamples {
        positives: positive_rois(page_id, page, gt, params.roi_size)?,
        negatives: negative_rois(
            page_id,
            page,
            gt,
            proposals,
            params.negatives_per_page,
            seed,
            params.roi_size,
        )?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::iou;
    use alloc::vec;

    fn bb(x: u32, y: u32, w: u32, h: u32) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    fn page() -> Raster {
        Raster::from_fn(400, 300, |x, y| ((x + 2 * y) % 251) as u8).unwrap()
    }

    #[test]
    fn square_box_single_tile() {
        assert_eq!(tile_box(&bb(5, 5, 80, 80)), vec![bb(5, 5, 80, 80)]);
    }

    #[test]
    fn wide_box_three_tiles() {
        assert_eq!(
            tile_box(&bb(0, 0, 300, 100)),
            vec![bb(0, 0, 100, 100), bb(100, 0, 100, 100), bb(200, 0, 100, 100)]
        );
    }

    #[test]
    fn tall_box_two_tiles() {
        assert_eq!(
            tile_box(&bb(10, 0, 100, 240)),
            vec![bb(10, 0, 100, 120), bb(10, 120, 100, 120)]
        );
    }

    #[test]
    fn last_tile_takes_remainder() {
        let tiles = tile_box(&bb(0, 0, 31, 10));
        assert_eq!(tiles.len(), 3);
        assert_eq!(tiles[2], bb(20, 0, 11, 10));
    }

    #[test]
    fn half_ratio_rounds_up() {
        assert_eq!(tile_count(&bb(0, 0, 25, 10)), 3);
        assert_eq!(tile_count(&bb(0, 0, 24, 10)), 2);
        assert_eq!(tile_count(&bb(0, 0, 14, 10)), 1);
    }

    #[test]
    fn positives_are_roi_sized() {
        let s = positive_rois("p", &page(), &[bb(0, 0, 300, 100), bb(10, 10, 50, 50)], 227).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|r| r.image.width() == 227 && r.image.height() == 227));
        assert!(s.iter().all(|r| r.label == RoiLabel::Marginalia));
        assert_eq!(s.iter().map(|r| r.tile_index).collect::<Vec<_>>(), vec![0, 1, 2, 0]);
    }

    #[test]
    fn one_pixel_overlap_excludes_candidate() {
        let gt = [bb(100, 100, 50, 50)];
        let props = [bb(149, 149, 20, 20), bb(150, 150, 20, 20)];
        assert_eq!(negative_candidates(&gt, &props), vec![bb(150, 150, 20, 20)]);
    }

    #[test]
    fn full_page_gt_gives_shortfall() {
        let p = page();
        let gt = [p.bounds()];
        let sel = negative_rois("p", &p, &gt, &[bb(0, 0, 10, 10)], 4, 1, 227).unwrap();
        assert!(sel.samples.is_empty());
        assert_eq!(
            sel.shortfall,
            Some(Shortfall {
                requested: 4,
                available: 0
            })
        );
    }

    #[test]
    fn negative_choice_is_seeded() {
        let cands: Vec<BBox> = (0..10).map(|i| bb(i * 30, 0, 20, 20)).collect();
        let a = choose_negatives(&cands, 4, 11);
        assert_eq!(a, choose_negatives(&cands, 4, 11));
        assert_eq!(a.len(), 4);
        let mut distinct = a.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn page_counts() {
        let p = page();
        let gt = [bb(10, 10, 40, 40), bb(300, 200, 60, 60)];
        let props: Vec<BBox> = (0..6).map(|i| bb(100 + i * 30, 100, 25, 25)).collect();
        let s = page_samples("p", &p, &gt, &props, &SampleParams::default(), 3).unwrap();
        assert_eq!(s.positives.len(), 2);
        assert_eq!(s.negatives.samples.len(), 4);
        assert!(s.negatives.shortfall.is_none());
        for n in &s.negatives.boxes {
            assert!(gt.iter().all(|g| iou(g, n) == 0.0));
        }
    }

    proptest::proptest! {
        #[test]
        fn tiles_partition_the_box(x in 0u32..50, y in 0u32..50, w in 1u32..400, h in 1u32..400) {
            let b = bb(x, y, w, h);
            let tiles = tile_box(&b);
            proptest::prop_assert_eq!(tiles.len() as u32, tile_count(&b));
            let total: u64 = tiles.iter().map(|t| t.area()).sum();
            proptest::prop_assert_eq!(total, b.area());
            for (i, t) in tiles.iter().enumerate() {
                proptest::prop_assert!(t.union_hull(&b) == b);
                for u in &tiles[i + 1..] {
                    proptest::prop_assert_eq!(t.intersection_area(u), 0);
                }
            }
        }
    }
}
