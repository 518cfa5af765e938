//! Detection scoring against ground truth.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::{iou, BBox};
use crate::raster::{Raster, RgbRaster};

/// Default IoU needed for a prediction to match a ground-truth box.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// A predicted marginalia box on one page.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Detection {
    pub page_id: String,
    #[cfg_attr(feature = "serde", serde(rename = "box"))]
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchedPair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

/// One-to-one assignment between predictions and ground truth on a page.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

impl Matching {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }

    pub fn false_positives(&self) -> usize {
        self.unmatched_preds.len()
    }

    pub fn false_negatives(&self) -> usize {
        self.unmatched_gt.len()
    }
}

/// Greedy matching: all pairs with IoU at or above `iou_threshold` (and
/// above zero) are visited by descending IoU, ties by prediction index then
/// ground-truth index, and accepted when both sides are still free.
pub fn match_detections(preds: &[BBox], gt: &[BBox], iou_threshold: f64) -> Matching {
    let mut cands: Vec<MatchedPair> = Vec::new();
    for (p, pb) in preds.iter().enumerate() {
        for (g, gb) in gt.iter().enumerate() {
            let v = iou(pb, gb);
            if v > 0.0 && v >= iou_threshold {
                cands.push(MatchedPair { pred: p, gt: g, iou: v });
            }
        }
    }
    cands.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.pred.cmp(&b.pred))
            .then(a.gt.cmp(&b.gt))
    });
    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for c in cands {
        if !pred_used[c.pred] && !gt_used[c.gt] {
            pred_used[c.pred] = true;
            gt_used[c.gt] = true;
            pairs.push(c);
        }
    }
    Matching {
        pairs,
        unmatched_preds: (0..preds.len()).filter(|&i| !pred_used[i]).collect(),
        unmatched_gt: (0..gt.len()).filter(|&i| !gt_used[i]).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PageEval {
    pub page_id: String,
    pub gt_count: usize,
    pub pred_count: usize,
    pub matching: Matching,
}

/// Corpus-level detection report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub per_page: Vec<PageEval>,
    /// Mean over matched pairs, with every unmatched prediction and ground
    /// truth box counted as IoU 0.
    pub mean_iou_penalized: Option<f64>,
    /// Mean over matched pairs only.
    pub mean_iou_matched: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub gt_total: usize,
    pub pred_total: usize,
    pub diagnostics: Vec<String>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Aggregates per-page matchings into both mean-IoU variants plus
/// precision and recall. Mean IoU is undefined (`None`) when the corpus
/// has no ground-truth boxes.
pub fn summarize(iou_threshold: f64, per_page: Vec<PageEval>) -> EvalReport {
    let mut iou_sum = 0.0;
    let (mut tp, mut fp, mut fnc, mut gt_total, mut pred_total) = (0, 0, 0, 0, 0);
    for p in &per_page {
        iou_sum += p.matching.pairs.iter().map(|m| m.iou).sum::<f64>();
        tp += p.matching.true_positives();
        fp += p.matching.false_positives();
        fnc += p.matching.false_negatives();
        gt_total += p.gt_count;
        pred_total += p.pred_count;
    }
    let mut diagnostics = Vec::new();
    let (penalized, matched) = if gt_total == 0 {
        diagnostics.push(String::from("no ground-truth boxes: mean IoU is undefined"));
        (None, None)
    } else {
        let matched = if tp == 0 {
            diagnostics.push(String::from("no matched pairs: matched-only mean IoU is undefined"));
            None
        } else {
            Some(iou_sum / tp as f64)
        };
        (Some(iou_sum / (tp + fp + fnc) as f64), matched)
    };
    EvalReport {
        iou_threshold,
        per_page,
        mean_iou_penalized: penalized,
        mean_iou_matched: matched,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fnc),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fnc,
        gt_total,
        pred_total,
        diagnostics,
    }
}

/// Matches every page and summarizes. `pages` holds
/// `(page_id, predictions, ground_truth)`.
pub fn evaluate<'a, I>(pages: I, iou_threshold: f64) -> EvalReport
where
    I: IntoIterator<Item = (&'a str, &'a [BBox], &'a [BBox])>,
{
    let per_page = pages
        .into_iter()
        .map(|(page_id, preds, gt)| PageEval {
            page_id: String::from(page_id),
            gt_count: gt.len(),
            pred_count: preds.len(),
            matching: match_detections(preds, gt, iou_threshold),
        })
        .collect();
    summarize(iou_threshold, per_page)
}

/// Fraction of positions where the two label lists agree.
pub fn classification_accuracy<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(CoreError::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(CoreError::Empty("accuracy of an empty label list is undefined"));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

pub const GT_COLOR: [u8; 3] = [0, 255, 0];
pub const PRED_COLOR: [u8; 3] = [255, 0, 0];
pub const STROKE: u32 = 2;

/// Recolors the pixels of `b` lying within `stroke` pixels of its border.
/// Parts outside the image are skipped.
pub fn draw_box(img: &mut RgbRaster, b: &BBox, stroke: u32, color: [u8; 3]) {
    let x1 = b.right().min(img.width());
    let y1 = b.bottom().min(img.height());
    for y in b.y()..y1 {
        for x in b.x()..x1 {
            let edge = x - b.x() < stroke
                || b.right() - 1 - x < stroke
                || y - b.y() < stroke
                || b.bottom() - 1 - y < stroke;
            if edge {
                img.set(x, y, color);
            }
        }
    }
}

/// Page with ground truth in green and predictions in red on top.
pub fn render_overlay(page: &Raster, gt: &[BBox], preds: &[BBox]) -> RgbRaster {
    let mut img = RgbRaster::from_gray(page);
    for b in gt {
        draw_box(&mut img, b, STROKE, GT_COLOR);
    }
    for b in preds {
        draw_box(&mut img, b, STROKE, PRED_COLOR);
    }
    img
}
