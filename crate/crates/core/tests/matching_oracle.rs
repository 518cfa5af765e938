//! Greedy matching checked against exhaustive search over all one-to-one
//! assignments, plus the corpus mean-IoU arithmetic.

use std::collections::BTreeMap;

use marginalia_core::eval::{evaluate, match_detections};
use marginalia_core::oracle::best_matching_exhaustive;
use marginalia_core::rng::CounterRng;
use marginalia_core::{iou, BBox};

fn random_box(rng: &mut CounterRng) -> BBox {
    let (x, y) = (rng.below(24) as u32, rng.below(24) as u32);
    BBox::new(x, y, 4 + rng.below(12) as u32, 4 + rng.below(12) as u32).unwrap()
}

fn distinct_ious(preds: &[BBox], gt: &[BBox]) -> bool {
    let mut v: Vec<f64> = preds
        .iter()
        .flat_map(|p| gt.iter().map(move |g| iou(p, g)))
        .filter(|&v| v > 0.0)
        .collect();
    v.sort_by(f64::total_cmp);
    v.windows(2).all(|w| w[0] != w[1])
}

#[test]
fn greedy_equals_exhaustive_when_ious_are_distinct() {
    let mut rng = CounterRng::new(31337);
    let (mut checked, mut nontrivial) = (0, 0);
    while checked < 400 {
        let np = 1 + rng.below(5) as usize;
        let ng = 1 + rng.below(5) as usize;
        let preds: Vec<BBox> = (0..np).map(|_| random_box(&mut rng)).collect();
        let gt: Vec<BBox> = (0..ng).map(|_| random_box(&mut rng)).collect();
        if !distinct_ious(&preds, &gt) {
            continue;
        }
        for thr in [0.1, 0.3, 0.5] {
            let m = match_detections(&preds, &gt, thr);
            let got: BTreeMap<usize, usize> = m.pairs.iter().map(|p| (p.pred, p.gt)).collect();
            assert_eq!(got, best_matching_exhaustive(&preds, &gt, thr), "{preds:?} {gt:?} {thr}");
            assert_eq!(m.true_positives() + m.false_negatives(), ng);
            assert_eq!(m.true_positives() + m.false_positives(), np);
            nontrivial += usize::from(got.len() >= 2);
        }
        checked += 1;
    }
    assert!(nontrivial > 50, "only {nontrivial} multi-pair instances");
}

#[test]
fn crossed_overlaps_pick_the_best_pair_first() {
    let gt = [BBox::new(0, 0, 10, 10).unwrap(), BBox::new(6, 0, 10, 10).unwrap()];
    // pred 0 touches both, pred 1 sits almost on gt 0
    let preds = [BBox::new(3, 0, 10, 10).unwrap(), BBox::new(1, 0, 10, 10).unwrap()];
    let m = match_detections(&preds, &gt, 0.3);
    let got: Vec<(usize, usize)> = m.pairs.iter().map(|p| (p.pred, p.gt)).collect();
    assert_eq!(got, vec![(1, 0), (0, 1)]);
    assert_eq!(
        m.pairs.iter().map(|p| (p.pred, p.gt)).collect::<BTreeMap<_, _>>(),
        best_matching_exhaustive(&preds, &gt, 0.3)
    );
}

#[test]
fn shifted_predictions_give_the_analytic_mean() {
    // every prediction is its box moved by (5, 5): IoU 25/175
    let mut rng = CounterRng::new(8);
    let pages: Vec<(String, Vec<BBox>, Vec<BBox>)> = (0..20)
        .map(|i| {
            let gt: Vec<BBox> = (0..1 + rng.below(3))
                .map(|k| BBox::new(k as u32 * 40, rng.below(100) as u32, 10, 10).unwrap())
                .collect();
            let preds = gt.iter().map(|b| b.translate(5, 5).unwrap()).collect();
            (format!("p{i}"), preds, gt)
        })
        .collect();
    let report = evaluate(
        pages.iter().map(|(id, p, g)| (id.as_str(), p.as_slice(), g.as_slice())),
        0.1,
    );
    assert_eq!(report.false_positives + report.false_negatives, 0);
    let expected = 25.0 / 175.0;
    assert!((report.mean_iou_penalized.unwrap() - expected).abs() <= 1e-12);
    assert!((report.mean_iou_matched.unwrap() - expected).abs() <= 1e-12);

    // at the default threshold nothing matches and the penalized mean is 0
    let strict = evaluate(
        pages.iter().map(|(id, p, g)| (id.as_str(), p.as_slice(), g.as_slice())),
        0.5,
    );
    assert_eq!(strict.mean_iou_penalized, Some(0.0));
    assert_eq!(strict.mean_iou_matched, None);
}

#[test]
fn empty_predictions_and_empty_truth() {
    let gt = [BBox::new(0, 0, 5, 5).unwrap()];
    let r = evaluate([("a", &[][..], &gt[..])], 0.5);
    assert_eq!(r.mean_iou_penalized, Some(0.0));
    assert_eq!(r.recall, Some(0.0));
    let r = evaluate([("a", &gt[..], &[][..])], 0.5);
    assert_eq!(r.mean_iou_penalized, None);
    assert!(!r.diagnostics.is_empty());
}
