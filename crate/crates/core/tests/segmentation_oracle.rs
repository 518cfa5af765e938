//! Line and word segmentation on synthetic handwriting with known layout.

use marginalia_core::oracle::{gap_scan_cuts, otsu_exhaustive};
use marginalia_core::rng::CounterRng;
use marginalia_core::segment::{
    binarize, cut_gaps, horizontal_projection, line_rows, otsu_threshold, segment_marginalia,
    sobel_magnitude, split_lines, split_words, word_spans, Diagnostic,
};
use marginalia_core::synth::{Strokes, TextBlock, INK, PAPER};
use marginalia_core::Raster;

const MARGIN: u32 = 5;

fn block(lines: Vec<Vec<u32>>) -> TextBlock {
    TextBlock {
        lines,
        strokes: Strokes::default(),
    }
}

#[test]
fn k_bands_give_k_lines() {
    for k in 1..=6 {
        let b = block((0..k).map(|i| vec![3 + i % 2, 2, 4]).collect());
        let img = b.render(MARGIN);
        let boxes = b.word_boxes();

        // every true line row clears the midpoint threshold
        let profile = horizontal_projection(&sobel_magnitude(&img)).values;
        let (max, min) = (*profile.iter().max().unwrap(), *profile.iter().min().unwrap());
        for line in &boxes {
            let top = line[0].y() + MARGIN;
            for y in top..top + line[0].h() {
                assert!(2 * profile[y as usize] >= max + min, "k={k} row {y} below threshold");
            }
        }

        let rows = line_rows(&img);
        assert_eq!(rows.len(), k as usize, "k={k}: {rows:?}");
        let lines = split_lines(&img);
        assert_eq!(lines.diagnostic, None);
        assert_eq!(lines.items.len(), k as usize);
        for (seg, truth) in lines.items.iter().zip(&boxes) {
            let (top, bottom) = (truth[0].y() + MARGIN, truth[0].bottom() + MARGIN);
            assert!(seg.rows.start <= top && seg.rows.end >= bottom, "k={k} {:?}", seg.rows);
            // at most the Sobel halo plus one row of padding on either side
            assert!(top - seg.rows.start <= 2 && seg.rows.end - bottom <= 2, "k={k} {:?}", seg.rows);
            assert_eq!(seg.image.height(), seg.rows.len());
        }
        for pair in lines.items.windows(2) {
            assert!(pair[0].rows.end <= pair[1].rows.start);
        }
    }
}

#[test]
fn touching_lines_merge_into_one() {
    // no vertical gap: the row profile has no valley to threshold
    let b = TextBlock {
        lines: vec![vec![3, 2], vec![2, 4], vec![5]],
        strokes: Strokes {
            line_gap: 0,
            ..Strokes::default()
        },
    };
    assert_eq!(split_lines(&b.render(MARGIN)).items.len(), 1);
}

#[test]
fn flat_crop_has_no_structure() {
    let img = Raster::filled(40, 30, PAPER).unwrap();
    let lines = split_lines(&img);
    assert!(lines.items.is_empty());
    assert_eq!(lines.diagnostic, Some(Diagnostic::NoTextStructure));
    let words = split_words(&img);
    assert!(words.items.is_empty());
    assert_eq!(words.diagnostic, Some(Diagnostic::NoInk));
}

#[test]
fn three_lines_two_words() {
    let b = block(vec![vec![3, 4], vec![2, 5], vec![4, 2]]);
    let img = b.render(MARGIN);
    let seg = segment_marginalia(&img);
    assert_eq!(seg.diagnostic, None);
    assert_eq!(seg.lines.len(), 3);
    assert_eq!(seg.word_count(), 6);
    for (line, truth) in seg.lines.iter().zip(b.word_boxes()) {
        assert_eq!(line.diagnostic, None);
        let cols: Vec<(u32, u32)> = line.words.iter().map(|w| (w.cols.start, w.cols.end)).collect();
        let expected: Vec<(u32, u32)> = truth
            .iter()
            .map(|w| (w.x() + MARGIN, w.right() + MARGIN))
            .collect();
        assert_eq!(cols, expected);
        for w in &line.words {
            assert_eq!(w.rows, line.rows);
            assert_eq!(w.image.width(), w.cols.len());
        }
    }
}

#[test]
fn single_word_is_not_split() {
    let b = block(vec![vec![6]]);
    let words = split_words(&b.render(MARGIN));
    assert_eq!(words.items.len(), 1);
}

#[test]
fn random_rows_match_gap_scan() {
    let mut rng = CounterRng::new(77);
    let mut nonempty = 0;
    for _ in 0..500 {
        let len = 1 + rng.below(60) as usize;
        let density = 1 + rng.below(9);
        let ink: Vec<bool> = (0..len).map(|_| rng.below(10) < density).collect();
        let counts: Vec<u32> = ink.iter().map(|&b| u32::from(b) * (1 + rng.below(5) as u32)).collect();
        let got: Vec<(u32, u32)> = cut_gaps(&counts).iter().map(|g| (g.start, g.end)).collect();
        assert_eq!(got, gap_scan_cuts(&ink), "{ink:?}");
        nonempty += usize::from(!got.is_empty());

        // word spans tile the inked extent minus the cut gaps
        let spans = word_spans(&counts);
        let ink_total: u32 = counts.iter().sum();
        let covered: u32 = spans
            .iter()
            .map(|s| counts[s.start as usize..s.end as usize].iter().sum::<u32>())
            .sum();
        assert_eq!(covered, ink_total);
        assert_eq!(spans.len(), if ink_total == 0 { 0 } else { got.len() + 1 });
        for s in &spans {
            assert!(counts[s.start as usize] > 0 && counts[s.end as usize - 1] > 0);
        }
    }
    assert!(nonempty > 100, "only {nonempty} rows had cuts");
}

#[test]
fn otsu_matches_exhaustive_search() {
    let mut rng = CounterRng::new(5150);
    for i in 0..100 {
        // few distinct levels in some fixtures to exercise ties
        let levels = [2u64, 3, 5, 256][i % 4];
        let step = if levels == 256 { 1 } else { 255 / (levels - 1) };
        let img = Raster::from_fn(16, 16, |_, _| (rng.below(levels) * step) as u8).unwrap();
        assert_eq!(otsu_threshold(&img), otsu_exhaustive(&img), "fixture {i}");
    }
}

#[test]
fn two_level_image() {
    // 40% at 50, 60% at 200
    let img = Raster::from_fn(20, 10, |x, _| if x < 8 { 50 } else { 200 }).unwrap();
    let t = otsu_threshold(&img).unwrap();
    assert_eq!(t, 50);
    let ink = binarize(&img);
    assert_eq!(ink.count_ink(), 80);

    // inverting swaps which class is ink
    let inv = binarize(&img.invert());
    for y in 0..10 {
        for x in 0..20 {
            assert_ne!(ink.get(x, y), inv.get(x, y));
        }
    }
    assert!(otsu_threshold(&Raster::filled(4, 4, 9).unwrap()).is_none());
}

#[test]
fn ink_is_the_drawn_strokes() {
    let b = block(vec![vec![3, 2]]);
    let img = b.render(MARGIN);
    let ink = binarize(&img);
    for y in 0..img.height() {
        for x in 0..img.width() {
            assert_eq!(ink.get(x, y), img.get(x, y) == INK);
        }
    }
}

#[test]
fn sobel_commutes_with_transpose() {
    let mut rng = CounterRng::new(9);
    for _ in 0..20 {
        let (w, h) = (1 + rng.below(12) as u32, 1 + rng.below(12) as u32);
        let img = Raster::from_fn(w, h, |_, _| rng.below(256) as u8).unwrap();
        assert_eq!(sobel_magnitude(&img.transpose()), sobel_magnitude(&img).transpose());
    }
}

#[test]
fn synthetic_notes_segment_into_their_words() {
    use marginalia_core::raster::crop;
    use marginalia_core::synth::synthetic_page;
    let mut notes = 0;
    for i in 0..6 {
        let page = synthetic_page(7, &format!("page_{i:03}"), 350, 500);
        for (b, words) in page.marginalia.iter().zip(&page.words) {
            let seg = segment_marginalia(&crop(&page.image, b).unwrap());
            let got: Vec<usize> = seg.lines.iter().map(|l| l.words.len()).collect();
            let want: Vec<usize> = words.iter().map(Vec::len).collect();
            assert_eq!(got, want, "page {i} note {b:?}");
            notes += 1;
        }
    }
    assert!(notes >= 6);
}
