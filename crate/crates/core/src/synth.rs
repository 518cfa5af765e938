//! Synthetic pages with known layout, for tests and demo corpora.
//!
//! Handwriting is imitated by words made of vertical ink strokes: strokes
//! inside a word are separated by a narrow gap, words by a wide one. The
//! generator records where every block, line and word lands, so the
//! segmentation and detection stages have exact ground truth.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::BBox;
use crate::raster::Raster;
use crate::rng::{derive_seed, CounterRng};

pub const PAPER: u8 = 235;
pub const INK: u8 = 30;

/// Stroke geometry of a text block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Strokes {
    pub stroke_w: u32,
    pub letter_gap: u32,
    pub word_gap: u32,
    pub line_h: u32,
    pub line_gap: u32,
    /// Joins each line with a rule along its bottom row, making the whole
    /// line one connected component.
    pub ruled: bool,
}

impl Default for Strokes {
    fn default() -> Self {
        Self {
            stroke_w: 2,
            letter_gap: 2,
            word_gap: 10,
            line_h: 9,
            line_gap: 8,
            ruled: false,
        }
    }
}

/// Words per line; each word is given by its letter count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextBlock {
    pub lines: Vec<Vec<u32>>,
    pub strokes: Strokes,
}

impl TextBlock {
    fn word_width(&self, letters: u32) -> u32 {
        let s = &self.strokes;
        letters * s.stroke_w + letters.saturating_sub(1) * s.letter_gap
    }

    fn line_width(&self, words: &[u32]) -> u32 {
        let s = &self.strokes;
        words.iter().map(|&n| self.word_width(n)).sum::<u32>()
            + words.len().saturating_sub(1) as u32 * s.word_gap
    }

    /// Size of the inked area.
    pub fn size(&self) -> (u32, u32) {
        let s = &self.strokes;
        let w = self.lines.iter().map(|l| self.line_width(l)).max().unwrap_or(0);
        let n = self.lines.len() as u32;
        (w, n * s.line_h + n.saturating_sub(1) * s.line_gap)
    }

    /// Boxes of every word relative to the block origin, by line.
    pub fn word_boxes(&self) -> Vec<Vec<BBox>> {
        let s = &self.strokes;
        let mut y = 0;
        let mut out = Vec::new();
        for line in &self.lines {
            let mut x = 0;
            let mut boxes = Vec::new();
            for &letters in line {
                let w = self.word_width(letters);
                boxes.push(BBox::new(x, y, w, s.line_h).expect("letters > 0"));
                x += w + s.word_gap;
            }
            out.push(boxes);
            y += s.line_h + s.line_gap;
        }
        out
    }

    /// Paints the block with its top-left inked pixel at `(x0, y0)`.
    pub fn draw(&self, img: &mut Raster, x0: u32, y0: u32, ink: u8) {
        let s = self.strokes;
        for word in self.word_boxes().iter().flatten() {
            let mut x = word.x();
            while x < word.right() {
                for dx in 0..s.stroke_w {
                    for dy in 0..s.line_h {
                        let (px, py) = (x0 + x + dx, y0 + word.y() + dy);
                        if px < img.width() && py < img.height() {
                            img.set(px, py, ink);
                        }
                    }
                }
                x += s.stroke_w + s.letter_gap;
            }
        }
        if s.ruled {
            for line in self.word_boxes() {
                let (Some(first), Some(last)) = (line.first(), line.last()) else {
                    continue;
                };
                let py = y0 + first.bottom() - 1;
                for px in x0 + first.x()..x0 + last.right() {
                    if px < img.width() && py < img.height() {
                        img.set(px, py, ink);
                    }
                }
            }
        }
    }

    /// The block alone on a paper background with `margin` pixels around.
    pub fn render(&self, margin: u32) -> Raster {
        let (w, h) = self.size();
        let mut img =
            Raster::filled(w + 2 * margin, h + 2 * margin, PAPER).expect("positive size");
        self.draw(&mut img, margin, margin, INK);
        img
    }
}

/// A synthetic page: marginalia boxes plus the words written in each.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPage {
    pub image: Raster,
    pub marginalia: Vec<BBox>,
    /// Words of each marginalia block, by line.
    pub words: Vec<Vec<Vec<String>>>,
}

const SYLLABLES: [&str; 12] = [
    "ta", "re", "mi", "lo", "vu", "sa", "ne", "qu", "or", "it", "em", "us",
];

fn make_word(rng: &mut CounterRng, letters: u32) -> String {
    let mut w = String::new();
    while (w.len() as u32) < letters {
        w.push_str(SYLLABLES[rng.below(SYLLABLES.len() as u64) as usize]);
    }
    w.truncate(letters as usize);
    w
}

/// Deterministic page for `(corpus_seed, page_id)`: a block of body text
/// in the centre and one to three handwritten notes in the margins.
pub fn synthetic_page(corpus_seed: u64, page_id: &str, width: u32, height: u32) -> SyntheticPage {
    let mut rng = CounterRng::new(derive_seed(corpus_seed, page_id));
    let mut image = Raster::filled(width, height, PAPER).expect("positive size");

    // body text: dense, regular, darker strokes
    let body = Strokes {
        stroke_w: 1,
        letter_gap: 1,
        word_gap: 4,
        line_h: 5,
        line_gap: 6,
        ruled: true,
    };
    let (bx0, by0) = (width / 4, height / 8);
    let body_w = width / 2;
    let body_lines = ((height * 3 / 4) / (body.line_h + body.line_gap)).max(1);
    let lines = (0..body_lines)
        .map(|_| {
            let mut words = Vec::new();
            let mut used = 0;
            loop {
                let n = 2 + rng.below(6) as u32;
                let w = n * 2 + body.word_gap;
                if used + w > body_w {
                    break;
                }
                used += w;
                words.push(n);
            }
            words
        })
        .collect();
    TextBlock {
        lines,
        strokes: body,
    }
    .draw(&mut image, bx0, by0, 10);

    // notes in the margins
    let slots = [
        (4, height / 8, width / 4 - 14),
        (width * 3 / 4 + 4, height / 3, width / 4 - 14),
        (4, height * 2 / 3, width / 4 - 14),
    ];
    let count = 1 + rng.below(3) as usize;
    let mut marginalia = Vec::new();
    let mut words = Vec::new();
    for &(sx, sy, max_w) in slots.iter().take(count) {
        let strokes = Strokes::default();
        let n_lines = 1 + rng.below(3) as u32;
        let mut block = TextBlock {
            lines: Vec::new(),
            strokes,
        };
        let mut text = Vec::new();
        for _ in 0..n_lines {
            let mut line = Vec::new();
            let mut line_text = Vec::new();
            let n_words = 2 + rng.below(2);
            for _ in 0..n_words {
                let letters = 3 + rng.below(4) as u32;
                line.push(letters);
                if block.line_width(&line) > max_w {
                    line.pop();
                    break;
                }
                line_text.push(make_word(&mut rng, letters));
            }
            if line.is_empty() {
                line.push(2);
                line_text.push(make_word(&mut rng, 2));
            }
            block.lines.push(line);
            text.push(line_text);
        }
        let (bw, bh) = block.size();
        let pad = 3;
        let (x, y) = (sx + pad, sy + pad);
        block.draw(&mut image, x, y, INK);
        let b = BBox::new(sx, sy, (bw + 2 * pad).min(width - sx), (bh + 2 * pad).min(height - sy))
            .expect("note fits the margin");
        marginalia.push(b);
        words.push(text);
    }
    SyntheticPage {
        image,
        marginalia,
        words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn block_geometry() {
        let block = TextBlock {
            lines: vec![vec![3, 2], vec![4]],
            strokes: Strokes::default(),
        };
        // 3 letters: 3*2 + 2*2 = 10; 2 letters: 6; gap 10
        assert_eq!(block.size(), (26, 9 * 2 + 8));
        let boxes = block.word_boxes();
        assert_eq!(boxes[0][1], BBox::new(20, 0, 6, 9).unwrap());
        assert_eq!(boxes[1][0], BBox::new(0, 17, 14, 9).unwrap());
        let img = block.render(2);
        assert_eq!(img.get(2, 2), INK);
        assert_eq!(img.get(4, 2), PAPER);
        assert_eq!(img.get(1, 2), PAPER);
    }

    #[test]
    fn pages_are_deterministic_and_boxes_fit() {
        let a = synthetic_page(5, "p1", 350, 500);
        assert_eq!(a, synthetic_page(5, "p1", 350, 500));
        assert!(!a.marginalia.is_empty());
        assert_eq!(a.marginalia.len(), a.words.len());
        for b in &a.marginalia {
            assert!(b.fits_within(350, 500));
        }
        for (i, b) in a.marginalia.iter().enumerate() {
            for c in &a.marginalia[i + 1..] {
                assert_eq!(b.intersection_area(c), 0);
            }
        }
    }
}
