//! Writes a synthetic LabelMe corpus with matching detections and word
//! references, so every stage can run without external data.

use std::path::Path;

use marginalia_core::eval::Detection;
use marginalia_core::rng::{derive_seed, CounterRng};
use marginalia_core::synth::synthetic_page;
use marginalia_core::BBox;
use rayon::prelude::*;
use serde::Serialize;

use crate::detections::{write_detections, DetectionsByPage};
use crate::error::{Error, Result};
use crate::imageio::save_gray;
use crate::jsonl;
use crate::labelme::{to_labelme, LabelMePage};
use crate::words::crop_id;

pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const TRUTH_FILE: &str = "truth.jsonl";
pub const LEXICON_FILE: &str = "lexicon.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusSpec {
    pub pages: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            pages: 6,
            width: 350,
            height: 500,
            // same as the pipeline default, so `make-corpus` reproduces it
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub pages: usize,
    pub boxes: usize,
    pub words: usize,
}

#[derive(Serialize)]
struct TruthLine<'a> {
    crop_id: String,
    text: &'a str,
}

pub fn page_id(i: usize) -> String {
    format!("page_{i:03}")
}

/// Nudges a box by up to two pixels per side, staying on the page.
fn jitter(b: &BBox, rng: &mut CounterRng, w: u32, h: u32) -> BBox {
    let mut d = || rng.below(5) as i64 - 2;
    let x0 = (i64::from(b.x()) + d()).clamp(0, i64::from(w) - 1);
    let y0 = (i64::from(b.y()) + d()).clamp(0, i64::from(h) - 1);
    let x1 = (i64::from(b.right()) + d()).clamp(x0 + 1, i64::from(w));
    let y1 = (i64::from(b.bottom()) + d()).clamp(y0 + 1, i64::from(h));
    BBox::from_corners(x0 as u32, y0 as u32, x1 as u32, y1 as u32).expect("non-empty")
}

/// Writes `page_NNN.png` and `page_NNN.json` per page, plus
/// `detections.jsonl` (ground truth nudged slightly, and a false alarm on
/// every third page), `truth.jsonl` (words keyed by the crop ids that
/// segmenting the ground-truth boxes produces) and `lexicon.txt`.
pub fn write_synthetic_corpus(dir: &Path, spec: &CorpusSpec) -> Result<CorpusSummary> {
    if spec.pages == 0 {
        return Err(Error::Input("a corpus needs at least one page".into()));
    }
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let pages: Vec<_> = (0..spec.pages)
        .into_par_iter()
        .map(|i| {
            let id = page_id(i);
            let page = synthetic_page(spec.seed, &id, spec.width, spec.height);
            save_gray(&dir.join(format!("{id}.png")), &page.image)?;
            let doc = to_labelme(&LabelMePage {
                image_path: format!("{id}.png"),
                width: spec.width,
                height: spec.height,
                boxes: page.marginalia.clone(),
            });
            let json = dir.join(format!("{id}.json"));
            std::fs::write(&json, doc).map_err(Error::io(&json))?;
            Ok((id, page))
        })
        .collect::<Result<_>>()?;

    let mut detections = DetectionsByPage::new();
    let mut truth = Vec::new();
    let mut lexicon = std::collections::BTreeSet::new();
    for (i, (id, page)) in pages.iter().enumerate() {
        let mut rng = CounterRng::new(derive_seed(spec.seed ^ 0xde7, id));
        let mut dets: Vec<Detection> = page
            .marginalia
            .iter()
            .map(|b| Detection {
                page_id: id.clone(),
                bbox: jitter(b, &mut rng, spec.width, spec.height),
                score: (50 + rng.below(50)) as f64 / 100.0,
            })
            .collect();
        if i % 3 == 2 {
            let (w, h) = (spec.width / 5, spec.height / 20);
            dets.push(Detection {
                page_id: id.clone(),
                bbox: BBox::new(spec.width / 2 - w / 2, spec.height / 2, w.max(1), h.max(1))
                    .expect("positive"),
                score: 0.3,
            });
        }
        detections.insert(id.clone(), dets);
        for (d, lines) in page.words.iter().enumerate() {
            for (l, words) in lines.iter().enumerate() {
                for (w, text) in words.iter().enumerate() {
                    truth.push(TruthLine {
                        crop_id: crop_id(id, d, l, w),
                        text,
                    });
                    lexicon.insert(text.as_str());
                }
            }
        }
    }
    write_detections(&dir.join(DETECTIONS_FILE), &detections)?;
    jsonl::write(&dir.join(TRUTH_FILE), None, &truth)?;
    let lex_path = dir.join(LEXICON_FILE);
    let lex: String = lexicon.iter().map(|w| format!("{w}\n")).collect();
    std::fs::write(&lex_path, lex).map_err(Error::io(&lex_path))?;

    Ok(CorpusSummary {
        pages: pages.len(),
        boxes: pages.iter().map(|(_, p)| p.marginalia.len()).sum(),
        words: truth.len(),
    })
}
