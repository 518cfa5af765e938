#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use marginalia_core::{BBox, Raster};
use marginalia_pipeline::imageio::save_gray;
use marginalia_pipeline::labelme::{to_labelme, LabelMePage};
use marginalia_pipeline::PipelineConfig;

pub fn mini_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini-corpus")
}

pub fn config(corpus: &Path, out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.paths.corpus = Some(corpus.to_path_buf());
    cfg.paths.out = Some(out.to_path_buf());
    cfg
}

/// Mini-corpus config with its detections and reference words wired in.
pub fn mini_config(out: &Path) -> PipelineConfig {
    let corpus = mini_corpus();
    let mut cfg = config(&corpus, out);
    cfg.paths.detections = Some(corpus.join("detections.jsonl"));
    cfg.paths.truth = Some(corpus.join("truth.jsonl"));
    cfg
}

/// Every file under `dir`, keyed by its relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, acc);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                acc.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(dir, dir, &mut acc);
    acc
}

/// Writes a plain page with the given marginalia boxes drawn as dark
/// rectangles, plus its LabelMe file.
pub fn write_page(dir: &Path, id: &str, w: u32, h: u32, boxes: &[BBox]) {
    let img = Raster::from_fn(w, h, |x, y| {
        if boxes.iter().any(|b| b.contains_point(x, y)) {
            40
        } else {
            230
        }
    })
    .unwrap();
    save_gray(&dir.join(format!("{id}.png")), &img).unwrap();
    let page = LabelMePage {
        image_path: format!("{id}.png"),
        width: w,
        height: h,
        boxes: boxes.to_vec(),
    };
    std::fs::write(dir.join(format!("{id}.json")), to_labelme(&page)).unwrap();
}
