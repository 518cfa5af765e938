//! Pipeline stages. Each reads the manifests of earlier stages from the
//! output directory and writes its own; page-level work runs on the
//! current rayon pool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use marginalia_core::augment::augment_page;
use marginalia_core::eval::{evaluate, render_overlay, EvalReport};
use marginalia_core::geometry::iou;
use marginalia_core::mser::proposals as mser_proposals;
use marginalia_core::raster::{crop, rescale_page};
use marginalia_core::rng::{derive_seed, derive_stream};
use marginalia_core::samples::{page_samples, RoiLabel};
use marginalia_core::segment::segment_marginalia;
use marginalia_core::split::split_corpus;
use marginalia_core::text::{mock_recognize, word_accuracy, WordReport};
use marginalia_core::BBox;
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::detections::{read_detections, DetectionsByPage};
use crate::error::{Error, Result};
use crate::imageio::{load_gray, save_gray, save_rgb};
use crate::jsonl::{self, Header};
use crate::labelme::parse_labelme;
use crate::manifest::*;
use crate::words::{
    crop_id, import_recognitions, read_lexicon, read_truth, read_word_manifest, write_recognitions,
    write_word_manifest, WordCrop,
};

/// File names inside the output directory.
pub mod files {
    pub const PAGES: &str = "pages.jsonl";
    pub const MANIFEST: &str = "manifest.jsonl";
    pub const AUGMENTED: &str = "augmented.jsonl";
    pub const PROPOSALS: &str = "proposals.jsonl";
    pub const SAMPLES: &str = "samples.jsonl";
    pub const SHORTFALLS: &str = "shortfalls.jsonl";
    pub const SEGMENTS: &str = "segments.jsonl";
    pub const WORDS: &str = "words.jsonl";
    pub const EVAL_JSON: &str = "eval.json";
    pub const EVAL_TXT: &str = "eval.txt";
    pub const RECOGNITIONS: &str = "recognitions.jsonl";
    pub const WORD_SCORES_JSON: &str = "word_scores.json";
    pub const WORD_SCORES_TXT: &str = "word_scores.txt";
}

/// Image directories inside the output directory, one per stage.
pub mod dirs {
    pub const PAGES: &str = "pages";
    pub const AUGMENTED: &str = "augmented";
    pub const SAMPLES: &str = "samples";
    pub const WORDS: &str = "words";
    pub const LINES: &str = "lines";
    pub const OVERLAYS: &str = "overlays";
}

fn require(out: &Path, file: &str, stage: &'static str) -> Result<PathBuf> {
    let path = out.join(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingStage { stage, path })
    }
}

/// Empties a stage's image directory so re-runs leave no stale files.
fn fresh_dir(out: &Path, name: &str) -> Result<()> {
    let dir = out.join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(Error::io(&dir))?;
    }
    std::fs::create_dir_all(&dir).map_err(Error::io(&dir))
}

fn header(stage: &str, cfg: &PipelineConfig) -> Header {
    Header::new(stage, cfg.provenance())
}

/// Collects per-item results, reporting every failure at once.
fn gather<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let mut ok = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(ok)
    } else {
        Err(Error::many(errors))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::io(path))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializes");
    text.push('\n');
    write_text(path, &text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub pages: usize,
    pub boxes: usize,
    pub warnings: Vec<String>,
}

/// Parses every LabelMe file in the corpus directory, rescales pages and
/// boxes to the configured size and writes the page manifest.
pub fn ingest(cfg: &PipelineConfig) -> Result<IngestSummary> {
    let corpus = cfg.corpus_dir()?;
    let out = cfg.out_dir()?;
    let entries = std::fs::read_dir(corpus).map_err(Error::io(corpus))?;
    let mut json_files = Vec::new();
    for e in entries {
        let path = e.map_err(Error::io(corpus))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            json_files.push(path);
        }
    }
    json_files.sort();
    if json_files.is_empty() {
        return Err(Error::Input(format!(
            "{}: no LabelMe .json files found",
            corpus.display()
        )));
    }
    fresh_dir(out, dirs::PAGES)?;
    let target = cfg.rescale;

    let results: Vec<Result<(PageRecord, Vec<String>)>> = json_files
        .par_iter()
        .map(|json| {
            let text = std::fs::read_to_string(json).map_err(Error::io(json))?;
            let parsed = parse_labelme(&text).map_err(|m| Error::parse(json, m))?;
            let page_id = json
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::parse(json, "file name is not valid UTF-8"))?
                .to_string();
            let image_file = json.parent().unwrap_or(corpus).join(&parsed.page.image_path);
            let image = load_gray(&image_file)?;
            if (image.width(), image.height()) != (parsed.page.width, parsed.page.height) {
                return Err(Error::parse(
                    json,
                    format!(
                        "declared size {}x{} but {} is {}x{}",
                        parsed.page.width,
                        parsed.page.height,
                        image_file.display(),
                        image.width(),
                        image.height()
                    ),
                ));
            }
            let (scaled, boxes) =
                rescale_page(&image, &parsed.page.boxes, target.width, target.height)?;
            let image_path = format!("{}/{page_id}.png", dirs::PAGES);
            save_gray(&out.join(&image_path), &scaled)?;
            let source = image_file
                .strip_prefix(corpus)
                .unwrap_or(&image_file)
                .to_string_lossy()
                .replace('\\', "/");
            let warnings = parsed
                .warnings
                .into_iter()
                .map(|w| format!("{}: {w}", json.display()))
                .collect();
            Ok((
                PageRecord {
                    page_id,
                    image_path,
                    width: target.width,
                    height: target.height,
                    boxes,
                    split: None,
                    source,
                },
                warnings,
            ))
        })
        .collect();
    let parsed = gather(results)?;
    let mut warnings = Vec::new();
    let mut pages = Vec::with_capacity(parsed.len());
    for (page, w) in parsed {
        warnings.extend(w);
        pages.push(page);
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    pages.sort_by(|a, b| a.page_id.cmp(&b.page_id));
    write_pages(&out.join(files::PAGES), Some(&header("ingest", cfg)), &pages)?;
    Ok(IngestSummary {
        pages: pages.len(),
        boxes: pages.iter().map(|p| p.boxes.len()).sum(),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSummary {
    pub train: usize,
    pub test: usize,
}

/// Seeded train/test split of the ingested pages.
pub fn split(cfg: &PipelineConfig) -> Result<SplitSummary> {
    let out = cfg.out_dir()?;
    let (_, mut pages) = read_pages(&require(out, files::PAGES, "ingest")?)?;
    let ids: Vec<String> = pages.iter().map(|p| p.page_id.clone()).collect();
    let s = split_corpus(&ids, cfg.split.ratio, cfg.seed)?;
    for p in &mut pages {
        p.split = Some(if s.is_train(&p.page_id) {
            Split::Train
        } else {
            Split::Test
        });
    }
    write_pages(&out.join(files::MANIFEST), Some(&header("split", cfg)), &pages)?;
    Ok(SplitSummary {
        train: s.train.len(),
        test: s.test.len(),
    })
}

fn read_manifest(out: &Path) -> Result<Vec<PageRecord>> {
    let path = require(out, files::MANIFEST, "split")?;
    let (_, pages) = read_pages(&path)?;
    if pages.iter().any(|p| p.split.is_none()) {
        return Err(Error::parse(&path, "pages without a split; re-run the `split` stage"));
    }
    Ok(pages)
}

/// Four variants of every training page.
pub fn augment(cfg: &PipelineConfig) -> Result<usize> {
    let out = cfg.out_dir()?;
    let pages = read_manifest(out)?;
    fresh_dir(out, dirs::AUGMENTED)?;
    let train: Vec<&PageRecord> = pages.iter().filter(|p| p.split == Some(Split::Train)).collect();
    let results: Vec<Result<Vec<AugmentedRecord>>> = train
        .par_iter()
        .map(|page| {
            let image = load_gray(&out.join(&page.image_path))?;
            let samples = augment_page(&page.page_id, &image, &page.boxes, &cfg.augment, cfg.seed)?;
            samples
                .into_iter()
                .map(|s| {
                    let sample_id = s.sample_id();
                    let image_path = format!("{}/{sample_id}.png", dirs::AUGMENTED);
                    save_gray(&out.join(&image_path), &s.image)?;
                    Ok(AugmentedRecord {
                        sample_id,
                        page_id: s.source_page_id,
                        variant: s.variant,
                        seed: s.seed,
                        applied: s.applied,
                        image_path,
                        width: s.image.width(),
                        height: s.image.height(),
                        boxes: s.boxes,
                    })
                })
                .collect()
        })
        .collect();
    let records: Vec<AugmentedRecord> = gather(results)?.into_iter().flatten().collect();
    if records.len() != 4 * train.len() {
        return Err(Error::Invariant(format!(
            "{} augmented samples from {} training pages",
            records.len(),
            train.len()
        )));
    }
    jsonl::write(&out.join(files::AUGMENTED), Some(&header("augment", cfg)), &records)?;
    Ok(records.len())
}

fn read_augmented(out: &Path) -> Result<Vec<AugmentedRecord>> {
    Ok(jsonl::read(&require(out, files::AUGMENTED, "augment")?)?.1)
}

/// MSER proposals for every augmented sample.
pub fn proposals(cfg: &PipelineConfig) -> Result<usize> {
    let out = cfg.out_dir()?;
    let samples = read_augmented(out)?;
    let results: Vec<Result<ProposalRecord>> = samples
        .par_iter()
        .map(|s| {
            let image = load_gray(&out.join(&s.image_path))?;
            let props = mser_proposals(&image, &cfg.proposals)?;
            Ok(ProposalRecord {
                sample_id: s.sample_id.clone(),
                proposals: props
                    .into_iter()
                    .map(|p| ProposalEntry {
                        bbox: p.bbox,
                        stability: p.stability,
                    })
                    .collect(),
            })
        })
        .collect();
    let records = gather(results)?;
    let total = records.iter().map(|r| r.proposals.len()).sum();
    jsonl::write(&out.join(files::PROPOSALS), Some(&header("proposals", cfg)), &records)?;
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplesSummary {
    pub positives: usize,
    pub negatives: usize,
    pub shortfalls: usize,
}

/// Training ROIs: tiled ground-truth crops and proposal crops that miss
/// every ground-truth box.
pub fn samples(cfg: &PipelineConfig) -> Result<SamplesSummary> {
    let out = cfg.out_dir()?;
    let augmented = read_augmented(out)?;
    let props_path = require(out, files::PROPOSALS, "proposals")?;
    let props: BTreeMap<String, Vec<BBox>> = jsonl::read::<ProposalRecord>(&props_path)?
        .1
        .into_iter()
        .map(|r| (r.sample_id, r.proposals.into_iter().map(|p| p.bbox).collect()))
        .collect();
    fresh_dir(out, dirs::SAMPLES)?;

    type PageOut = (Vec<SampleRecord>, Option<ShortfallRecord>);
    let results: Vec<Result<PageOut>> = augmented
        .par_iter()
        .map(|aug| {
            let proposals = props.get(&aug.sample_id).ok_or_else(|| {
                Error::parse(&props_path, format!("no proposals for `{}`", aug.sample_id))
            })?;
            let image = load_gray(&out.join(&aug.image_path))?;
            let seed = derive_stream(derive_seed(cfg.seed, &aug.sample_id), 3);
            let made = page_samples(&aug.sample_id, &image, &aug.boxes, proposals, &cfg.samples, seed)?;
            for b in &made.negatives.boxes {
                if aug.boxes.iter().any(|g| iou(g, b) != 0.0) {
                    return Err(Error::Invariant(format!(
                        "{}: negative {b:?} overlaps ground truth",
                        aug.sample_id
                    )));
                }
            }
            let mut records = Vec::new();
            let (mut npos, mut nneg) = (0, 0);
            for roi in made.all() {
                let size = cfg.samples.roi_size;
                if (roi.image.width(), roi.image.height()) != (size, size) {
                    return Err(Error::Invariant(format!(
                        "{}: ROI is {}x{}",
                        aug.sample_id,
                        roi.image.width(),
                        roi.image.height()
                    )));
                }
                let counter = match roi.label {
                    RoiLabel::Marginalia => &mut npos,
                    RoiLabel::NonMarginalia => &mut nneg,
                };
                let tag = if roi.label == RoiLabel::Marginalia { "pos" } else { "neg" };
                let sample_id = format!("{}_{tag}_{:03}", aug.sample_id, *counter);
                *counter += 1;
                let image_path = format!("{}/{sample_id}.png", dirs::SAMPLES);
                save_gray(&out.join(&image_path), &roi.image)?;
                records.push(SampleRecord {
                    sample_id,
                    page_id: aug.page_id.clone(),
                    augmented_id: aug.sample_id.clone(),
                    label: roi.label,
                    source_box: roi.source_box,
                    tile_index: roi.tile_index,
                    image_path,
                });
            }
            let shortfall = made.negatives.shortfall.map(|s| ShortfallRecord {
                augmented_id: aug.sample_id.clone(),
                requested: s.requested,
                available: s.available,
            });
            Ok((records, shortfall))
        })
        .collect();
    let mut records = Vec::new();
    let mut shortfalls = Vec::new();
    for (r, s) in gather(results)? {
        records.extend(r);
        shortfalls.extend(s);
    }
    for s in &shortfalls {
        log::warn!(
            "{}: only {} of {} negatives available",
            s.augmented_id,
            s.available,
            s.requested
        );
    }
    jsonl::write(&out.join(files::SAMPLES), Some(&header("samples", cfg)), &records)?;
    jsonl::write(&out.join(files::SHORTFALLS), None, &shortfalls)?;
    let positives = records.iter().filter(|r| r.label == RoiLabel::Marginalia).count();
    Ok(SamplesSummary {
        positives,
        negatives: records.len() - positives,
        shortfalls: shortfalls.len(),
    })
}

fn page_sizes(pages: &[PageRecord]) -> BTreeMap<String, (u32, u32)> {
    pages
        .iter()
        .map(|p| (p.page_id.clone(), (p.width, p.height)))
        .collect()
}

fn load_detections(cfg: &PipelineConfig, pages: &[PageRecord]) -> Result<Option<DetectionsByPage>> {
    cfg.paths
        .detections
        .as_deref()
        .map(|path| read_detections(path, &page_sizes(pages)))
        .transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentSummary {
    pub detections: usize,
    pub lines: usize,
    pub words: usize,
}

/// Cuts every detection (or, without a detections file, every ground-truth
/// box of the configured pages) into lines and words and exports the word
/// crops for recognition.
pub fn segment(cfg: &PipelineConfig) -> Result<SegmentSummary> {
    let out = cfg.out_dir()?;
    let pages = read_manifest(out)?;
    let boxes: Vec<(&PageRecord, Vec<BBox>)> = match load_detections(cfg, &pages)? {
        Some(dets) => pages
            .iter()
            .filter_map(|p| dets.get(&p.page_id).map(|d| (p, d.iter().map(|d| d.bbox).collect())))
            .collect(),
        None => pages
            .iter()
            .filter(|p| p.in_set(cfg.segment.pages))
            .map(|p| (p, p.boxes.clone()))
            .collect(),
    };
    fresh_dir(out, dirs::WORDS)?;
    if cfg.segment.export_lines {
        fresh_dir(out, dirs::LINES)?;
    }

    let results: Vec<Result<(Vec<SegmentRecord>, Vec<WordCrop>)>> = boxes
        .par_iter()
        .map(|(page, boxes)| {
            let image = load_gray(&out.join(&page.image_path))?;
            let mut segs = Vec::new();
            let mut crops = Vec::new();
            for (d, b) in boxes.iter().enumerate() {
                let seg = segment_marginalia(&crop(&image, b)?);
                let mut lines = Vec::new();
                for (l, line) in seg.lines.iter().enumerate() {
                    if cfg.segment.export_lines {
                        let rows = BBox::new(0, line.rows.start, b.w(), line.rows.len())?;
                        let path = format!("{}/{}_{d:02}_{l:02}.png", dirs::LINES, page.page_id);
                        save_gray(&out.join(path), &crop(&crop(&image, b)?, &rows)?)?;
                    }
                    for (w, word) in line.words.iter().enumerate() {
                        let id = crop_id(&page.page_id, d, l, w);
                        let image_path = format!("{}/{id}.png", dirs::WORDS);
                        save_gray(&out.join(&image_path), &word.image)?;
                        crops.push(WordCrop {
                            crop_id: id,
                            image_path,
                            page_id: page.page_id.clone(),
                            detection_index: d,
                            line_index: l,
                            word_index: w,
                            bbox: word.bbox().translate(b.x(), b.y())?,
                        });
                    }
                    lines.push(LineRecord {
                        rows: [line.rows.start, line.rows.end],
                        words: line.words.iter().map(|w| [w.cols.start, w.cols.end]).collect(),
                        diagnostic: line.diagnostic,
                    });
                }
                segs.push(SegmentRecord {
                    page_id: page.page_id.clone(),
                    detection_index: d,
                    bbox: *b,
                    lines,
                    diagnostic: seg.diagnostic,
                });
            }
            Ok((segs, crops))
        })
        .collect();
    let mut segs = Vec::new();
    let mut crops = Vec::new();
    for (s, c) in gather(results)? {
        segs.extend(s);
        crops.extend(c);
    }
    for s in segs.iter().filter(|s| s.diagnostic.is_some()) {
        log::warn!("{} detection {}: {:?}", s.page_id, s.detection_index, s.diagnostic);
    }
    let h = header("segment", cfg);
    jsonl::write(&out.join(files::SEGMENTS), Some(&h), &segs)?;
    write_word_manifest(&out.join(files::WORDS), Some(&h), &crops)?;
    Ok(SegmentSummary {
        detections: segs.len(),
        lines: segs.iter().map(|s| s.lines.len()).sum(),
        words: crops.len(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

/// Human-readable table of a detection report.
pub fn eval_table(r: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<24} {:>4} {:>5} {:>4} {:>4} {:>4}", "page_id", "gt", "pred", "tp", "fp", "fn");
    for p in &r.per_page {
        let m = &p.matching;
        let _ = writeln!(
            s,
            "{:<24} {:>4} {:>5} {:>4} {:>4} {:>4}",
            p.page_id,
            p.gt_count,
            p.pred_count,
            m.true_positives(),
            m.false_positives(),
            m.false_negatives()
        );
    }
    let _ = writeln!(
        s,
        "{:<24} {:>4} {:>5} {:>4} {:>4} {:>4}",
        "total", r.gt_total, r.pred_total, r.true_positives, r.false_positives, r.false_negatives
    );
    let _ = writeln!(s, "iou threshold         {}", r.iou_threshold);
    let _ = writeln!(s, "mean IoU (penalized)  {}", fmt_opt(r.mean_iou_penalized));
    let _ = writeln!(s, "mean IoU (matched)    {}", fmt_opt(r.mean_iou_matched));
    let _ = writeln!(s, "precision             {}", fmt_opt(r.precision));
    let _ = writeln!(s, "recall                {}", fmt_opt(r.recall));
    for d in &r.diagnostics {
        let _ = writeln!(s, "note: {d}");
    }
    s
}

/// Scores external detections against ground truth.
pub fn eval(cfg: &PipelineConfig) -> Result<EvalReport> {
    let out = cfg.out_dir()?;
    let pages = read_manifest(out)?;
    let dets = load_detections(cfg, &pages)?
        .ok_or_else(|| Error::Config("eval needs a detections file (paths.detections or --detections)".into()))?;
    let chosen: Vec<(&PageRecord, Vec<BBox>)> = pages
        .iter()
        .filter(|p| p.in_set(cfg.eval.pages))
        .map(|p| {
            let preds = dets.get(&p.page_id).map_or_else(Vec::new, |d| d.iter().map(|d| d.bbox).collect());
            (p, preds)
        })
        .collect();
    let report = evaluate(
        chosen
            .iter()
            .map(|(p, preds)| (p.page_id.as_str(), preds.as_slice(), p.boxes.as_slice())),
        cfg.eval.iou_threshold,
    );
    write_json(&out.join(files::EVAL_JSON), &report)?;
    write_text(&out.join(files::EVAL_TXT), &eval_table(&report))?;
    Ok(report)
}

/// Ground truth in green and detections in red on each evaluated page.
pub fn overlay(cfg: &PipelineConfig) -> Result<usize> {
    let out = cfg.out_dir()?;
    let pages = read_manifest(out)?;
    let dets = load_detections(cfg, &pages)?.unwrap_or_default();
    fresh_dir(out, dirs::OVERLAYS)?;
    let chosen: Vec<&PageRecord> = pages.iter().filter(|p| p.in_set(cfg.eval.pages)).collect();
    let results: Vec<Result<()>> = chosen
        .par_iter()
        .map(|p| {
            let image = load_gray(&out.join(&p.image_path))?;
            let preds: Vec<BBox> = dets.get(&p.page_id).map_or_else(Vec::new, |d| d.iter().map(|d| d.bbox).collect());
            let path = out.join(dirs::OVERLAYS).join(format!("{}.png", p.page_id));
            save_rgb(&path, &render_overlay(&image, &p.boxes, &preds))
        })
        .collect();
    gather(results)?;
    Ok(chosen.len())
}

/// Deterministic stand-in recognizer over the exported word crops.
pub fn recognize_mock(cfg: &PipelineConfig) -> Result<usize> {
    let out = cfg.out_dir()?;
    let crops = read_word_manifest(&require(out, files::WORDS, "segment")?)?;
    let lexicon = match &cfg.paths.lexicon {
        Some(path) => read_lexicon(path)?,
        None => cfg.recognize.lexicon.clone(),
    };
    let results = crops
        .iter()
        .map(|c| mock_recognize(&c.crop_id, &lexicon, cfg.seed))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    write_recognitions(&out.join(files::RECOGNITIONS), &results)?;
    Ok(results.len())
}

/// Word accuracy and CER of recognizer output against reference words.
pub fn score_words(cfg: &PipelineConfig) -> Result<WordReport> {
    let out = cfg.out_dir()?;
    let crops = read_word_manifest(&require(out, files::WORDS, "segment")?)?;
    let results_path = match &cfg.paths.results {
        Some(p) => p.clone(),
        None => require(out, files::RECOGNITIONS, "recognize-mock")?,
    };
    let truth_path = cfg
        .paths
        .truth
        .as_deref()
        .ok_or_else(|| Error::Config("score-words needs reference words (paths.truth or --truth)".into()))?;
    let truth = read_truth(truth_path)?;
    let imported = import_recognitions(&results_path, &crops)?;
    for w in &imported.warnings {
        log::warn!("{w}");
    }
    if !imported.unrecognized.is_empty() {
        log::warn!("{} word crops have no recognition result", imported.unrecognized.len());
    }
    let report = word_accuracy(&imported.results, &truth, cfg.recognize.ignore_case);
    if !report.missing_prediction.is_empty() || !report.missing_reference.is_empty() {
        log::warn!(
            "scored the {} shared crops; {} references without a result, {} results without a reference",
            report.evaluated,
            report.missing_prediction.len(),
            report.missing_reference.len()
        );
    }
    write_json(&out.join(files::WORD_SCORES_JSON), &report)?;
    let mut txt = String::new();
    let _ = writeln!(txt, "{:<28} {:<16} {:<16} {:>5}", "crop_id", "reference", "predicted", "edits");
    for w in &report.words {
        let _ = writeln!(txt, "{:<28} {:<16} {:<16} {:>5}", w.crop_id, w.reference, w.predicted, w.edits);
    }
    let _ = writeln!(txt, "evaluated  {}", report.evaluated);
    let _ = writeln!(txt, "accuracy   {}", fmt_opt(report.accuracy));
    let _ = writeln!(txt, "cer        {}", fmt_opt(report.cer));
    write_text(&out.join(files::WORD_SCORES_TXT), &txt)?;
    Ok(report)
}

/// Every stage in order. Evaluation and overlays need detections, word
/// scoring needs references; those stages are skipped when the inputs are
/// not configured.
pub fn run_all(cfg: &PipelineConfig) -> Result<()> {
    // stages run outside the log macros, which skip their arguments when
    // the level is disabled
    let i = ingest(cfg)?;
    log::info!("ingest: {} pages, {} boxes", i.pages, i.boxes);
    let s = split(cfg)?;
    log::info!("split: {} train, {} test", s.train, s.test);
    let n = augment(cfg)?;
    log::info!("augment: {n} samples");
    let n = proposals(cfg)?;
    log::info!("proposals: {n}");
    let m = samples(cfg)?;
    log::info!("samples: {} positive, {} negative", m.positives, m.negatives);
    let g = segment(cfg)?;
    log::info!("segment: {} lines, {} words", g.lines, g.words);
    if cfg.paths.detections.is_some() {
        let r = eval(cfg)?;
        log::info!("eval: mean IoU {}", fmt_opt(r.mean_iou_penalized));
    }
    let n = overlay(cfg)?;
    log::info!("overlay: {n} pages");
    let n = recognize_mock(cfg)?;
    log::info!("recognize-mock: {n} words");
    if cfg.paths.truth.is_some() {
        let w = score_words(cfg)?;
        log::info!("score-words: accuracy {}", fmt_opt(w.accuracy));
    }
    Ok(())
}
