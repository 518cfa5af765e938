//! File protocol between word segmentation and an external recognizer.
//!
//! The pipeline writes one PNG per word plus `words.jsonl`; a recognizer
//! reads that manifest and writes line-delimited
//! `{crop_id, text, confidence}` results, which are imported back here.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use marginalia_core::text::RecognitionResult;
use marginalia_core::BBox;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl::{self, Header};

/// Crop id `{page}_{det}_{line}_{word}`; indices are zero-padded so ids
/// sort in reading order.
pub fn crop_id(page_id: &str, detection: usize, line: usize, word: usize) -> String {
    format!("{page_id}_{detection:02}_{line:02}_{word:02}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCrop {
    pub crop_id: String,
    pub image_path: String,
    pub page_id: String,
    pub detection_index: usize,
    pub line_index: usize,
    pub word_index: usize,
    /// Word box in page coordinates.
    #[serde(rename = "box")]
    pub bbox: BBox,
}

pub fn write_word_manifest(path: &Path, header: Option<&Header>, crops: &[WordCrop]) -> Result<()> {
    jsonl::write(path, header, crops)
}

pub fn read_word_manifest(path: &Path) -> Result<Vec<WordCrop>> {
    let (_, raw) = jsonl::read_raw(path)?;
    let mut seen = BTreeSet::new();
    let mut crops = Vec::with_capacity(raw.len());
    for (n, v) in raw {
        let c: WordCrop = serde_json::from_value(v).map_err(|e| Error::line(path, n, e.to_string()))?;
        if !seen.insert(c.crop_id.clone()) {
            return Err(Error::line(path, n, format!("duplicate crop_id `{}`", c.crop_id)));
        }
        if c.crop_id != crop_id(&c.page_id, c.detection_index, c.line_index, c.word_index) {
            return Err(Error::line(
                path,
                n,
                format!("crop_id `{}` does not match its indices", c.crop_id),
            ));
        }
        crops.push(c);
    }
    Ok(crops)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imported {
    /// One result per recognized crop, ordered by crop id.
    pub results: Vec<RecognitionResult>,
    /// Manifest crops without a result.
    pub unrecognized: Vec<String>,
    pub warnings: Vec<String>,
}

/// Reads recognizer output and joins it to the crop manifest. Unknown crop
/// ids and confidences outside `[0, 1]` are per-line errors; a repeated
/// crop id keeps the last line and adds a warning.
pub fn import_recognitions(path: &Path, manifest: &[WordCrop]) -> Result<Imported> {
    let (_, raw) = jsonl::read_raw(path)?;
    let known: BTreeSet<&str> = manifest.iter().map(|c| c.crop_id.as_str()).collect();
    let mut by_id: BTreeMap<String, (usize, RecognitionResult)> = BTreeMap::new();
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    for (n, v) in raw {
        let r: RecognitionResult = match serde_json::from_value(v) {
            Ok(r) => r,
            Err(e) => {
                errors.push(Error::line(path, n, e.to_string()));
                continue;
            }
        };
        if !known.contains(r.crop_id.as_str()) {
            errors.push(Error::line(path, n, format!("unknown crop_id `{}`", r.crop_id)));
            continue;
        }
        if !(0.0..=1.0).contains(&r.confidence) {
            errors.push(Error::line(
                path,
                n,
                format!("confidence {} is outside [0, 1]", r.confidence),
            ));
            continue;
        }
        if let Some((prev, _)) = by_id.get(&r.crop_id) {
            warnings.push(format!(
                "{}:{n}: crop_id `{}` repeats line {prev}; keeping the later result",
                path.display(),
                r.crop_id
            ));
        }
        by_id.insert(r.crop_id.clone(), (n, r));
    }
    if !errors.is_empty() {
        return Err(Error::many(errors));
    }
    let unrecognized = manifest
        .iter()
        .filter(|c| !by_id.contains_key(&c.crop_id))
        .map(|c| c.crop_id.clone())
        .collect();
    Ok(Imported {
        results: by_id.into_values().map(|(_, r)| r).collect(),
        unrecognized,
        warnings,
    })
}

pub fn write_recognitions(path: &Path, results: &[RecognitionResult]) -> Result<()> {
    jsonl::write(path, None, results)
}

#[derive(Deserialize)]
struct TruthLine {
    crop_id: String,
    text: String,
}

/// Reference words, line-delimited `{crop_id, text}`.
pub fn read_truth(path: &Path) -> Result<BTreeMap<String, String>> {
    let (_, raw) = jsonl::read_raw(path)?;
    let mut out = BTreeMap::new();
    for (n, v) in raw {
        let t: TruthLine = serde_json::from_value(v).map_err(|e| Error::line(path, n, e.to_string()))?;
        if out.insert(t.crop_id.clone(), t.text).is_some() {
            return Err(Error::line(path, n, format!("duplicate crop_id `{}`", t.crop_id)));
        }
    }
    Ok(out)
}

pub fn read_lexicon(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let words: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect();
    if words.is_empty() {
        return Err(Error::parse(path, "lexicon has no words"));
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crop(page: &str, d: usize, l: usize, w: usize) -> WordCrop {
        WordCrop {
            crop_id: crop_id(page, d, l, w),
            image_path: format!("words/{}.png", crop_id(page, d, l, w)),
            page_id: page.into(),
            detection_index: d,
            line_index: l,
            word_index: w,
            bbox: BBox::new(0, 0, 5, 5).unwrap(),
        }
    }

    fn manifest() -> Vec<WordCrop> {
        let mut m = Vec::new();
        for l in 0..3 {
            for w in 0..2 {
                m.push(crop("p", 0, l, w));
            }
        }
        m
    }

    #[test]
    fn ids_sort_in_reading_order() {
        let ids: Vec<String> = manifest().into_iter().map(|c| c.crop_id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(crop_id("p", 0, 10, 2), "p_00_10_02");
        assert!(crop_id("p", 0, 2, 0) < crop_id("p", 0, 10, 0));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.jsonl");
        write_word_manifest(&path, None, &manifest()).unwrap();
        assert_eq!(read_word_manifest(&path).unwrap(), manifest());
    }

    fn write_lines(path: &Path, lines: &[&str]) {
        std::fs::write(path, lines.join("\n")).unwrap();
    }

    #[test]
    fn full_join_and_last_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let mut lines: Vec<String> = manifest()
            .iter()
            .map(|c| format!(r#"{{"crop_id":"{}","text":"a","confidence":0.5}}"#, c.crop_id))
            .collect();
        lines.push(r#"{"crop_id":"p_00_00_00","text":"b","confidence":0.9}"#.into());
        write_lines(&path, &lines.iter().map(String::as_str).collect::<Vec<_>>());
        let imp = import_recognitions(&path, &manifest()).unwrap();
        assert_eq!(imp.results.len(), 6);
        assert!(imp.unrecognized.is_empty());
        assert_eq!(imp.results[0].text, "b");
        assert_eq!(imp.warnings.len(), 1);
    }

    #[test]
    fn unknown_crop_and_bad_confidence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_lines(
            &path,
            &[
                r#"{"crop_id":"p_00_00_00","text":"a","confidence":0.5}"#,
                r#"{"crop_id":"ghost","text":"a","confidence":0.5}"#,
                r#"{"crop_id":"p_00_00_01","text":"a","confidence":1.5}"#,
            ],
        );
        let err = import_recognitions(&path, &manifest()).unwrap_err().to_string();
        assert!(err.contains(":2: unknown crop_id `ghost`"), "{err}");
        assert!(err.contains(":3: confidence 1.5"), "{err}");

        write_lines(&path, &[r#"{"crop_id":"p_00_00_00","text":"a","confidence":0.5}"#]);
        let imp = import_recognitions(&path, &manifest()).unwrap();
        assert_eq!(imp.unrecognized.len(), 5);
    }
}
