//! Detections exchanged with external detectors.
//!
//! Boxes are in the coordinates of the rescaled pages listed in the page
//! manifest.

use std::collections::BTreeMap;
use std::path::Path;

use marginalia_core::eval::Detection;
use marginalia_core::BBox;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    page_id: String,
    #[serde(rename = "box")]
    bbox: [u32; 4],
    score: f64,
    #[serde(default)]
    label: Option<String>,
}

/// Detections grouped by page, in file order within each page.
pub type DetectionsByPage = BTreeMap<String, Vec<Detection>>;

/// Reads and validates a detections file against page sizes. Every bad
/// line is reported, not just the first.
pub fn read_detections(path: &Path, pages: &BTreeMap<String, (u32, u32)>) -> Result<DetectionsByPage> {
    let (_, raw) = jsonl::read_raw(path)?;
    let mut out = DetectionsByPage::new();
    let mut errors = Vec::new();
    for (n, v) in raw {
        let check = || -> std::result::Result<Detection, String> {
            let d: RawDetection = serde_json::from_value(v).map_err(|e| e.to_string())?;
            if let Some(label) = &d.label {
                if label != "marginalia" {
                    return Err(format!("unsupported label `{label}`"));
                }
            }
            let &(w, h) = pages
                .get(&d.page_id)
                .ok_or_else(|| format!("unknown page_id `{}`", d.page_id))?;
            if !(0.0..=1.0).contains(&d.score) {
                return Err(format!("score {} is outside [0, 1]", d.score));
            }
            let [x, y, bw, bh] = d.bbox;
            let bbox = BBox::new(x, y, bw, bh).map_err(|e| e.to_string())?;
            bbox.check_within(w, h).map_err(|e| e.to_string())?;
            Ok(Detection {
                page_id: d.page_id,
                bbox,
                score: d.score,
            })
        };
        match check() {
            Ok(d) => out.entry(d.page_id.clone()).or_default().push(d),
            Err(msg) => errors.push(Error::line(path, n, msg)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::many(errors))
    }
}

pub fn write_detections(path: &Path, detections: &DetectionsByPage) -> Result<()> {
    let all: Vec<&Detection> = detections.values().flatten().collect();
    jsonl::write(path, None, &all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pages() -> BTreeMap<String, (u32, u32)> {
        [("a".to_string(), (100, 100)), ("b".to_string(), (50, 80))].into()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let mut dets = DetectionsByPage::new();
        dets.insert(
            "a".into(),
            vec![
                Detection {
                    page_id: "a".into(),
                    bbox: BBox::new(1, 2, 30, 40).unwrap(),
                    score: 0.75,
                },
                Detection {
                    page_id: "a".into(),
                    bbox: BBox::new(50, 50, 50, 50).unwrap(),
                    score: 1.0,
                },
            ],
        );
        write_detections(&path, &dets).unwrap();
        assert_eq!(read_detections(&path, &pages()).unwrap(), dets);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(r#"{"page_id":"a","box":[1,2,30,40],"score":0.75}"#));
    }

    #[test]
    fn bad_lines_are_all_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        std::fs::write(
            &path,
            concat!(
                r#"{"page_id":"a","box":[0,0,10,10],"score":1.3}"#, "\n",
                r#"{"page_id":"zz","box":[0,0,10,10],"score":0.5}"#, "\n",
                r#"{"page_id":"b","box":[40,0,20,10],"score":0.5}"#, "\n",
                r#"{"page_id":"b","box":[0,0,10,10],"score":0.5}"#, "\n",
            ),
        )
        .unwrap();
        let err = read_detections(&path, &pages()).unwrap_err().to_string();
        assert!(err.contains(":1: score 1.3"), "{err}");
        assert!(err.contains(":2: unknown page_id `zz`"), "{err}");
        assert!(err.contains(":3:"), "{err}");
        assert!(!err.contains(":4:"), "{err}");
    }
}
