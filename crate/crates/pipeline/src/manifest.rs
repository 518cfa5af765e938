//! Record types of the stage manifests.

use std::collections::BTreeSet;
use std::path::Path;

use marginalia_core::augment::{Applied, Variant};
use marginalia_core::samples::RoiLabel;
use marginalia_core::segment::Diagnostic;
use marginalia_core::BBox;
use serde::{Deserialize, Serialize};

use crate::config::PageSet;
use crate::error::{Error, Result};
use crate::jsonl::{self, Header};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// One page of the corpus after ingest. `image_path` is relative to the
/// output directory, `source` to the corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub page_id: String,
    pub image_path: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    pub source: String,
}

impl PageRecord {
    pub fn in_set(&self, set: PageSet) -> bool {
        match set {
            PageSet::All => true,
            PageSet::Train => self.split == Some(Split::Train),
            PageSet::Test => self.split == Some(Split::Test),
        }
    }
}

pub fn write_pages(path: &Path, header: Option<&Header>, pages: &[PageRecord]) -> Result<()> {
    jsonl::write(path, header, pages)
}

/// Reads a page manifest, rejecting duplicate page ids and boxes outside
/// their page.
pub fn read_pages(path: &Path) -> Result<(Option<Header>, Vec<PageRecord>)> {
    let (header, raw) = jsonl::read_raw(path)?;
    let mut seen = BTreeSet::new();
    let mut pages = Vec::with_capacity(raw.len());
    for (n, v) in raw {
        let page: PageRecord =
            serde_json::from_value(v).map_err(|e| Error::line(path, n, e.to_string()))?;
        if !seen.insert(page.page_id.clone()) {
            return Err(Error::line(path, n, format!("duplicate page_id `{}`", page.page_id)));
        }
        for b in &page.boxes {
            b.check_within(page.width, page.height)
                .map_err(|e| Error::line(path, n, e.to_string()))?;
        }
        pages.push(page);
    }
    Ok((header, pages))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedRecord {
    pub sample_id: String,
    pub page_id: String,
    pub variant: Variant,
    pub seed: u64,
    pub applied: Applied,
    pub image_path: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<BBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalEntry {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub sample_id: String,
    pub proposals: Vec<ProposalEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub page_id: String,
    /// Augmented sample the ROI was cut from.
    pub augmented_id: String,
    pub label: RoiLabel,
    pub source_box: BBox,
    pub tile_index: u32,
    pub image_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortfallRecord {
    pub augmented_id: String,
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    /// Row range `[start, end)` within the detection crop.
    pub rows: [u32; 2],
    /// Column ranges `[start, end)` of the words.
    pub words: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub page_id: String,
    pub detection_index: usize,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub lines: Vec<LineRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}
