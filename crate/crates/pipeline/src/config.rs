//! Pipeline configuration, read from a TOML file and overridden by flags.

use std::path::{Path, PathBuf};

use marginalia_core::augment::AugmentParams;
use marginalia_core::eval::DEFAULT_IOU_THRESHOLD;
use marginalia_core::mser::ProposalParams;
use marginalia_core::samples::SampleParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Locations of inputs and outputs. Never echoed into manifests, so runs
/// from different directories produce identical files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory of LabelMe JSON files and page images.
    pub corpus: Option<PathBuf>,
    /// Directory receiving every stage's output.
    pub out: Option<PathBuf>,
    /// External detections (line-delimited JSON).
    pub detections: Option<PathBuf>,
    /// Reference words for recognition scoring.
    pub truth: Option<PathBuf>,
    /// Recognizer output to score; defaults to the mock recognizer's file.
    pub results: Option<PathBuf>,
    /// One word per line; replaces `recognize.lexicon`.
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rescale {
    pub width: u32,
    pub height: u32,
}

impl Default for Rescale {
    fn default() -> Self {
        Self {
            width: 350,
            height: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { ratio: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageSet {
    Train,
    Test,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// Pages segmented when boxes come from ground truth rather than a
    /// detections file.
    pub pages: PageSet,
    /// Also write one PNG per detected line.
    pub export_lines: bool,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            pages: PageSet::Test,
            export_lines: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub pages: PageSet,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            pages: PageSet::Test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecognizeConfig {
    pub lexicon: Vec<String>,
    pub ignore_case: bool,
}

impl Default for RecognizeConfig {
    fn default() -> Self {
        Self {
            lexicon: ["nota", "bene", "vide", "supra", "infra", "item", "lege", "cf"]
                .map(String::from)
                .to_vec(),
            ignore_case: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    /// Root of every random choice in the pipeline.
    pub seed: u64,
    pub rescale: Rescale,
    pub split: SplitConfig,
    pub augment: AugmentParams,
    pub proposals: ProposalParams,
    pub samples: SampleParams,
    pub segment: SegmentConfig,
    pub eval: EvalConfig,
    pub recognize: RecognizeConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            seed: 2024,
            rescale: Rescale::default(),
            split: SplitConfig::default(),
            augment: AugmentParams::default(),
            proposals: ProposalParams::default(),
            samples: SampleParams::default(),
            segment: SegmentConfig::default(),
            eval: EvalConfig::default(),
            recognize: RecognizeConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_toml(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.rescale.width == 0 || self.rescale.height == 0 {
            return bad(format!(
                "rescale target {}x{} must be positive",
                self.rescale.width, self.rescale.height
            ));
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return bad(format!("split.ratio {} is not in (0, 1)", self.split.ratio));
        }
        self.augment.validate()?;
        self.proposals.mser.validate()?;
        if !(0.0..1.0).contains(&self.proposals.tiny_area_fraction) {
            return bad("proposals.tiny_area_fraction must be in [0, 1)".into());
        }
        if !(self.proposals.dedup_iou > 0.0 && self.proposals.dedup_iou <= 1.0) {
            return bad("proposals.dedup_iou must be in (0, 1]".into());
        }
        if self.samples.roi_size == 0 {
            return bad("samples.roi_size must be positive".into());
        }
        if !(self.eval.iou_threshold > 0.0 && self.eval.iou_threshold <= 1.0) {
            return bad(format!(
                "eval.iou_threshold {} is not in (0, 1]",
                self.eval.iou_threshold
            ));
        }
        if self.recognize.lexicon.is_empty() {
            return bad("recognize.lexicon is empty".into());
        }
        Ok(())
    }

    /// The effective settings without any paths, as echoed into manifest
    /// headers.
    pub fn provenance(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("paths");
        }
        v
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.paths
            .out
            .as_deref()
            .ok_or_else(|| Error::Config("no output directory (set paths.out or --out)".into()))
    }

    pub fn corpus_dir(&self) -> Result<&Path> {
        self.paths
            .corpus
            .as_deref()
            .ok_or_else(|| Error::Config("no corpus directory (set paths.corpus or --corpus)".into()))
    }
}
