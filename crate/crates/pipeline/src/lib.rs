//! File formats, stage orchestration and command line for the marginalia
//! pipeline. The algorithms live in `marginalia-core`.

pub mod config;
pub mod corpus;
pub mod detections;
pub mod error;
pub mod imageio;
pub mod jsonl;
pub mod labelme;
pub mod manifest;
pub mod stages;
pub mod words;

pub use config::PipelineConfig;
pub use error::{Error, Result};
