//! Algorithmic core of the marginalia pipeline.
//!
//! Everything here is a pure function of its inputs: box geometry and IoU,
//! grayscale resampling, seeded augmentation, an MSER component-tree sweep,
//! ROI tiling, projection-profile line and word segmentation, detection
//! matching and text-recognition scoring. The crate is `no_std` and only
//! needs `alloc`; file formats, image codecs and the command line live in
//! the `marginalia-pipeline` crate.
//!
//! Pixel coordinates are `(x, y)` with `x` the column and `y` the row,
//! origin at the top-left corner.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// parameter checks written as `!(x > 0.0)` also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod augment;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod mser;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod raster;
pub mod rng;
pub mod samples;
pub mod segment;
pub mod split;
pub mod synth;
pub mod text;

pub use error::{CoreError, Result};
pub use geometry::{iou, BBox};
pub use raster::{BinaryRaster, Raster, RgbRaster};
