use alloc::string::String;

/// Errors raised by the core algorithms.
///
/// Most operations in this crate are total; these cover invalid
/// constructor arguments and geometry that falls outside an image.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("invalid dimensions {width}x{height}: both sides must be at least 1")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("pixel buffer has {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },

    #[error("box ({x},{y},{w},{h}) is degenerate: width and height must be positive")]
    DegenerateBox { x: u32, y: u32, w: u32, h: u32 },

    #[error("box ({x},{y},{w},{h}) lies outside the {width}x{height} image")]
    OutOfBounds {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
        width: u32,
        height: u32,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {left} predicted vs {right} reference labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0}")]
    Empty(&'static str),
}

pub type Result<T, E = CoreError> = core::result::Result<T, E>;
