use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("pixel lies at or above the horizon")]
    DegenerateHorizon,
    #[error("point lies behind the camera")]
    BehindCamera,
    #[error("rotation is not orthonormal")]
    NonOrthonormalRotation,
    #[error("invalid camera rig: {0}")]
    InvalidRig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("descriptor lengths differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("required features are missing")]
    MissingFeatures,
    #[error("invalid cost weights: {0}")]
    InvalidWeights(&'static str),
    #[error("invalid object features: {0}")]
    InvalidFeatures(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrackError {
    #[error("expected {expected} motions for {frames} frames, got {got}")]
    InputMisaligned { frames: usize, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("ground truth contains no boxes")]
    EmptyGroundTruth,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("expected {expected} shape coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Errors from the file readers and writers. Line numbers are 1-based.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: box width and height must be positive")]
    NegativeDimension { line: usize },
    #[error("line {line}: expected {expected} feature values, got {got}")]
    DimensionMismatch { line: usize, expected: usize, got: usize },
    #[error("line {line}: rotation is not orthonormal (residual {residual:e})")]
    NonOrthonormalRotation { line: usize, residual: f64 },
    #[error("detections reference frame {frame} but the sequence has {frames} frames")]
    FrameOutOfRange { frame: usize, frames: usize },
}

impl IoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse { line, message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}
