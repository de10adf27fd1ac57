//! Online multi-object tracking for monocular road scenes.
//!
//! Detections from consecutive frames are compared with geometric costs
//! (a detection backprojected onto the road, carried forward by ego-motion
//! and compared in the image and on the ground plane), an appearance cost
//! and a shape/pose cost, then associated with the Hungarian algorithm.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases. The simulator works in `f64`.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod costs;
pub mod detection;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod kitti_io;
pub mod scalar;
pub mod sim;

pub use association::{
    hungarian, preprocess, run_sequence, Assignment, SequenceTracker, Track, Tracker, TrackerConfig,
};
pub use costs::{build_cost_matrix, CostConfig, CostMatrix, CostWeights};
pub use detection::{BBox, Detection, ObjectFeatures};
pub use error::{CostError, EvalError, GeometryError, IoError, ShapeError, TrackError};
pub use evaluation::{score, LabeledBox, MOTReport};
pub use geometry::{CameraRig, ConvexPolygon2D, GatedRegion3D, Mat3, RigidMotion, Vec2, Vec3};
pub use kitti_io::{SequenceBundle, SequencePaths};
pub use scalar::Real;

pub type BBox64 = BBox<f64>;
pub type BBox32 = BBox<f32>;
pub type Detection64 = Detection<f64>;
pub type Detection32 = Detection<f32>;
pub type CameraRig64 = CameraRig<f64>;
pub type CameraRig32 = CameraRig<f32>;
pub type RigidMotion64 = RigidMotion<f64>;
pub type RigidMotion32 = RigidMotion<f32>;
pub type CostMatrix64 = CostMatrix<f64>;
pub type CostMatrix32 = CostMatrix<f32>;
pub type Track64 = Track<f64>;
pub type Track32 = Track<f32>;
pub type TrackerConfig64 = TrackerConfig<f64>;
pub type TrackerConfig32 = TrackerConfig<f32>;
pub type SequenceBundle64 = SequenceBundle<f64>;
pub type SequenceBundle32 = SequenceBundle<f32>;
