//! Detection preprocessing, two-frame assignment and track bookkeeping.

pub mod hungarian;
pub mod tracker;

pub use hungarian::{hungarian, Assignment};
pub use tracker::{run_sequence, FrameStats, SequenceTracker, Track, TrackState, Tracker, TrackerConfig};

use std::cmp::Ordering;

use crate::detection::Detection;
use crate::scalar::Real;

/// Score threshold followed by greedy non-maximum suppression.
///
/// Output is ordered by descending score, then ascending left edge. A box is
/// kept iff its IoU with every kept box is below `nms_iou`.
pub fn preprocess<T: Real>(dets: &[Detection<T>], min_score: T, nms_iou: T) -> Vec<Detection<T>> {
    let mut candidates: Vec<&Detection<T>> = dets.iter().filter(|d| d.score >= min_score).collect();
    candidates.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.bbox.x.partial_cmp(&b.bbox.x).unwrap_or(Ordering::Equal))
    });
    let mut kept: Vec<Detection<T>> = Vec::with_capacity(candidates.len());
    for d in candidates {
        if kept.iter().all(|k| k.bbox.iou(&d.bbox) < nms_iou) {
            kept.push(d.clone());
        }
    }
    kept
}
