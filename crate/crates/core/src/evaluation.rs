//! CLEAR MOT scoring of hypothesis tracks against ground truth.
//!
//! Conventions:
//! - a hypothesis matches a ground-truth box when their IoU is at least
//!   `iou_min`; pairs matched in the previous frame are kept first, the rest
//!   are matched by minimum total `1 − IoU`;
//! - MOTP is the mean IoU of matched pairs;
//! - an identity switch is counted when a ground-truth track is matched to a
//!   different hypothesis id than at its last matched frame;
//! - a fragmentation is counted each time a ground-truth track is matched
//!   again after one or more unmatched frames of its lifespan;
//! - mostly tracked means matched on at least 80% of the lifespan, mostly
//!   lost at most 20%.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::association::hungarian::hungarian;
use crate::association::tracker::Track;
use crate::costs::CostMatrix;
use crate::detection::BBox;
use crate::error::EvalError;
use crate::scalar::Real;

pub const DEFAULT_IOU_MIN: f64 = 0.5;
pub const MOSTLY_TRACKED: f64 = 0.8;
pub const MOSTLY_LOST: f64 = 0.2;

/// One box of a track in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledBox<T> {
    pub frame: usize,
    pub id: u64,
    pub bbox: BBox<T>,
}

/// Flattens tracks into per-frame labelled boxes.
pub fn boxes_from_tracks<T: Real>(tracks: &[Track<T>]) -> Vec<LabeledBox<T>> {
    tracks
        .iter()
        .flat_map(|t| t.entries.iter().map(move |d| LabeledBox { frame: d.frame, id: t.id, bbox: d.bbox }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMatch<T> {
    /// Index into the frame's ground-truth slice.
    pub gt: usize,
    /// Index into the frame's hypothesis slice.
    pub hyp: usize,
    pub iou: T,
}

/// Matches the boxes of a single frame. `carry` maps ground-truth ids to the
/// hypothesis ids they were matched with in the previous frame.
pub fn match_frame<T: Real>(
    gt: &[LabeledBox<T>],
    hyp: &[LabeledBox<T>],
    iou_min: T,
    carry: &BTreeMap<u64, u64>,
) -> Vec<FrameMatch<T>> {
    let mut gt_used = vec![false; gt.len()];
    let mut hyp_used = vec![false; hyp.len()];
    let mut out = Vec::new();

    for (g, gbox) in gt.iter().enumerate() {
        let Some(&want) = carry.get(&gbox.id) else { continue };
        let Some(h) = (0..hyp.len()).find(|&h| !hyp_used[h] && hyp[h].id == want) else { continue };
        let iou = gbox.bbox.iou(&hyp[h].bbox);
        if iou >= iou_min {
            gt_used[g] = true;
            hyp_used[h] = true;
            out.push(FrameMatch { gt: g, hyp: h, iou });
        }
    }

    let free_gt: Vec<usize> = (0..gt.len()).filter(|&g| !gt_used[g]).collect();
    let free_hyp: Vec<usize> = (0..hyp.len()).filter(|&h| !hyp_used[h]).collect();
    let rows: Vec<Vec<Option<T>>> = free_gt
        .iter()
        .map(|&g| {
            free_hyp
                .iter()
                .map(|&h| {
                    let iou = gt[g].bbox.iou(&hyp[h].bbox);
                    (iou >= iou_min).then(|| T::one() - iou)
                })
                .collect()
        })
        .collect();
    if !free_gt.is_empty() && !free_hyp.is_empty() {
        let assignment = hungarian(&CostMatrix::from_options(&rows));
        for (r, c) in assignment.pairs {
            let (g, h) = (free_gt[r], free_hyp[c]);
            out.push(FrameMatch { gt: g, hyp: h, iou: gt[g].bbox.iou(&hyp[h].bbox) });
        }
    }
    out.sort_by_key(|m| m.gt);
    out
}

/// CLEAR MOT summary. Percentages (`mt`, `pt`, `ml`) are in `[0, 100]`;
/// the other ratios are fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MOTReport {
    pub mota: f64,
    pub motp: f64,
    pub recall: f64,
    pub precision: f64,
    pub mt: f64,
    pub pt: f64,
    pub ml: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    pub gt_count: usize,
}

impl MOTReport {
    /// `key=value` lines in a fixed order.
    pub fn to_kv_string(&self) -> String {
        format!(
            "mota={:.6}\nmotp={:.6}\nrecall={:.6}\nprecision={:.6}\nmt={:.6}\npt={:.6}\nml={:.6}\ntp={}\nfp={}\nfn={}\nids={}\nfrag={}\ngt_count={}\n",
            self.mota,
            self.motp,
            self.recall,
            self.precision,
            self.mt,
            self.pt,
            self.ml,
            self.tp,
            self.fp,
            self.fn_,
            self.ids,
            self.frag,
            self.gt_count
        )
    }

    /// JSON object with the same keys and order as [`Self::to_kv_string`].
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Scores hypotheses against ground truth over all frames present in either.
pub fn score<T: Real>(gt: &[LabeledBox<T>], hyp: &[LabeledBox<T>], iou_min: T) -> Result<MOTReport, EvalError> {
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let mut gt_by_frame: BTreeMap<usize, Vec<LabeledBox<T>>> = BTreeMap::new();
    let mut hyp_by_frame: BTreeMap<usize, Vec<LabeledBox<T>>> = BTreeMap::new();
    for b in gt {
        gt_by_frame.entry(b.frame).or_default().push(*b);
    }
    for b in hyp {
        hyp_by_frame.entry(b.frame).or_default().push(*b);
    }
    let last_frame = gt_by_frame.keys().chain(hyp_by_frame.keys()).copied().max().unwrap_or(0);

    let (mut tp, mut fp, mut fn_, mut ids) = (0usize, 0usize, 0usize, 0usize);
    let mut iou_sum = 0.0f64;
    let mut carry: BTreeMap<u64, u64> = BTreeMap::new();
    let mut last_hyp: BTreeMap<u64, u64> = BTreeMap::new();
    // per ground-truth id: matched flag for each frame of its lifespan
    let mut coverage: BTreeMap<u64, Vec<bool>> = BTreeMap::new();
    let empty = Vec::new();

    for frame in 0..=last_frame {
        let g = gt_by_frame.get(&frame).unwrap_or(&empty);
        let h = hyp_by_frame.get(&frame).unwrap_or(&empty);
        let matches = match_frame(g, h, iou_min, &carry);

        let mut matched_gt = vec![false; g.len()];
        let mut next_carry = BTreeMap::new();
        for m in &matches {
            matched_gt[m.gt] = true;
            let (gid, hid) = (g[m.gt].id, h[m.hyp].id);
            if let Some(&prev) = last_hyp.get(&gid) {
                if prev != hid {
                    ids += 1;
                }
            }
            last_hyp.insert(gid, hid);
            next_carry.insert(gid, hid);
            iou_sum += m.iou.as_f64();
        }
        for (k, b) in g.iter().enumerate() {
            coverage.entry(b.id).or_default().push(matched_gt[k]);
        }
        tp += matches.len();
        fp += h.len() - matches.len();
        fn_ += g.len() - matches.len();
        carry = next_carry;
    }

    let gt_count = gt.len();
    let (mut mt, mut pt, mut ml, mut frag) = (0usize, 0usize, 0usize, 0usize);
    for flags in coverage.values() {
        let hits = flags.iter().filter(|&&f| f).count();
        let ratio = hits as f64 / flags.len() as f64;
        if ratio >= MOSTLY_TRACKED {
            mt += 1;
        } else if ratio <= MOSTLY_LOST {
            ml += 1;
        } else {
            pt += 1;
        }
        let mut seen = false;
        let mut gap = false;
        for &f in flags {
            if f {
                if seen && gap {
                    frag += 1;
                }
                seen = true;
                gap = false;
            } else if seen {
                gap = true;
            }
        }
    }
    let tracks = coverage.len() as f64;
    let pct = |n: usize| 100.0 * n as f64 / tracks;
    Ok(MOTReport {
        mota: 1.0 - (fn_ + fp + ids) as f64 / gt_count as f64,
        motp: if tp > 0 { iou_sum / tp as f64 } else { 0.0 },
        recall: tp as f64 / gt_count as f64,
        precision: if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 },
        mt: pct(mt),
        pt: pct(pt),
        ml: pct(ml),
        tp,
        fp,
        fn_,
        ids,
        frag,
        gt_count,
    })
}
