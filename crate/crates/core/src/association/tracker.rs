//! Track lifecycle for the two-frame tracker.

use crate::association::hungarian::{hungarian, hungarian_with_unmatched, Assignment};
use crate::association::preprocess;
use crate::costs::{build_cost_matrix_with_motions, CostConfig, CostMatrix};
use crate::detection::Detection;
use crate::error::TrackError;
use crate::geometry::camera::{CameraRig, RigidMotion};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Active,
    Terminated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track<T> {
    pub id: u64,
    /// One detection per frame, frames strictly increasing.
    pub entries: Vec<Detection<T>>,
    /// Consecutive frames without a match.
    pub misses: usize,
    pub state: TrackState,
}

impl<T: Real> Track<T> {
    pub fn new(id: u64, first: Detection<T>) -> Self {
        Self { id, entries: vec![first], misses: 0, state: TrackState::Active }
    }

    pub fn last(&self) -> &Detection<T> {
        self.entries.last().expect("tracks are never empty")
    }

    pub fn is_active(&self) -> bool {
        self.state == TrackState::Active
    }

    /// Frames strictly increasing.
    pub fn is_well_formed(&self) -> bool {
        !self.entries.is_empty() && self.entries.windows(2).all(|w| w[0].frame < w[1].frame)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig<T> {
    pub cost: CostConfig<T>,
    pub min_score: T,
    pub nms_iou: T,
    /// Frames a track may go unmatched before it is terminated.
    pub hold_frames: usize,
    /// Charge `gate_cost / 2` for each unmatched track and detection, so a
    /// pair is only made when it beats leaving both sides open. When false,
    /// the number of matched pairs is maximised before cost is minimised,
    /// which lets one spurious detection shift a chain of tracks.
    pub price_unmatched: bool,
}

impl<T: Real> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            cost: CostConfig::default(),
            min_score: T::lit(0.5),
            nms_iou: T::lit(0.5),
            hold_frames: 0,
            price_unmatched: true,
        }
    }
}

/// Owns the tracks of one sequence and hands out ids.
#[derive(Debug, Clone)]
pub struct Tracker<T> {
    tracks: Vec<Track<T>>,
    next_id: u64,
}

impl<T: Real> Default for Tracker<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Tracker<T> {
    pub fn new() -> Self {
        Self { tracks: Vec::new(), next_id: 1 }
    }

    pub fn tracks(&self) -> &[Track<T>] {
        &self.tracks
    }

    pub fn into_tracks(self) -> Vec<Track<T>> {
        self.tracks
    }

    /// Indices into [`Self::tracks`] of the active tracks, in id order.
    /// These are the rows of the next cost matrix.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.tracks.len()).filter(|&i| self.tracks[i].is_active()).collect()
    }

    /// Applies one association step. `matrix` rows follow
    /// [`Self::active_indices`]; its columns follow `dets`.
    pub fn step(&mut self, dets: Vec<Detection<T>>, matrix: &CostMatrix<T>, hold_frames: usize) -> Assignment<T> {
        self.apply(dets, matrix, hungarian(matrix), hold_frames)
    }

    /// Applies a precomputed assignment of `matrix`.
    pub fn apply(
        &mut self,
        dets: Vec<Detection<T>>,
        matrix: &CostMatrix<T>,
        assignment: Assignment<T>,
        hold_frames: usize,
    ) -> Assignment<T> {
        let active = self.active_indices();
        assert_eq!(matrix.rows(), active.len(), "cost matrix rows must match active tracks");
        assert_eq!(matrix.cols(), dets.len(), "cost matrix cols must match detections");

        let mut slots: Vec<Option<Detection<T>>> = dets.into_iter().map(Some).collect();
        for &(r, c) in &assignment.pairs {
            let track = &mut self.tracks[active[r]];
            let det = slots[c].take().expect("column assigned once");
            debug_assert!(det.frame > track.last().frame);
            track.entries.push(det);
            track.misses = 0;
        }
        for &r in &assignment.unmatched_rows {
            let track = &mut self.tracks[active[r]];
            track.misses += 1;
            if track.misses > hold_frames {
                track.state = TrackState::Terminated;
            }
        }
        for det in slots.into_iter().flatten() {
            self.tracks.push(Track::new(self.next_id, det));
            self.next_id += 1;
        }
        assignment
    }
}

/// Per-frame bookkeeping reported by [`SequenceTracker::push_frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameStats {
    pub frame: usize,
    pub rows: usize,
    pub cols: usize,
    pub evaluated: usize,
}

/// Frame-by-frame driver: preprocess, cost matrix, assignment, update.
#[derive(Debug, Clone)]
pub struct SequenceTracker<T> {
    config: TrackerConfig<T>,
    rig: CameraRig<T>,
    tracker: Tracker<T>,
    /// `motions[k]` maps frame k into frame k + 1.
    motions: Vec<RigidMotion<T>>,
    frame: usize,
}

impl<T: Real> SequenceTracker<T> {
    pub fn new(rig: CameraRig<T>, config: TrackerConfig<T>) -> Self {
        Self { config, rig, tracker: Tracker::new(), motions: Vec::new(), frame: 0 }
    }

    /// Processes the next frame. `motion_from_prev` is required for every
    /// frame but the first.
    pub fn push_frame(&mut self, dets: &[Detection<T>], motion_from_prev: Option<RigidMotion<T>>) -> FrameStats {
        if self.frame > 0 {
            self.motions.push(motion_from_prev.expect("motion required after the first frame"));
        }
        let frame = self.frame;
        self.frame += 1;
        let mut dets = preprocess(dets, self.config.min_score, self.config.nms_iou);
        for d in &mut dets {
            d.frame = frame;
        }

        let active = self.tracker.active_indices();
        let rows: Vec<(&Detection<T>, RigidMotion<T>)> = active
            .iter()
            .map(|&i| {
                let last = self.tracker.tracks()[i].last();
                (last, self.motion_between(last.frame, frame))
            })
            .collect();
        let matrix = build_cost_matrix_with_motions(&rows, &dets, &self.rig, &self.config.cost);
        let stats = FrameStats { frame, rows: matrix.rows(), cols: matrix.cols(), evaluated: matrix.evaluated_count() };
        drop(rows);
        let assignment = if self.config.price_unmatched {
            hungarian_with_unmatched(&matrix, self.config.cost.weights.gate_cost / T::lit(2.0))
        } else {
            hungarian(&matrix)
        };
        self.tracker.apply(dets, &matrix, assignment, self.config.hold_frames);
        stats
    }

    fn motion_between(&self, from: usize, to: usize) -> RigidMotion<T> {
        self.motions[from..to].iter().fold(RigidMotion::identity(), |acc, m| m.compose(&acc))
    }

    pub fn tracker(&self) -> &Tracker<T> {
        &self.tracker
    }

    /// All tracks, active and terminated, in id order.
    pub fn finish(self) -> Vec<Track<T>> {
        self.tracker.into_tracks()
    }
}

/// Runs the tracker over a whole sequence. `motions[k]` maps frame k into
/// frame k + 1, so there must be exactly one fewer motion than frames.
pub fn run_sequence<T: Real>(
    frames: &[Vec<Detection<T>>],
    motions: &[RigidMotion<T>],
    rig: &CameraRig<T>,
    config: &TrackerConfig<T>,
) -> Result<Vec<Track<T>>, TrackError> {
    let expected = frames.len().saturating_sub(1);
    if motions.len() != expected {
        return Err(TrackError::InputMisaligned { frames: frames.len(), expected, got: motions.len() });
    }
    let mut seq = SequenceTracker::new(*rig, *config);
    for (f, dets) in frames.iter().enumerate() {
        let motion = f.checked_sub(1).map(|k| motions[k]);
        seq.push_frame(dets, motion);
    }
    Ok(seq.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::BBox;

    fn det(frame: usize, x: f64) -> Detection<f64> {
        Detection::new(frame, BBox::new(x, 200.0, 60.0, 40.0), 0.9)
    }

    fn seeded(n: usize) -> Tracker<f64> {
        let mut t = Tracker::new();
        let dets: Vec<_> = (0..n).map(|i| det(0, 100.0 * i as f64)).collect();
        t.step(dets, &CostMatrix::gated(0, n), 0);
        t
    }

    #[test]
    fn diagonal_matrix_extends_every_track() {
        let mut t = seeded(3);
        let m = CostMatrix::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        t.step((0..3).map(|i| det(1, 100.0 * i as f64)).collect(), &m, 0);
        assert_eq!(t.tracks().len(), 3);
        assert!(t.tracks().iter().all(|tr| tr.entries.len() == 2 && tr.is_active()));
        assert_eq!(t.tracks().iter().map(|t| t.id).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn no_detections_terminates_without_hold() {
        let mut t = seeded(2);
        t.step(vec![], &CostMatrix::gated(2, 0), 0);
        assert!(t.tracks().iter().all(|tr| tr.misses == 1 && tr.state == TrackState::Terminated));
    }

    #[test]
    fn hold_frames_keeps_tracks_alive() {
        let mut t = seeded(1);
        t.step(vec![], &CostMatrix::gated(1, 0), 1);
        assert!(t.tracks()[0].is_active());
        t.step(vec![], &CostMatrix::gated(1, 0), 1);
        assert_eq!(t.tracks()[0].state, TrackState::Terminated);
    }

    #[test]
    fn unmatched_detections_get_fresh_ids() {
        let mut t = seeded(1);
        t.step(vec![det(1, 0.0), det(1, 500.0)], &CostMatrix::from_options(&[vec![Some(0.1), None]]), 0);
        t.step(vec![det(2, 900.0)], &CostMatrix::gated(2, 1), 0);
        let ids: Vec<u64> = t.tracks().iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert!(t.tracks().iter().all(Track::is_well_formed));
    }

    fn rig() -> CameraRig<f64> {
        CameraRig::new(700.0, 700.0, 600.0, 180.0, 1200.0, 360.0, 1.65).unwrap()
    }

    #[test]
    fn empty_sequence() {
        let tracks = run_sequence::<f64>(&[], &[], &rig(), &TrackerConfig::default()).unwrap();
        assert!(tracks.is_empty());
    }

    #[test]
    fn stationary_detection_forms_one_track() {
        let frames: Vec<Vec<Detection<f64>>> = (0..6).map(|f| vec![det(f, 570.0)]).collect();
        let motions = vec![RigidMotion::identity(); 5];
        let tracks = run_sequence(&frames, &motions, &rig(), &TrackerConfig::default()).unwrap();
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].entries.len(), 6);
    }

    #[test]
    fn misaligned_motions_rejected() {
        let frames: Vec<Vec<Detection<f64>>> = (0..3).map(|f| vec![det(f, 570.0)]).collect();
        let err = run_sequence(&frames, &[RigidMotion::identity()], &rig(), &TrackerConfig::default());
        assert_eq!(err, Err(TrackError::InputMisaligned { frames: 3, expected: 2, got: 1 }));
    }
}
