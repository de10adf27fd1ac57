//! Text formats for detections, features, calibration, poses, labels and
//! tracking results.
//!
//! Grammars (one record per line, `\n` endings, 1-based line numbers in
//! errors):
//!
//! - detections: `frame,x,y,w,h,score`, optional header line starting with
//!   `frame`;
//! - features: header `frame,det_index,psi0..psi{d-1},lambda0..lambda4,
//!   omega0..omega2,h,w,l`, then one row per detection; `det_index` is the
//!   position of the detection among its frame's lines in the detection file;
//! - calibration: KITTI `P2: ` line with 12 reals; optional `image_size: w h`
//!   and `ground: nx ny nz h` lines, other keys ignored;
//! - poses: 12 reals per line, row-major 3×4 camera-to-world;
//! - labels/results: KITTI tracking label lines (17 fields, optional score).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::association::tracker::Track;
use crate::detection::{BBox, Detection, ObjectFeatures, SHAPE_BASIS_LEN};
use crate::error::IoError;
use crate::evaluation::LabeledBox;
use crate::geometry::camera::{CameraRig, RigidMotion};
use crate::geometry::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Largest rotation residual accepted in a pose file.
pub const MAX_POSE_RESIDUAL: f64 = 1e-6;

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

/// Non-blank lines with their 1-based numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn real<T: Real>(tok: &str, line: usize, what: &str) -> Result<T, IoError> {
    match tok.trim().parse::<T>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IoError::parse(line, format!("invalid {what} `{}`", tok.trim()))),
    }
}

fn index(tok: &str, line: usize, what: &str) -> Result<usize, IoError> {
    tok.trim().parse::<usize>().map_err(|_| IoError::parse(line, format!("invalid {what} `{}`", tok.trim())))
}

// ---------------------------------------------------------------- detections

/// Detections grouped by frame; frames without detections are empty.
pub fn parse_detections<T: Real>(text: &str) -> Result<Vec<Vec<Detection<T>>>, IoError> {
    let mut frames: Vec<Vec<Detection<T>>> = Vec::new();
    for (n, (line, l)) in numbered_lines(text).enumerate() {
        if n == 0 && l.starts_with("frame") {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 6 {
            return Err(IoError::parse(line, format!("expected 6 fields, got {}", f.len())));
        }
        let frame = index(f[0], line, "frame")?;
        let x = real(f[1], line, "x")?;
        let y = real(f[2], line, "y")?;
        let w: T = real(f[3], line, "w")?;
        let h: T = real(f[4], line, "h")?;
        let score = real(f[5], line, "score")?;
        if w <= T::zero() || h <= T::zero() {
            return Err(IoError::NegativeDimension { line });
        }
        if frames.len() <= frame {
            frames.resize_with(frame + 1, Vec::new);
        }
        frames[frame].push(Detection::new(frame, BBox::new(x, y, w, h), score));
    }
    Ok(frames)
}

pub fn read_detections<T: Real>(path: &Path) -> Result<Vec<Vec<Detection<T>>>, IoError> {
    parse_detections(&read_text(path)?)
}

pub fn format_detections<T: Real>(frames: &[Vec<Detection<T>>]) -> String {
    let mut out = String::from("frame,x,y,w,h,score\n");
    for d in frames.iter().flatten() {
        let b = d.bbox;
        let _ = writeln!(out, "{},{},{},{},{},{}", d.frame, b.x, b.y, b.w, b.h, d.score);
    }
    out
}

// ------------------------------------------------------------------ features

/// Features keyed by `(frame, det_index)`.
pub type FeatureTable<T> = BTreeMap<(usize, usize), ObjectFeatures<T>>;

/// Number of values in a feature row besides `psi`.
const FIXED_FEATURES: usize = SHAPE_BASIS_LEN + 3 + 3;

pub fn parse_features<T: Real>(text: &str) -> Result<FeatureTable<T>, IoError> {
    let mut lines = numbered_lines(text);
    let mut table = FeatureTable::new();
    let Some((hline, header)) = lines.next() else {
        return Ok(table);
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "frame" || cols[1] != "det_index" {
        return Err(IoError::parse(hline, "feature header must start with `frame,det_index`"));
    }
    let d = cols.iter().filter(|c| c.starts_with("psi")).count();
    if cols.len() != 2 + d + FIXED_FEATURES {
        return Err(IoError::parse(
            hline,
            format!("header declares {} columns, expected {}", cols.len(), 2 + d + FIXED_FEATURES),
        ));
    }

    for (line, l) in lines {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() < 2 {
            return Err(IoError::parse(line, "missing frame or det_index"));
        }
        let key = (index(f[0], line, "frame")?, index(f[1], line, "det_index")?);
        let values = f[2..].iter().map(|t| real::<T>(t, line, "feature value")).collect::<Result<Vec<T>, _>>()?;
        if values.len() != d + FIXED_FEATURES {
            return Err(IoError::DimensionMismatch { line, expected: d + FIXED_FEATURES, got: values.len() });
        }
        let (psi, rest) = values.split_at(d);
        let mut lambda = [T::zero(); SHAPE_BASIS_LEN];
        lambda.copy_from_slice(&rest[..SHAPE_BASIS_LEN]);
        let v3 = |i: usize| Vec3::new(rest[i], rest[i + 1], rest[i + 2]);
        let feats =
            ObjectFeatures { psi: psi.to_vec(), lambda, omega: v3(SHAPE_BASIS_LEN), dims: v3(SHAPE_BASIS_LEN + 3) };
        feats.validate().map_err(|e| IoError::parse(line, e.to_string()))?;
        if table.insert(key, feats).is_some() {
            return Err(IoError::parse(line, format!("duplicate row for frame {} det_index {}", key.0, key.1)));
        }
    }
    Ok(table)
}

/// Reads a feature file; a missing file yields an empty table.
pub fn read_features<T: Real>(path: &Path) -> Result<FeatureTable<T>, IoError> {
    match fs::read_to_string(path) {
        Ok(text) => parse_features(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(FeatureTable::new()),
        Err(e) => Err(IoError::io(path, e)),
    }
}

/// Attaches features to detections by `(frame, position in frame)`.
pub fn attach_features<T: Real>(frames: &mut [Vec<Detection<T>>], table: &FeatureTable<T>) {
    for (f, dets) in frames.iter_mut().enumerate() {
        for (i, d) in dets.iter_mut().enumerate() {
            d.features = table.get(&(f, i)).cloned();
        }
    }
}

/// Writes the features of all detections that have them. All descriptors
/// must share one length.
pub fn format_features<T: Real>(frames: &[Vec<Detection<T>>]) -> String {
    let d = frames.iter().flatten().find_map(|det| det.features.as_ref().map(|f| f.psi.len())).unwrap_or(0);
    let mut out = String::from("frame,det_index");
    for i in 0..d {
        let _ = write!(out, ",psi{i}");
    }
    for i in 0..SHAPE_BASIS_LEN {
        let _ = write!(out, ",lambda{i}");
    }
    out.push_str(",omega0,omega1,omega2,h,w,l\n");
    for (f, dets) in frames.iter().enumerate() {
        for (i, det) in dets.iter().enumerate() {
            let Some(feat) = &det.features else { continue };
            assert_eq!(feat.psi.len(), d, "descriptor lengths must agree");
            let _ = write!(out, "{f},{i}");
            let values = feat
                .psi
                .iter()
                .chain(feat.lambda.iter())
                .chain(feat.omega.to_array().iter())
                .chain(feat.dims.to_array().iter())
                .copied()
                .collect::<Vec<T>>();
            for v in values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

// --------------------------------------------------------------- calibration

fn key_values(l: &str) -> (&str, &str) {
    match l.split_once(':') {
        Some((k, v)) => (k.trim(), v),
        None => l.split_once(char::is_whitespace).unwrap_or((l, "")),
    }
}

fn reals<T: Real>(s: &str, line: usize, expected: usize, what: &str) -> Result<Vec<T>, IoError> {
    let v = s.split_whitespace().map(|t| real::<T>(t, line, what)).collect::<Result<Vec<T>, _>>()?;
    if v.len() != expected {
        return Err(IoError::parse(line, format!("{what}: expected {expected} numbers, got {}", v.len())));
    }
    Ok(v)
}

/// Rig from a calibration file. Without `image_size` / `ground` lines the
/// image is 1242×375 and the camera is level, 1.65 m above the road.
pub fn parse_calib<T: Real>(text: &str) -> Result<CameraRig<T>, IoError> {
    let mut p2: Option<Vec<T>> = None;
    let mut size = (T::lit(1242.0), T::lit(375.0));
    let mut normal = Vec3::new(T::zero(), T::one(), T::zero());
    let mut h_cam = T::lit(1.65);
    let mut last_line = 0;
    for (line, l) in numbered_lines(text) {
        last_line = line;
        let (key, rest) = key_values(l);
        match key {
            "P2" => p2 = Some(reals(rest, line, 12, "P2")?),
            "image_size" => {
                let v = reals::<T>(rest, line, 2, "image_size")?;
                size = (v[0], v[1]);
            }
            "ground" => {
                let v = reals::<T>(rest, line, 4, "ground")?;
                normal = Vec3::new(v[0], v[1], v[2]);
                h_cam = v[3];
            }
            _ => {}
        }
    }
    let p = p2.ok_or_else(|| IoError::parse(last_line.max(1), "missing P2 line"))?;
    CameraRig::with_ground(p[0], p[5], p[2], p[6], size.0, size.1, normal, h_cam)
        .map_err(|e| IoError::parse(last_line.max(1), e.to_string()))
}

pub fn read_calib<T: Real>(path: &Path) -> Result<CameraRig<T>, IoError> {
    parse_calib(&read_text(path)?)
}

pub fn format_calib<T: Real>(rig: &CameraRig<T>) -> String {
    let z = T::zero();
    let p = [rig.fx, z, rig.cx, z, z, rig.fy, rig.cy, z, z, z, T::one(), z];
    let join = |v: &[T]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let n = rig.normal;
    format!(
        "P2: {}\nimage_size: {} {}\nground: {} {} {} {}\n",
        join(&p),
        rig.image_width,
        rig.image_height,
        n.x,
        n.y,
        n.z,
        rig.h_cam
    )
}

// --------------------------------------------------------------------- poses

/// Absolute camera-to-world poses, one per line, rotations re-orthonormalised.
pub fn parse_poses<T: Real>(text: &str) -> Result<Vec<RigidMotion<T>>, IoError> {
    let mut poses = Vec::new();
    for (line, l) in numbered_lines(text) {
        let v = reals::<T>(l, line, 12, "pose")?;
        let raw = Mat3::from_rows([[v[0], v[1], v[2]], [v[4], v[5], v[6]], [v[8], v[9], v[10]]]);
        let residual = raw.orthonormality_residual().as_f64();
        let rotation = raw
            .nearest_rotation()
            .filter(|_| residual <= MAX_POSE_RESIDUAL)
            .ok_or(IoError::NonOrthonormalRotation { line, residual })?;
        poses.push(RigidMotion { rotation, translation: Vec3::new(v[3], v[7], v[11]), ..RigidMotion::identity() });
    }
    Ok(poses)
}

/// Motion from the camera at `from` into the camera at `to`.
pub fn relative_motion<T: Real>(from: &RigidMotion<T>, to: &RigidMotion<T>) -> RigidMotion<T> {
    to.inverse().compose(from)
}

/// Consecutive-frame motions with the given uncertainties attached.
pub fn motions_from_poses<T: Real>(poses: &[RigidMotion<T>], trans_sigma: T, rot_sigma: T) -> Vec<RigidMotion<T>> {
    poses.windows(2).map(|w| relative_motion(&w[0], &w[1]).with_uncertainty(trans_sigma, rot_sigma)).collect()
}

pub fn read_poses<T: Real>(path: &Path) -> Result<Vec<RigidMotion<T>>, IoError> {
    parse_poses(&read_text(path)?)
}

pub fn format_poses<T: Real>(poses: &[RigidMotion<T>]) -> String {
    let mut out = String::new();
    for p in poses {
        let (r, t) = (p.rotation.m, p.translation.to_array());
        let v = (0..3).flat_map(|i| [r[i][0], r[i][1], r[i][2], t[i]]).map(|x| x.to_string());
        out.push_str(&v.collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out
}

// --------------------------------------------------------- labels / results

/// One KITTI tracking label line. `id` is -1 for `DontCare` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord<T> {
    pub frame: usize,
    pub id: i64,
    pub class: String,
    pub bbox: BBox<T>,
    pub score: Option<T>,
}

pub fn parse_labels<T: Real>(text: &str) -> Result<Vec<LabelRecord<T>>, IoError> {
    let mut out = Vec::new();
    for (line, l) in numbered_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 17 && f.len() != 18 {
            return Err(IoError::parse(line, format!("expected 17 or 18 fields, got {}", f.len())));
        }
        let frame = index(f[0], line, "frame")?;
        let id = f[1].parse::<i64>().map_err(|_| IoError::parse(line, format!("invalid track id `{}`", f[1])))?;
        for (i, what) in [(3, "truncation"), (4, "occlusion"), (5, "alpha")] {
            real::<T>(f[i], line, what)?;
        }
        let c: Vec<T> = (6..10).map(|i| real(f[i], line, "box corner")).collect::<Result<_, _>>()?;
        for tok in &f[10..17] {
            real::<T>(tok, line, "3D field")?;
        }
        if c[2] < c[0] || c[3] < c[1] {
            return Err(IoError::NegativeDimension { line });
        }
        let score = f.get(17).map(|t| real(t, line, "score")).transpose()?;
        out.push(LabelRecord {
            frame,
            id,
            class: f[2].to_string(),
            bbox: BBox::from_corners(c[0], c[1], c[2], c[3]),
            score,
        });
    }
    Ok(out)
}

pub fn read_labels<T: Real>(path: &Path) -> Result<Vec<LabelRecord<T>>, IoError> {
    parse_labels(&read_text(path)?)
}

/// Boxes of class `Car` with a valid id, as evaluation input.
pub fn car_boxes<T: Real>(records: &[LabelRecord<T>]) -> Vec<LabeledBox<T>> {
    records
        .iter()
        .filter(|r| r.class == "Car" && r.id >= 0)
        .map(|r| LabeledBox { frame: r.frame, id: r.id as u64, bbox: r.bbox })
        .collect()
}

/// Result lines for tracks, sorted by frame then id, two decimals.
pub fn format_results<T: Real>(tracks: &[Track<T>]) -> String {
    let mut rows: Vec<(usize, u64, BBox<T>, T)> =
        tracks.iter().flat_map(|t| t.entries.iter().map(move |d| (d.frame, t.id, d.bbox, d.score))).collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::new();
    for (frame, id, b, score) in rows {
        let _ = writeln!(
            out,
            "{frame} {id} Car -1 -1 -10 {:.2} {:.2} {:.2} {:.2} -1 -1 -1 -1000 -1000 -1000 -10 {:.2}",
            b.x.as_f64(),
            b.y.as_f64(),
            b.right().as_f64(),
            b.bottom().as_f64(),
            score.as_f64()
        );
    }
    out
}

/// Label lines rebuilt from parsed records in the [`format_results`] layout.
/// The score column is written only when present.
pub fn format_records<T: Real>(records: &[LabelRecord<T>]) -> String {
    let mut rows: Vec<&LabelRecord<T>> = records.iter().collect();
    rows.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in rows {
        let b = r.bbox;
        let _ = write!(
            out,
            "{} {} {} -1 -1 -10 {:.2} {:.2} {:.2} {:.2} -1 -1 -1 -1000 -1000 -1000 -10",
            r.frame,
            r.id,
            r.class,
            b.x.as_f64(),
            b.y.as_f64(),
            b.right().as_f64(),
            b.bottom().as_f64()
        );
        if let Some(s) = r.score {
            let _ = write!(out, " {:.2}", s.as_f64());
        }
        out.push('\n');
    }
    out
}

pub fn write_results<T: Real>(tracks: &[Track<T>], path: &Path) -> Result<(), IoError> {
    write_text(path, &format_results(tracks))
}

/// Ground-truth label lines at full precision, sorted by frame then id.
pub fn format_ground_truth<T: Real>(boxes: &[LabeledBox<T>]) -> String {
    let mut rows: Vec<&LabeledBox<T>> = boxes.iter().collect();
    rows.sort_by_key(|b| (b.frame, b.id));
    let mut out = String::new();
    for lb in rows {
        let b = lb.bbox;
        let _ = writeln!(
            out,
            "{} {} Car 0 0 -10 {} {} {} {} -1 -1 -1 -1000 -1000 -1000 -10",
            lb.frame,
            lb.id,
            b.x,
            b.y,
            b.right(),
            b.bottom()
        );
    }
    out
}

// -------------------------------------------------------------------- bundle

/// File locations of one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencePaths {
    pub detections: PathBuf,
    pub features: Option<PathBuf>,
    pub calib: PathBuf,
    pub poses: PathBuf,
    pub gt: Option<PathBuf>,
}

impl SequencePaths {
    pub const DETECTIONS: &'static str = "detections.csv";
    pub const FEATURES: &'static str = "features.csv";
    pub const CALIB: &'static str = "calib.txt";
    pub const POSES: &'static str = "poses.txt";
    pub const GT: &'static str = "gt.txt";

    /// Standard file names inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            detections: dir.join(Self::DETECTIONS),
            features: Some(dir.join(Self::FEATURES)),
            calib: dir.join(Self::CALIB),
            poses: dir.join(Self::POSES),
            gt: Some(dir.join(Self::GT)),
        }
    }
}

/// Everything the tracker needs for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBundle<T> {
    pub frames: Vec<Vec<Detection<T>>>,
    pub rig: CameraRig<T>,
    /// `motions[k]` maps frame k into frame k + 1.
    pub motions: Vec<RigidMotion<T>>,
    pub gt: Option<Vec<LabeledBox<T>>>,
}

impl<T: Real> SequenceBundle<T> {
    /// Loads a sequence. The frame count comes from the pose file;
    /// detection frames beyond it are an error. A missing ground-truth file
    /// leaves `gt` empty.
    pub fn load(paths: &SequencePaths, trans_sigma: T, rot_sigma: T) -> Result<Self, IoError> {
        let rig = read_calib(&paths.calib)?;
        let poses = read_poses(&paths.poses)?;
        let mut frames = read_detections(&paths.detections)?;
        if frames.len() > poses.len() {
            return Err(IoError::FrameOutOfRange { frame: frames.len() - 1, frames: poses.len() });
        }
        frames.resize_with(poses.len(), Vec::new);
        if let Some(fp) = &paths.features {
            attach_features(&mut frames, &read_features(fp)?);
        }
        let gt = match &paths.gt {
            Some(p) if p.exists() => Some(car_boxes(&read_labels(p)?)),
            _ => None,
        };
        Ok(Self { frames, rig, motions: motions_from_poses(&poses, trans_sigma, rot_sigma), gt })
    }

    pub fn is_consistent(&self) -> bool {
        self.motions.len() + 1 == self.frames.len().max(1)
            && self.frames.iter().enumerate().all(|(f, dets)| dets.iter().all(|d| d.frame == f))
    }
}

/// Writes a sequence in the standard layout. `poses` are absolute
/// camera-to-world poses, one per frame.
pub fn write_sequence<T: Real>(
    dir: &Path,
    frames: &[Vec<Detection<T>>],
    rig: &CameraRig<T>,
    poses: &[RigidMotion<T>],
    gt: Option<&[LabeledBox<T>]>,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    write_text(&dir.join(SequencePaths::DETECTIONS), &format_detections(frames))?;
    if frames.iter().flatten().any(|d| d.features.is_some()) {
        write_text(&dir.join(SequencePaths::FEATURES), &format_features(frames))?;
    }
    write_text(&dir.join(SequencePaths::CALIB), &format_calib(rig))?;
    write_text(&dir.join(SequencePaths::POSES), &format_poses(poses))?;
    if let Some(gt) = gt {
        write_text(&dir.join(SequencePaths::GT), &format_ground_truth(gt))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_line_maps_fields() {
        let frames = parse_detections::<f64>("0,100.0,150.0,80.0,60.0,0.97\n").unwrap();
        assert_eq!(frames.len(), 1);
        let d = &frames[0][0];
        assert_eq!((d.frame, d.bbox, d.score), (0, BBox::new(100.0, 150.0, 80.0, 60.0), 0.97));
    }

    #[test]
    fn detection_errors_carry_line_numbers() {
        assert!(parse_detections::<f64>("").unwrap().is_empty());
        let e = parse_detections::<f64>("frame,x,y,w,h,score\n0,1,1,-5,4,0.9\n").unwrap_err();
        assert!(matches!(e, IoError::NegativeDimension { line: 2 }));
        let e = parse_detections::<f64>("0,1,1,5,4,0.9\n1,1,1,5,0.9\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 2, .. }));
        let e = parse_detections::<f64>("0,1,1,5,4,abc\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 1, .. }));
    }

    #[test]
    fn frames_are_grouped_in_order() {
        let frames = parse_detections::<f64>("2,1,1,5,4,0.9\n0,9,1,5,4,0.8\n2,3,1,5,4,0.7\n").unwrap();
        assert_eq!(frames.len(), 3);
        assert!(frames[1].is_empty());
        assert_eq!(frames[2].iter().map(|d| d.bbox.x).collect::<Vec<_>>(), vec![1.0, 3.0]);
    }

    const FEATURE_HEADER: &str =
        "frame,det_index,psi0,psi1,psi2,psi3,lambda0,lambda1,lambda2,lambda3,lambda4,omega0,omega1,omega2,h,w,l\n";

    #[test]
    fn feature_rows() {
        let ok = format!("{FEATURE_HEADER}0,1,1,2,3,4,0.1,0.2,0.3,0.4,0.5,0,0.3,0,1.5,1.6,4.0\n");
        let t = parse_features::<f64>(&ok).unwrap();
        let f = &t[&(0, 1)];
        assert_eq!(f.psi, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.dims, Vec3::new(1.5, 1.6, 4.0));
        let short = format!("{FEATURE_HEADER}0,1,1,2,3,0.1,0.2,0.3,0.4,0.5,0,0.3,0,1.5,1.6,4.0\n");
        assert!(matches!(
            parse_features::<f64>(&short),
            Err(IoError::DimensionMismatch { line: 2, expected: 15, got: 14 })
        ));
    }

    #[test]
    fn missing_feature_file_is_empty() {
        let t = read_features::<f64>(Path::new("/nonexistent/features.csv")).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn calib_reads_p2() {
        let text = "P0: 1 0 0 0 0 1 0 0 0 0 1 0\nP2: 721.5 0 609.5 44.8 0 720.0 172.8 0.2 0 0 1 0.003\n";
        let rig = parse_calib::<f64>(text).unwrap();
        assert_eq!((rig.fx, rig.fy, rig.cx, rig.cy), (721.5, 720.0, 609.5, 172.8));
        assert_eq!(rig.image_width, 1242.0);
        let bad = "P2: 721.5 0 609.5 44.8 0 720.0 172.8 0.2 0 0 1\n";
        assert!(matches!(parse_calib::<f64>(bad), Err(IoError::Parse { line: 1, .. })));
        let back = parse_calib::<f64>(&format_calib(&rig)).unwrap();
        assert_eq!(back, rig);
    }

    #[test]
    fn identity_poses_give_identity_motions() {
        let text = "1 0 0 0 0 1 0 0 0 0 1 0\n".repeat(4);
        let poses = parse_poses::<f64>(&text).unwrap();
        for m in motions_from_poses(&poses, 0.0, 0.0) {
            assert_eq!(m, RigidMotion::identity());
        }
    }

    #[test]
    fn forward_driving_moves_points_back() {
        let text: String = (0..3).map(|f| format!("1 0 0 0 0 1 0 0 0 0 1 {f}\n")).collect();
        let poses = parse_poses::<f64>(&text).unwrap();
        for m in motions_from_poses(&poses, 0.0, 0.0) {
            assert_eq!(m.translation, Vec3::new(0.0, 0.0, -1.0));
        }
    }

    #[test]
    fn skewed_rotation_rejected() {
        let e = parse_poses::<f64>("1 0 0 0 0 1 0 0 0 0 1 0\n1 0.01 0 0 0 1 0 0 0 0 1 0\n").unwrap_err();
        assert!(matches!(e, IoError::NonOrthonormalRotation { line: 2, .. }));
    }

    #[test]
    fn result_line_format() {
        let track = Track::new(3, Detection::new(0, BBox::new(100.0, 150.0, 80.0, 60.0), 0.9));
        assert_eq!(
            format_results(&[track]),
            "0 3 Car -1 -1 -10 100.00 150.00 180.00 210.00 -1 -1 -1 -1000 -1000 -1000 -10 0.90\n"
        );
        assert_eq!(format_results::<f64>(&[]), "");
    }

    #[test]
    fn label_reader() {
        let text = "0 -1 DontCare -1 -1 -10 10 20 30 40 -1 -1 -1 -1000 -1000 -1000 -10\n\
                    0 2 Car 0 0 -10 100 150 180 210 -1 -1 -1 -1000 -1000 -1000 -10\n";
        let r = parse_labels::<f64>(text).unwrap();
        assert_eq!(r.len(), 2);
        let cars = car_boxes(&r);
        assert_eq!(cars, vec![LabeledBox { frame: 0, id: 2, bbox: BBox::new(100.0, 150.0, 80.0, 60.0) }]);
        assert!(parse_labels::<f64>("0 1 Car 0 0\n").is_err());
    }
}
