//! Synthetic road scenes: cars on a flat road seen from a moving camera,
//! rendered into noisy detections with ground truth.
//!
//! World frame = camera frame at frame 0 (X right, Y down, Z forward); the
//! road is `Y = h_cam` and the camera only turns about Y, so its height is
//! constant.
//!
//! Boxes are rendered as upright billboards anchored at the object's ground
//! contact point: the bottom centre of a noise-free box is the projection of
//! that point, so backprojecting it recovers the object position exactly.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`; generation
//! uses stream 0 and rendering stream 1.

pub mod shape;

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::detection::{BBox, Detection, ObjectFeatures, SHAPE_BASIS_LEN};
use crate::error::IoError;
use crate::evaluation::LabeledBox;
use crate::geometry::camera::{project, CameraRig, RigidMotion, DEFAULT_ROT_SIGMA, DEFAULT_TRANS_SIGMA};
use crate::geometry::linalg::{wrap_angle, Mat3, Vec3};
use crate::kitti_io::{relative_motion, write_sequence, SequenceBundle};
use shape::{reconstruct_shape, shape_dims, ShapeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionTemplate {
    ConstantVelocity,
    LaneChange,
    /// Drive to an intersection and turn by a right angle.
    IntersectionTurn,
}

/// Relative frequencies of the motion templates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateMix {
    pub constant_velocity: f64,
    pub lane_change: f64,
    pub intersection_turn: f64,
}

impl TemplateMix {
    fn pick(&self, rng: &mut ChaCha8Rng) -> MotionTemplate {
        let total = self.constant_velocity + self.lane_change + self.intersection_turn;
        let x = rng.random::<f64>() * total;
        if x < self.constant_velocity {
            MotionTemplate::ConstantVelocity
        } else if x < self.constant_velocity + self.lane_change {
            MotionTemplate::LaneChange
        } else {
            MotionTemplate::IntersectionTurn
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Std-dev of each box edge (pixels).
    pub pixel_sigma: f64,
    /// Probability that a visible object yields no detection.
    pub dropout: f64,
    /// Mean number of false boxes per frame (Poisson).
    pub clutter_rate: f64,
    pub psi_sigma: f64,
    pub lambda_sigma: f64,
    /// Std-dev of the yaw estimate (radians).
    pub omega_sigma: f64,
    pub dims_sigma: f64,
    /// Detection scores are uniform in this range.
    pub score_range: (f64, f64),
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            pixel_sigma: 0.0,
            dropout: 0.0,
            clutter_rate: 0.0,
            psi_sigma: 0.0,
            lambda_sigma: 0.0,
            omega_sigma: 0.0,
            dims_sigma: 0.0,
            score_range: (0.7, 1.0),
        }
    }

    /// Box noise as given, with moderate feature noise.
    pub fn noisy(pixel_sigma: f64, dropout: f64, clutter_rate: f64) -> Self {
        Self {
            pixel_sigma,
            dropout,
            clutter_rate,
            psi_sigma: 0.15,
            lambda_sigma: 0.1,
            omega_sigma: 0.05,
            dims_sigma: 0.05,
            ..Self::none()
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub frames: usize,
    pub objects: usize,
    /// Seconds per frame.
    pub dt: f64,
    pub rig: CameraRig<f64>,
    /// Ego speed (m/s).
    pub camera_speed: f64,
    /// Ego heading oscillates as `A·sin(2πf / period)`.
    pub camera_yaw_amplitude: f64,
    pub camera_yaw_period: f64,
    pub lanes: usize,
    pub lane_width: f64,
    /// Lane traffic speed is ego speed ± this (m/s).
    pub speed_spread: f64,
    pub templates: TemplateMix,
    /// Objects are visible only between these depths (meters) and when
    /// their box lies fully inside the image.
    pub depth_range: (f64, f64),
    pub descriptor_len: usize,
    /// Resample objects until each is visible over one contiguous run of at
    /// least two frames and no two visible boxes overlap by `max_pair_iou`
    /// or more.
    pub well_separated: bool,
    pub max_pair_iou: f64,
    pub noise: NoiseConfig,
    /// Uncertainty attached to the rendered ego-motions.
    pub motion_sigmas: (f64, f64),
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            frames: 50,
            objects: 10,
            dt: 0.1,
            rig: CameraRig::kitti_like(),
            camera_speed: 10.0,
            camera_yaw_amplitude: 0.05,
            camera_yaw_period: 60.0,
            lanes: 3,
            lane_width: 3.5,
            speed_spread: 3.0,
            templates: TemplateMix { constant_velocity: 0.7, lane_change: 0.3, intersection_turn: 0.0 },
            depth_range: (4.0, 60.0),
            descriptor_len: 8,
            well_separated: true,
            max_pair_iou: 0.3,
            noise: NoiseConfig::none(),
            motion_sigmas: (DEFAULT_TRANS_SIGMA, DEFAULT_ROT_SIGMA),
        }
    }
}

impl SimConfig {
    /// Slow ego car at a crossing where every object turns.
    pub fn intersection() -> Self {
        Self {
            camera_speed: 2.0,
            camera_yaw_amplitude: 0.0,
            templates: TemplateMix { constant_velocity: 0.0, lane_change: 0.0, intersection_turn: 1.0 },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectPose {
    /// Ground contact point in world coordinates.
    pub position: Vec3<f64>,
    /// Heading about the vertical axis; the object drives along
    /// `(sin yaw, 0, cos yaw)`.
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimObject {
    pub id: u64,
    pub template: MotionTemplate,
    pub lambda: [f64; SHAPE_BASIS_LEN],
    /// Height, width, length.
    pub dims: Vec3<f64>,
    /// Unit-norm appearance descriptor.
    pub psi: Vec<f64>,
    pub poses: Vec<ObjectPose>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScene {
    pub seed: u64,
    pub rig: CameraRig<f64>,
    /// Camera-to-world pose per frame.
    pub camera: Vec<RigidMotion<f64>>,
    pub objects: Vec<SimObject>,
    pub depth_range: (f64, f64),
    pub noise: NoiseConfig,
    pub motion_sigmas: (f64, f64),
}

/// Rendered detections with the true object id of each (None for clutter).
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    pub bundle: SequenceBundle<f64>,
    pub truth: Vec<Vec<Option<u64>>>,
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * sigma
}

fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| gauss(rng, 1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn heading(yaw: f64) -> Vec3<f64> {
    Vec3::new(yaw.sin(), 0.0, yaw.cos())
}

fn smoothstep(s: f64) -> (f64, f64) {
    let s = s.clamp(0.0, 1.0);
    (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s))
}

/// Upright box of an object whose ground contact point is `anchor` (camera
/// frame) and whose heading relative to the camera is `yaw`.
pub fn billboard_box(rig: &CameraRig<f64>, anchor: Vec3<f64>, yaw: f64, dims: Vec3<f64>) -> Option<BBox<f64>> {
    let bottom = project(anchor, rig).ok()?;
    let z = anchor.z;
    let w = rig.fx * ((dims.y * yaw.cos()).abs() + (dims.z * yaw.sin()).abs()) / z;
    let h = rig.fy * dims.x / z;
    Some(BBox::new(bottom.x - w / 2.0, bottom.y - h, w, h))
}

impl SimScene {
    pub fn frames(&self) -> usize {
        self.camera.len()
    }

    /// Ground contact point and relative yaw of an object in the camera
    /// frame of `frame`.
    pub fn object_in_camera(&self, object: &SimObject, frame: usize) -> (Vec3<f64>, f64) {
        let cam = &self.camera[frame];
        let pose = &object.poses[frame];
        let p = cam.inverse().rotation * (pose.position - cam.translation);
        (p, wrap_angle(pose.yaw - cam.yaw()))
    }

    /// Noise-free box of a visible object.
    pub fn visible_box(&self, object: &SimObject, frame: usize) -> Option<BBox<f64>> {
        let (p, yaw) = self.object_in_camera(object, frame);
        if p.z < self.depth_range.0 || p.z > self.depth_range.1 {
            return None;
        }
        let b = billboard_box(&self.rig, p, yaw, object.dims)?;
        let inside =
            b.x >= 0.0 && b.y >= 0.0 && b.right() <= self.rig.image_width && b.bottom() <= self.rig.image_height;
        inside.then_some(b)
    }

    pub fn ground_truth(&self) -> Vec<LabeledBox<f64>> {
        (0..self.frames())
            .flat_map(|f| {
                self.objects
                    .iter()
                    .filter_map(move |o| self.visible_box(o, f).map(|bbox| LabeledBox { frame: f, id: o.id, bbox }))
            })
            .collect()
    }

    /// `motions[k]` maps frame k into frame k + 1.
    pub fn motions(&self) -> Vec<RigidMotion<f64>> {
        self.camera
            .windows(2)
            .map(|w| relative_motion(&w[0], &w[1]).with_uncertainty(self.motion_sigmas.0, self.motion_sigmas.1))
            .collect()
    }
}

struct Layout {
    /// Depth of the crossing road (world Z).
    crossing_z: f64,
}

fn camera_path(cfg: &SimConfig) -> Vec<RigidMotion<f64>> {
    let mut pos = Vec3::zeros();
    (0..cfg.frames)
        .map(|f| {
            let yaw = if cfg.camera_yaw_period > 0.0 {
                cfg.camera_yaw_amplitude * (2.0 * PI * f as f64 / cfg.camera_yaw_period).sin()
            } else {
                0.0
            };
            let pose = RigidMotion { rotation: Mat3::rot_y(yaw), translation: pos, ..RigidMotion::identity() };
            pos += heading(yaw) * (cfg.camera_speed * cfg.dt);
            pose
        })
        .collect()
}

fn lane_center(cfg: &SimConfig, lane: usize) -> f64 {
    (lane as f64 - (cfg.lanes.max(1) - 1) as f64 / 2.0) * cfg.lane_width
}

fn sample_trajectory(
    cfg: &SimConfig,
    layout: &Layout,
    template: MotionTemplate,
    rng: &mut ChaCha8Rng,
) -> Vec<ObjectPose> {
    let h = cfg.rig.h_cam;
    let duration = cfg.frames as f64 * cfg.dt;
    let times = (0..cfg.frames).map(|f| f as f64 * cfg.dt);
    match template {
        MotionTemplate::ConstantVelocity | MotionTemplate::LaneChange => {
            let lanes = cfg.lanes.max(1);
            let lane = rng.random_range(0..lanes);
            let x0 = lane_center(cfg, lane) + rng.random_range(-0.3..=0.3);
            let z0 = rng.random_range(cfg.depth_range.0 - 10.0..=cfg.depth_range.1);
            let v = (cfg.camera_speed + rng.random_range(-1.0..=1.0) * cfg.speed_spread).max(0.0);
            let (shift, start, span) = if template == MotionTemplate::LaneChange {
                let dir = if lanes == 1 || (lane > 0 && lane + 1 < lanes) {
                    if rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                } else if lane == 0 {
                    1.0
                } else {
                    -1.0
                };
                (dir * cfg.lane_width, rng.random_range(0.1..=0.6) * duration, rng.random_range(2.0..=4.0))
            } else {
                (0.0, 0.0, 1.0)
            };
            times
                .map(|t| {
                    let (s, ds) = smoothstep((t - start) / span);
                    let vx = shift * ds / span;
                    let yaw = if v > 0.0 || vx != 0.0 { vx.atan2(v) } else { 0.0 };
                    ObjectPose { position: Vec3::new(x0 + shift * s, h, z0 + v * t), yaw }
                })
                .collect()
        }
        MotionTemplate::IntersectionTurn => {
            let start_yaw = [FRAC_PI_2, -FRAC_PI_2, 0.0, PI][rng.random_range(0..4)];
            let turn = if rng.random_bool(0.5) { FRAC_PI_2 } else { -FRAC_PI_2 };
            let radius = rng.random_range(5.0..=9.0);
            let before = rng.random_range(0.1..=0.3);
            let arc = radius * FRAC_PI_2;
            // finish the turn by 90% of the sequence
            let v = rng.random_range(4.0..=8.0_f64).max(arc / ((0.9 - before) * duration.max(cfg.dt)));
            let d0 = before * v * duration;
            let turn_at = Vec3::new(rng.random_range(-6.0..=6.0), h, layout.crossing_z + rng.random_range(-4.0..=4.0));
            let p0 = turn_at - heading(start_yaw) * d0;
            let k = turn.signum() / radius;
            let end_yaw = start_yaw + turn;
            let arc_end =
                turn_at + Vec3::new((start_yaw.cos() - end_yaw.cos()) / k, 0.0, (end_yaw.sin() - start_yaw.sin()) / k);
            times
                .map(|t| {
                    let s = v * t;
                    if s <= d0 {
                        ObjectPose { position: p0 + heading(start_yaw) * s, yaw: wrap_angle(start_yaw) }
                    } else if s <= d0 + arc {
                        let yaw = start_yaw + k * (s - d0);
                        let offset =
                            Vec3::new((start_yaw.cos() - yaw.cos()) / k, 0.0, (yaw.sin() - start_yaw.sin()) / k);
                        ObjectPose { position: turn_at + offset, yaw: wrap_angle(yaw) }
                    } else {
                        ObjectPose { position: arc_end + heading(end_yaw) * (s - d0 - arc), yaw: wrap_angle(end_yaw) }
                    }
                })
                .collect()
        }
    }
}

fn sample_object(cfg: &SimConfig, layout: &Layout, model: &ShapeModel, id: u64, rng: &mut ChaCha8Rng) -> SimObject {
    let template = cfg.templates.pick(rng);
    let mut lambda = [0.0; SHAPE_BASIS_LEN];
    for l in &mut lambda {
        *l = gauss(rng, 1.0).clamp(-2.5, 2.5);
    }
    let dims = shape_dims(&reconstruct_shape(model, &lambda).expect("basis length"));
    let psi = unit_vector(rng, cfg.descriptor_len);
    let poses = sample_trajectory(cfg, layout, template, rng);
    SimObject { id, template, lambda, dims, psi, poses }
}

/// Visible frames form one run of at least two frames.
fn contiguous_visibility(boxes: &[Option<BBox<f64>>]) -> bool {
    let first = boxes.iter().position(Option::is_some);
    let last = boxes.iter().rposition(Option::is_some);
    match (first, last) {
        (Some(a), Some(b)) => b > a && boxes[a..=b].iter().all(Option::is_some),
        _ => false,
    }
}

const MAX_ATTEMPTS_PER_OBJECT: usize = 2000;

/// Generates a scene. With `well_separated`, an object that cannot be placed
/// within a fixed number of attempts is left out.
pub fn generate(config: &SimConfig, seed: u64) -> SimScene {
    assert!(config.frames >= 2 && config.objects >= 1, "need at least two frames and one object");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = Layout { crossing_z: rng.random_range(18.0..=28.0) };
    let model = ShapeModel::default_car();
    let mut scene = SimScene {
        seed,
        rig: config.rig,
        camera: camera_path(config),
        objects: Vec::with_capacity(config.objects),
        depth_range: config.depth_range,
        noise: config.noise,
        motion_sigmas: config.motion_sigmas,
    };
    let mut placed: Vec<Vec<Option<BBox<f64>>>> = Vec::new();
    for _ in 0..config.objects {
        let id = scene.objects.len() as u64 + 1;
        if !config.well_separated {
            scene.objects.push(sample_object(config, &layout, &model, id, &mut rng));
            continue;
        }
        for _ in 0..MAX_ATTEMPTS_PER_OBJECT {
            let obj = sample_object(config, &layout, &model, id, &mut rng);
            let boxes: Vec<_> = (0..config.frames).map(|f| scene.visible_box(&obj, f)).collect();
            let clear = contiguous_visibility(&boxes)
                && placed.iter().all(|other| {
                    boxes.iter().zip(other).all(|(a, b)| match (a, b) {
                        (Some(a), Some(b)) => a.iou(b) < config.max_pair_iou,
                        _ => true,
                    })
                });
            if clear {
                placed.push(boxes);
                scene.objects.push(obj);
                break;
            }
        }
    }
    scene
}

fn clutter_detection(
    scene: &SimScene,
    frame: usize,
    model: &ShapeModel,
    psi_len: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Detection<f64>> {
    let rig = &scene.rig;
    for _ in 0..10 {
        let v = rng.random_range(rig.cy + 8.0..rig.image_height);
        let z = rig.fy * rig.h_cam / (v - rig.cy);
        let h = rig.fy * 1.5 / z;
        let w = rig.fx * rng.random_range(1.6..4.0) / z;
        if v - h < 0.0 || w >= rig.image_width {
            continue;
        }
        let u = rng.random_range(w / 2.0..rig.image_width - w / 2.0);
        let score = rng.random_range(scene.noise.score_range.0..=scene.noise.score_range.1);
        let mut lambda = [0.0; SHAPE_BASIS_LEN];
        for l in &mut lambda {
            *l = gauss(rng, 1.0).clamp(-2.5, 2.5);
        }
        let features = ObjectFeatures {
            psi: unit_vector(rng, psi_len),
            lambda,
            omega: Vec3::new(0.0, rng.random_range(-PI..PI), 0.0),
            dims: shape_dims(&reconstruct_shape(model, &lambda).expect("basis length")),
        };
        return Some(Detection::new(frame, BBox::new(u - w / 2.0, v - h, w, h), score).with_features(features));
    }
    None
}

/// Renders detections and ground truth. Ground truth is taken before any
/// noise, dropout or clutter is applied.
pub fn render(scene: &SimScene) -> RenderedScene {
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    rng.set_stream(1);
    let noise = scene.noise;
    let model = ShapeModel::default_car();
    let psi_len = scene.objects.first().map_or(8, |o| o.psi.len());
    let mut frames = Vec::with_capacity(scene.frames());
    let mut truth = Vec::with_capacity(scene.frames());
    let mut gt = Vec::new();

    for f in 0..scene.frames() {
        let mut dets: Vec<(Detection<f64>, Option<u64>)> = Vec::new();
        for obj in &scene.objects {
            let Some(b) = scene.visible_box(obj, f) else { continue };
            gt.push(LabeledBox { frame: f, id: obj.id, bbox: b });
            if noise.dropout > 0.0 && rng.random_bool(noise.dropout.min(1.0)) {
                continue;
            }
            let s = noise.pixel_sigma;
            let (l, t) = (b.x + gauss(&mut rng, s), b.y + gauss(&mut rng, s));
            let (r, btm) = (b.right() + gauss(&mut rng, s), b.bottom() + gauss(&mut rng, s));
            if r - l < 1.0 || btm - t < 1.0 {
                continue;
            }
            let bbox = if s == 0.0 { b } else { BBox::from_corners(l, t, r, btm) };
            let (_, yaw) = scene.object_in_camera(obj, f);
            let mut lambda = obj.lambda;
            for x in &mut lambda {
                *x += gauss(&mut rng, noise.lambda_sigma);
            }
            let features = ObjectFeatures {
                psi: obj.psi.iter().map(|&x| x + gauss(&mut rng, noise.psi_sigma)).collect(),
                lambda,
                omega: Vec3::new(0.0, wrap_angle(yaw + gauss(&mut rng, noise.omega_sigma)), 0.0),
                dims: Vec3::from_array(obj.dims.to_array().map(|d| (d + gauss(&mut rng, noise.dims_sigma)).max(0.1))),
            };
            let score = rng.random_range(noise.score_range.0..=noise.score_range.1);
            dets.push((Detection::new(f, bbox, score).with_features(features), Some(obj.id)));
        }
        if noise.clutter_rate > 0.0 {
            let n = Poisson::new(noise.clutter_rate).expect("positive rate").sample(&mut rng) as usize;
            for _ in 0..n {
                if let Some(d) = clutter_detection(scene, f, &model, psi_len, &mut rng) {
                    dets.push((d, None));
                }
            }
        }
        dets.shuffle(&mut rng);
        let (d, t): (Vec<_>, Vec<_>) = dets.into_iter().unzip();
        frames.push(d);
        truth.push(t);
    }
    let bundle = SequenceBundle { frames, rig: scene.rig, motions: scene.motions(), gt: Some(gt) };
    RenderedScene { bundle, truth }
}

/// Writes a rendered scene in the layout read by
/// [`SequenceBundle::load`](crate::kitti_io::SequenceBundle::load).
pub fn write_scene(dir: &Path, scene: &SimScene, rendered: &RenderedScene) -> Result<(), IoError> {
    let b = &rendered.bundle;
    write_sequence(dir, &b.frames, &b.rig, &scene.camera, b.gt.as_deref())
}
