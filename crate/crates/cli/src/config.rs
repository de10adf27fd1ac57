//! Run configuration: command-line flags layered over an optional TOML file.
//!
//! Every key is optional in both places. A flag always wins over the same
//! key in the file, which wins over the built-in default. Relative paths in
//! the file are taken relative to the file's directory.
//!
//! ```toml
//! seq = "data/0001"          # standard file names inside a sequence dir
//! output = "out/0001.txt"
//! w_3d2d = 0.35
//! w_3d3d = 0.35
//! w_app = 0.2
//! w_shape = 0.1
//! hold_frames = 1
//! ```

use std::path::{Path, PathBuf};

use clap::Args;
use roadtrack::geometry::camera::{DEFAULT_ROT_SIGMA, DEFAULT_TRANS_SIGMA};
use roadtrack::{CostWeights, SequencePaths, TrackerConfig};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub seq: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub calib: Option<PathBuf>,
    pub poses: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub timing_log: Option<PathBuf>,
    pub tuning: Tuning,
}

const PATH_KEYS: [&str; 8] = ["seq", "detections", "features", "calib", "poses", "gt", "output", "timing_log"];

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.exists() {
            return Err(CliError::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.seq,
            &mut cfg.detections,
            &mut cfg.features,
            &mut cfg.calib,
            &mut cfg.poses,
            &mut cfg.gt,
            &mut cfg.output,
            &mut cfg.timing_log,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        let mut paths: [Option<PathBuf>; 8] = Default::default();
        for (slot, key) in paths.iter_mut().zip(PATH_KEYS) {
            *slot = match table.remove(key) {
                Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
                Some(_) => return Err(format!("`{key}` must be a string")),
                None => None,
            };
        }
        let tuning: Tuning =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| e.message().to_string())?;
        let [seq, detections, features, calib, poses, gt, output, timing_log] = paths;
        Ok(Self { seq, detections, features, calib, poses, gt, output, timing_log, tuning })
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// Tracker and evaluation knobs shared by the file and the flags.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Tuning {
    /// Weight of the projected-region vs. box overlap cost
    #[arg(long)]
    pub w_3d2d: Option<f64>,
    /// Weight of the road-plane footprint overlap cost
    #[arg(long)]
    pub w_3d3d: Option<f64>,
    /// Weight of the appearance cost
    #[arg(long)]
    pub w_app: Option<f64>,
    /// Weight of the shape and pose cost
    #[arg(long)]
    pub w_shape: Option<f64>,
    /// Combined costs above this are never associated
    #[arg(long)]
    pub gate_cost: Option<f64>,
    /// Pixel standard deviation of a detection with score 1
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Detections scoring below this are dropped
    #[arg(long)]
    pub min_score: Option<f64>,
    /// IoU above which the weaker of two detections is suppressed
    #[arg(long)]
    pub nms_iou: Option<f64>,
    /// Frames a track may go unmatched before it ends
    #[arg(long)]
    pub hold_frames: Option<usize>,
    /// Ego-motion translation uncertainty (meters)
    #[arg(long)]
    pub trans_sigma: Option<f64>,
    /// Ego-motion rotation uncertainty (radians)
    #[arg(long)]
    pub rot_sigma: Option<f64>,
    /// Maximise the number of matches instead of pricing unmatched boxes
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub max_cardinality: Option<bool>,
}

impl Tuning {
    /// `self` where set, otherwise `fallback`.
    pub fn over(&self, fallback: &Tuning) -> Tuning {
        Tuning {
            w_3d2d: self.w_3d2d.or(fallback.w_3d2d),
            w_3d3d: self.w_3d3d.or(fallback.w_3d3d),
            w_app: self.w_app.or(fallback.w_app),
            w_shape: self.w_shape.or(fallback.w_shape),
            gate_cost: self.gate_cost.or(fallback.gate_cost),
            sigma0: self.sigma0.or(fallback.sigma0),
            min_score: self.min_score.or(fallback.min_score),
            nms_iou: self.nms_iou.or(fallback.nms_iou),
            hold_frames: self.hold_frames.or(fallback.hold_frames),
            trans_sigma: self.trans_sigma.or(fallback.trans_sigma),
            rot_sigma: self.rot_sigma.or(fallback.rot_sigma),
            max_cardinality: self.max_cardinality.or(fallback.max_cardinality),
        }
    }

    pub fn tracker(&self) -> Result<TrackerConfig<f64>, CliError> {
        let mut cfg = TrackerConfig::<f64>::default();
        let w = &mut cfg.cost.weights;
        w.w_3d2d = self.w_3d2d.unwrap_or(w.w_3d2d);
        w.w_3d3d = self.w_3d3d.unwrap_or(w.w_3d3d);
        w.w_app = self.w_app.unwrap_or(w.w_app);
        w.w_shape = self.w_shape.unwrap_or(w.w_shape);
        w.gate_cost = self.gate_cost.unwrap_or(w.gate_cost);
        w.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        cfg.cost.sigma0 = self.sigma0.unwrap_or(cfg.cost.sigma0);
        cfg.min_score = self.min_score.unwrap_or(cfg.min_score);
        cfg.nms_iou = self.nms_iou.unwrap_or(cfg.nms_iou);
        cfg.hold_frames = self.hold_frames.unwrap_or(cfg.hold_frames);
        cfg.price_unmatched = !self.max_cardinality.unwrap_or(false);
        if !(cfg.cost.sigma0 > 0.0) {
            return Err(CliError::Usage("sigma0 must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn motion_sigmas(&self) -> (f64, f64) {
        (self.trans_sigma.unwrap_or(DEFAULT_TRANS_SIGMA), self.rot_sigma.unwrap_or(DEFAULT_ROT_SIGMA))
    }
}

/// Tracker config with the four cue weights replaced.
pub fn with_weights(base: &TrackerConfig<f64>, w: [f64; 4]) -> Result<TrackerConfig<f64>, CliError> {
    let mut cfg = *base;
    cfg.cost.weights = CostWeights { w_3d2d: w[0], w_3d3d: w[1], w_app: w[2], w_shape: w[3], ..base.cost.weights };
    cfg.cost.weights.validate().map_err(|e| CliError::Usage(format!("weights {w:?}: {e}")))?;
    Ok(cfg)
}

/// Input file flags of a single sequence.
#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// Sequence directory holding detections.csv, features.csv, calib.txt,
    /// poses.txt and gt.txt
    #[arg(long)]
    pub seq: Option<PathBuf>,
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub calib: Option<PathBuf>,
    #[arg(long)]
    pub poses: Option<PathBuf>,
}

/// Resolved input paths. Features stay optional unless named explicitly.
pub fn resolve_inputs(flags: &InputArgs, file: &FileConfig) -> Result<SequencePaths, CliError> {
    let from_seq =
        |name: &str| flags.seq.as_ref().map(|d| d.join(name)).or_else(|| file.seq.as_ref().map(|d| d.join(name)));
    let pick = |flag: &Option<PathBuf>, key: &Option<PathBuf>, name: &str, what: &str| {
        flag.clone()
            .or_else(|| flags.seq.as_ref().map(|d| d.join(name)))
            .or_else(|| key.clone())
            .or_else(|| from_seq(name))
            .ok_or_else(|| CliError::Usage(format!("no {what} given; pass --{what} or --seq")))
    };
    let paths = SequencePaths {
        detections: pick(&flags.detections, &file.detections, SequencePaths::DETECTIONS, "detections")?,
        calib: pick(&flags.calib, &file.calib, SequencePaths::CALIB, "calib")?,
        poses: pick(&flags.poses, &file.poses, SequencePaths::POSES, "poses")?,
        features: None,
        gt: None,
    };
    for p in [&paths.detections, &paths.calib, &paths.poses] {
        if !p.exists() {
            return Err(CliError::MissingInput(p.clone()));
        }
    }
    let features = match flags.features.clone().or_else(|| file.features.clone()) {
        Some(p) if !p.exists() => return Err(CliError::MissingInput(p)),
        Some(p) => Some(p),
        None => from_seq(SequencePaths::FEATURES).filter(|p| p.exists()),
    };
    Ok(SequencePaths { features, ..paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = FileConfig::parse("w_app = 0.5\nhold_frames = 3\nmin_score = 0.2\n").unwrap();
        let flags = Tuning { hold_frames: Some(1), ..Tuning::default() };
        let t = flags.over(&file.tuning);
        assert_eq!((t.hold_frames, t.min_score, t.w_app), (Some(1), Some(0.2), Some(0.5)));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(FileConfig::parse("w_apps = 0.5\n").is_err());
        assert_eq!(FileConfig::parse("seq = \"a/b\"\n").unwrap().seq, Some(PathBuf::from("a/b")));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let t = Tuning { w_app: Some(0.9), ..Tuning::default() };
        assert!(matches!(t.tracker(), Err(CliError::Usage(_))));
        let t =
            Tuning { w_3d2d: Some(0.0), w_3d3d: Some(0.0), w_app: Some(1.0), w_shape: Some(0.0), ..Tuning::default() };
        assert_eq!(t.tracker().unwrap().cost.weights.weights(), [0.0, 0.0, 1.0, 0.0]);
    }
}
