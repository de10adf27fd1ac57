use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use roadtrack::kitti_io::format_results;
use roadtrack::{SequenceBundle, SequenceTracker, Track, TrackerConfig};

use crate::config::{resolve_inputs, FileConfig, InputArgs, Tuning};
use crate::error::CliError;
use crate::write_file;

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// TOML config file; flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub inputs: InputArgs,
    /// Results file (KITTI tracking format)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Per-frame timing CSV [default: <output>.timing.csv]
    #[arg(long)]
    pub timing_log: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

/// One row of the timing log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    pub frame: usize,
    pub detections: usize,
    pub rows: usize,
    pub cols: usize,
    pub evaluated: usize,
    pub ms: f64,
}

/// Runs the tracker over a loaded sequence, timing each frame.
pub fn track_bundle(bundle: &SequenceBundle<f64>, config: &TrackerConfig<f64>) -> (Vec<Track<f64>>, Vec<FrameTiming>) {
    let mut seq = SequenceTracker::new(bundle.rig, *config);
    let mut log = Vec::with_capacity(bundle.frames.len());
    for (f, dets) in bundle.frames.iter().enumerate() {
        let motion = f.checked_sub(1).map(|k| bundle.motions[k]);
        let start = Instant::now();
        let stats = seq.push_frame(dets, motion);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        log.push(FrameTiming {
            frame: f,
            detections: dets.len(),
            rows: stats.rows,
            cols: stats.cols,
            evaluated: stats.evaluated,
            ms,
        });
    }
    (seq.finish(), log)
}

pub fn format_timing(log: &[FrameTiming]) -> String {
    let mut out = String::from("frame,detections,rows,cols,evaluated,ms\n");
    for t in log {
        let _ = writeln!(out, "{},{},{},{},{},{:.4}", t.frame, t.detections, t.rows, t.cols, t.evaluated, t.ms);
    }
    out
}

fn default_timing_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".timing.csv");
    output.with_file_name(name)
}

pub fn run(args: &TrackArgs) -> Result<(), CliError> {
    let file = FileConfig::load_opt(args.config.as_deref())?;
    let tuning = args.tuning.over(&file.tuning);
    let config = tuning.tracker()?;
    let paths = resolve_inputs(&args.inputs, &file)?;
    let output = args
        .output
        .clone()
        .or(file.output.clone())
        .ok_or_else(|| CliError::Usage("no output given; pass --output".into()))?;
    let timing_path =
        args.timing_log.clone().or(file.timing_log.clone()).unwrap_or_else(|| default_timing_path(&output));

    let (ts, rs) = tuning.motion_sigmas();
    let bundle = SequenceBundle::load(&paths, ts, rs)?;
    let (tracks, log) = track_bundle(&bundle, &config);

    write_file(&output, &format_results(&tracks))?;
    write_file(&timing_path, &format_timing(&log))?;
    let mean = if log.is_empty() { 0.0 } else { log.iter().map(|t| t.ms).sum::<f64>() / log.len() as f64 };
    println!("{} frames, {} tracks, {:.3} ms/frame -> {}", log.len(), tracks.len(), mean, output.display());
    Ok(())
}
