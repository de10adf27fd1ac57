//! Cross-validated search over the four cue weights.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use roadtrack::evaluation::{boxes_from_tracks, DEFAULT_IOU_MIN};
use roadtrack::{run_sequence, score, SequenceBundle, SequencePaths, TrackerConfig};

use crate::config::{with_weights, FileConfig, Tuning};
use crate::error::CliError;
use crate::write_file;

pub const DEFAULT_SPLITS: usize = 4;
pub const DEFAULT_STEP: f64 = 0.25;

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Sequence directories, each with ground truth
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    /// TOML config file; flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SPLITS)]
    pub splits: usize,
    /// Spacing of the weight simplex grid
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// CSV of weight rows `w_3d2d,w_3d3d,w_app,w_shape` used instead of
    /// the simplex grid
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Write the full grid table here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

/// Cross-validation result for one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub weights: [f64; 4],
    pub fold_mota: Vec<f64>,
    pub mean_mota: f64,
    /// False positives summed over every sequence.
    pub fp: usize,
}

/// All weight vectors on the simplex whose entries are multiples of `step`,
/// in lexicographic order.
pub fn simplex_grid(step: f64) -> Result<Vec<[f64; 4]>, CliError> {
    let n = (1.0 / step).round();
    if !(step > 0.0) || n < 1.0 || (n * step - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!("grid step {step} must divide 1")));
    }
    let n = n as usize;
    let mut grid = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                let d = n - a - b - c;
                grid.push([a, b, c, d].map(|k| k as f64 / n as f64));
            }
        }
    }
    Ok(grid)
}

pub fn parse_grid(text: &str) -> Result<Vec<[f64; 4]>, CliError> {
    let mut grid = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('w') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("grid line {}: expected four numbers", i + 1)))?;
        let w: [f64; 4] =
            vals.try_into().map_err(|_| CliError::Usage(format!("grid line {}: expected four numbers", i + 1)))?;
        grid.push(w);
    }
    Ok(grid)
}

/// Splits sequences into `splits` folds with similar object totals:
/// largest sequences first, each into the fold with the fewest objects so
/// far (then the fewest sequences, then the lowest index). Folds list
/// sequence indices in increasing order.
pub fn balanced_folds(object_counts: &[usize], splits: usize) -> Result<Vec<Vec<usize>>, CliError> {
    if splits < 2 {
        return Err(CliError::Usage("cross validation needs at least 2 splits".into()));
    }
    if object_counts.len() < splits {
        return Err(CliError::InsufficientSequences { found: object_counts.len(), splits });
    }
    let mut order: Vec<usize> = (0..object_counts.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(object_counts[i]), i));
    let mut folds = vec![Vec::new(); splits];
    let mut load = vec![0usize; splits];
    for i in order {
        let k = (0..splits).min_by_key(|&k| (load[k], folds[k].len(), k)).expect("splits > 0");
        folds[k].push(i);
        load[k] += object_counts[i];
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Error counts of one sequence under one config.
#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    errors: usize,
    fp: usize,
    gt: usize,
}

fn sequence_counts(bundle: &SequenceBundle<f64>, config: &TrackerConfig<f64>, iou_min: f64) -> Counts {
    let gt = bundle.gt.as_deref().unwrap_or(&[]);
    let tracks = run_sequence(&bundle.frames, &bundle.motions, &bundle.rig, config).expect("bundle is consistent");
    let hyp = boxes_from_tracks(&tracks);
    match score(gt, &hyp, iou_min) {
        Ok(r) => Counts { errors: r.fn_ + r.fp + r.ids, fp: r.fp, gt: r.gt_count },
        Err(_) => Counts { errors: hyp.len(), fp: hyp.len(), gt: 0 },
    }
}

/// Evaluates every grid point on every fold and returns the table together
/// with the index of the winner: highest mean fold MOTA, then fewest false
/// positives, then the lexicographically smallest weights. A fold's MOTA
/// pools the error and ground-truth counts of its sequences.
pub fn grid_search(
    sequences: &[SequenceBundle<f64>],
    grid: &[[f64; 4]],
    base: &TrackerConfig<f64>,
    splits: usize,
) -> Result<(usize, Vec<GridRow>), CliError> {
    if grid.is_empty() {
        return Err(CliError::Usage("weight grid is empty".into()));
    }
    let counts: Vec<usize> =
        sequences.iter().map(|s| s.gt.iter().flatten().map(|b| b.id).collect::<BTreeSet<_>>().len()).collect();
    let folds = balanced_folds(&counts, splits)?;
    let configs: Vec<TrackerConfig<f64>> = grid.iter().map(|w| with_weights(base, *w)).collect::<Result<_, _>>()?;

    let rows: Vec<GridRow> = configs
        .par_iter()
        .zip(grid)
        .map(|(config, w)| {
            let per_seq: Vec<Counts> = sequences.iter().map(|s| sequence_counts(s, config, DEFAULT_IOU_MIN)).collect();
            let fold_mota: Vec<f64> = folds
                .iter()
                .map(|f| {
                    let (e, g) = f.iter().fold((0, 0), |(e, g), &i| (e + per_seq[i].errors, g + per_seq[i].gt));
                    if g == 0 {
                        f64::NAN
                    } else {
                        1.0 - e as f64 / g as f64
                    }
                })
                .collect();
            let mean_mota = fold_mota.iter().sum::<f64>() / fold_mota.len() as f64;
            GridRow { weights: *w, fold_mota, mean_mota, fp: per_seq.iter().map(|c| c.fp).sum() }
        })
        .collect();
    if rows[0].mean_mota.is_nan() {
        return Err(CliError::Eval(roadtrack::EvalError::EmptyGroundTruth));
    }

    let best = (0..rows.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (&rows[a], &rows[b]);
            rb.mean_mota
                .total_cmp(&ra.mean_mota)
                .then(ra.fp.cmp(&rb.fp))
                .then(ra.weights.partial_cmp(&rb.weights).expect("finite weights"))
        })
        .expect("grid is non-empty");
    Ok((best, rows))
}

pub fn format_table(rows: &[GridRow]) -> String {
    let folds = rows.first().map_or(0, |r| r.fold_mota.len());
    let mut out = String::from("w_3d2d,w_3d3d,w_app,w_shape");
    for k in 0..folds {
        let _ = write!(out, ",mota_fold{k}");
    }
    out.push_str(",mean_mota,fp\n");
    for r in rows {
        let w = r.weights;
        let _ = write!(out, "{},{},{},{}", w[0], w[1], w[2], w[3]);
        for m in &r.fold_mota {
            let _ = write!(out, ",{m:.6}");
        }
        let _ = writeln!(out, ",{:.6},{}", r.mean_mota, r.fp);
    }
    out
}

fn load_sequence(dir: &Path, tuning: &Tuning) -> Result<SequenceBundle<f64>, CliError> {
    let mut paths = SequencePaths::in_dir(dir);
    for p in [&paths.detections, &paths.calib, &paths.poses, paths.gt.as_ref().expect("in_dir sets gt")] {
        if !p.exists() {
            return Err(CliError::MissingInput(p.clone()));
        }
    }
    paths.features = paths.features.filter(|p| p.exists());
    let (ts, rs) = tuning.motion_sigmas();
    Ok(SequenceBundle::load(&paths, ts, rs)?)
}

pub fn run(args: &GridArgs) -> Result<(), CliError> {
    let file = FileConfig::load_opt(args.config.as_deref())?;
    let tuning = args.tuning.over(&file.tuning);
    let base = tuning.tracker()?;
    let grid = match &args.grid {
        Some(p) if !p.exists() => return Err(CliError::MissingInput(p.clone())),
        Some(p) => {
            parse_grid(&std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?)?
        }
        None => simplex_grid(args.step)?,
    };
    if args.sequences.len() < args.splits {
        return Err(CliError::InsufficientSequences { found: args.sequences.len(), splits: args.splits });
    }
    let sequences: Vec<SequenceBundle<f64>> =
        args.sequences.iter().map(|d| load_sequence(d, &tuning)).collect::<Result<_, _>>()?;
    let (best, rows) = grid_search(&sequences, &grid, &base, args.splits)?;

    let table = format_table(&rows);
    match &args.output {
        Some(p) => write_file(p, &table)?,
        None => print!("{table}"),
    }
    let b = &rows[best];
    println!(
        "best: w_3d2d={} w_3d3d={} w_app={} w_shape={} mean_mota={:.6}",
        b.weights[0], b.weights[1], b.weights[2], b.weights[3], b.mean_mota
    );
    Ok(())
}
