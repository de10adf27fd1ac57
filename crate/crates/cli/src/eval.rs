use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use roadtrack::evaluation::DEFAULT_IOU_MIN;
use roadtrack::kitti_io::{car_boxes, read_labels};
use roadtrack::{score, LabeledBox, MOTReport};

use crate::error::CliError;
use crate::write_file;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth label file
    #[arg(long)]
    pub gt: PathBuf,
    /// Tracking results file
    #[arg(long)]
    pub results: PathBuf,
    /// Minimum box IoU for a match
    #[arg(long, default_value_t = DEFAULT_IOU_MIN)]
    pub iou_min: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: ReportFormat,
    /// Also write the report here
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// `Car` boxes of a label or results file.
pub fn load_boxes(path: &Path) -> Result<Vec<LabeledBox<f64>>, CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(path.to_path_buf()));
    }
    Ok(car_boxes(&read_labels(path)?))
}

pub fn render(report: &MOTReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => report.to_kv_string(),
        ReportFormat::Json => report.to_json() + "\n",
    }
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    if !(args.iou_min > 0.0 && args.iou_min <= 1.0) {
        return Err(CliError::Usage("--iou-min must lie in (0, 1]".into()));
    }
    let gt = load_boxes(&args.gt)?;
    let hyp = load_boxes(&args.results)?;
    let report = score(&gt, &hyp, args.iou_min)?;
    let text = render(&report, args.format);
    print!("{text}");
    if let Some(out) = &args.output {
        write_file(out, &text)?;
    }
    Ok(())
}
