//! SVG overlays of results against ground truth, one file per frame, plus a
//! plot of how many track ids are live in each frame.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use roadtrack::kitti_io::read_calib;
use roadtrack::LabeledBox;

use crate::error::CliError;
use crate::eval::load_boxes;
use crate::write_file;

pub const SUMMARY_FILE: &str = "summary.svg";

#[derive(Debug, Args)]
pub struct OverlayArgs {
    /// Tracking results file
    #[arg(long)]
    pub results: PathBuf,
    /// Ground-truth label file, drawn dashed
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Output directory
    #[arg(long, short)]
    pub out: PathBuf,
    /// Calibration file to take the image size from
    #[arg(long)]
    pub calib: Option<PathBuf>,
    #[arg(long, default_value_t = 1242.0)]
    pub width: f64,
    #[arg(long, default_value_t = 375.0)]
    pub height: f64,
}

/// Stable colour for a track id: the id is mixed with a fixed integer hash
/// and mapped to a hue.
pub fn id_color(id: u64) -> String {
    let mut z = id.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let hue = (z % 360) as f64;
    let (r, g, b) = hsv_to_rgb(hue, 0.85, 0.95);
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| ((t + m) * 255.0).round() as u8;
    (q(r), q(g), q(b))
}

fn by_frame(boxes: &[LabeledBox<f64>]) -> BTreeMap<usize, Vec<&LabeledBox<f64>>> {
    let mut m: BTreeMap<usize, Vec<&LabeledBox<f64>>> = BTreeMap::new();
    for b in boxes {
        m.entry(b.frame).or_default().push(b);
    }
    for v in m.values_mut() {
        v.sort_by_key(|b| b.id);
    }
    m
}

pub fn frame_svg(
    frame: usize,
    results: &[&LabeledBox<f64>],
    gt: &[&LabeledBox<f64>],
    width: f64,
    height: f64,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#202020"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="8" y="20" fill="#ffffff" font-family="monospace" font-size="14">frame {frame}</text>"##
    );
    for b in gt {
        let r = b.bbox;
        let _ = writeln!(
            s,
            r##"<rect class="gt" data-id="{}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#ffffff" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            b.id, r.x, r.y, r.w, r.h
        );
    }
    for b in results {
        let r = b.bbox;
        let color = id_color(b.id);
        let _ = writeln!(
            s,
            r#"<rect class="track" data-id="{}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            b.id, r.x, r.y, r.w, r.h
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}" font-family="monospace" font-size="12">{}</text>"#,
            r.x,
            (r.y - 3.0).max(12.0),
            b.id
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Line plot of distinct result ids per frame over `0..=last_frame`.
pub fn summary_svg(counts: &[usize]) -> String {
    let (w, h, pad) = (800.0, 300.0, 40.0);
    let n = counts.len().max(2);
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let x = |i: usize| pad + (w - 2.0 * pad) * i as f64 / (n - 1) as f64;
    let y = |c: usize| h - pad - (h - 2.0 * pad) * c as f64 / top;
    let mut pts: Vec<String> = counts.iter().enumerate().map(|(i, &c)| format!("{:.2},{:.2}", x(i), y(c))).collect();
    if counts.len() < 2 {
        let c = counts.first().copied().unwrap_or(0);
        pts = vec![format!("{:.2},{:.2}", x(0), y(c)), format!("{:.2},{:.2}", x(1), y(c))];
    }
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<path d="M{pad},{pad} V{} H{}" fill="none" stroke="#000000"/>"##, h - pad, w - pad);
    let _ = writeln!(s, r#"<text x="{pad}" y="{}" font-family="sans-serif" font-size="12">frame</text>"#, h - 10.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-family="sans-serif" font-size="12">ids ({top})</text>"#, pad - 8.0);
    let _ = writeln!(
        s,
        r##"<polyline class="ids" points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

pub fn frame_file(frame: usize) -> String {
    format!("frame_{frame:06}.svg")
}

/// Writes one SVG per frame that has result boxes, plus the summary plot.
/// Returns the number of frame files written.
pub fn write_overlays(
    results: &[LabeledBox<f64>],
    gt: &[LabeledBox<f64>],
    out: &Path,
    width: f64,
    height: f64,
) -> Result<usize, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::output(out, e))?;
    let res = by_frame(results);
    let truth = by_frame(gt);
    for (&frame, boxes) in &res {
        let g = truth.get(&frame).map(Vec::as_slice).unwrap_or(&[]);
        write_file(&out.join(frame_file(frame)), &frame_svg(frame, boxes, g, width, height))?;
    }
    let last = res.keys().chain(truth.keys()).max().copied();
    let counts: Vec<usize> = match last {
        Some(l) => {
            (0..=l).map(|f| res.get(&f).map_or(0, |v| v.iter().map(|b| b.id).collect::<BTreeSet<_>>().len())).collect()
        }
        None => vec![0],
    };
    write_file(&out.join(SUMMARY_FILE), &summary_svg(&counts))?;
    Ok(res.len())
}

pub fn run(args: &OverlayArgs) -> Result<(), CliError> {
    let results = load_boxes(&args.results)?;
    let gt = match &args.gt {
        Some(p) => load_boxes(p)?,
        None => Vec::new(),
    };
    let (width, height) = match &args.calib {
        Some(p) if !p.exists() => return Err(CliError::MissingInput(p.clone())),
        Some(p) => {
            let rig = read_calib::<f64>(p)?;
            (rig.image_width, rig.image_height)
        }
        None => (args.width, args.height),
    };
    if !(width > 0.0 && height > 0.0) {
        return Err(CliError::Usage("image size must be positive".into()));
    }
    let n = write_overlays(&results, &gt, &args.out, width, height)?;
    println!("{n} frames -> {}", args.out.display());
    Ok(())
}
