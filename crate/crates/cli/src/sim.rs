use std::path::PathBuf;

use clap::Args;
use roadtrack::sim::{generate, render, write_scene, NoiseConfig, SimConfig};

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Output directory; with several sequences each goes to seq_NNNN inside
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of sequences, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    pub sequences: usize,
    #[arg(long, default_value_t = 50)]
    pub frames: usize,
    #[arg(long, default_value_t = 10)]
    pub objects: usize,
    #[arg(long, default_value_t = 3)]
    pub lanes: usize,
    /// Pixel noise on box corners
    #[arg(long, default_value_t = 0.0)]
    pub pixel_sigma: f64,
    /// Probability that a visible object is not detected
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    /// Mean number of false detections per frame
    #[arg(long, default_value_t = 0.0)]
    pub clutter: f64,
    /// Slow ego car at a crossing where every object turns
    #[arg(long)]
    pub intersection: bool,
    /// Allow objects to overlap in the image
    #[arg(long)]
    pub overlapping: bool,
}

impl SimArgs {
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        if !(0.0..=1.0).contains(&self.dropout) || !(self.pixel_sigma >= 0.0) || !(self.clutter >= 0.0) {
            return Err(CliError::Usage("noise parameters out of range".into()));
        }
        if self.frames == 0 || self.lanes == 0 {
            return Err(CliError::Usage("--frames and --lanes must be positive".into()));
        }
        let noise = if self.pixel_sigma == 0.0 && self.dropout == 0.0 && self.clutter == 0.0 {
            NoiseConfig::none()
        } else {
            NoiseConfig::noisy(self.pixel_sigma, self.dropout, self.clutter)
        };
        let base = if self.intersection { SimConfig::intersection() } else { SimConfig::default() };
        Ok(SimConfig {
            frames: self.frames,
            objects: self.objects,
            lanes: self.lanes,
            well_separated: !self.overlapping,
            noise,
            ..base
        })
    }
}

pub fn run(args: &SimArgs) -> Result<(), CliError> {
    let cfg = args.sim_config()?;
    for i in 0..args.sequences {
        let dir = if args.sequences == 1 { args.out.clone() } else { args.out.join(format!("seq_{i:04}")) };
        let scene = generate(&cfg, args.seed + i as u64);
        let rendered = render(&scene);
        write_scene(&dir, &scene, &rendered)?;
        let boxes: usize = rendered.bundle.frames.iter().map(Vec::len).sum();
        println!("{}: {} objects, {} detections", dir.display(), scene.objects.len(), boxes);
    }
    Ok(())
}
