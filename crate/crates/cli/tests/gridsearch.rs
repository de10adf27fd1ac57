use roadtrack::sim::{generate, render, NoiseConfig, SimConfig};
use roadtrack::TrackerConfig;
use roadtrack_cli::gridsearch::{grid_search, DEFAULT_SPLITS};

#[test]
fn full_costs_beat_appearance_only_in_cross_validation() {
    let cfg = SimConfig { noise: NoiseConfig::noisy(2.0, 0.1, 1.0), ..SimConfig::default() };
    let app_only = [0.0, 0.0, 1.0, 0.0];
    let full = TrackerConfig::<f64>::default().cost.weights.weights();
    let grid = [app_only, full];
    let mut full_wins = 0;
    for seed in 0..20u64 {
        let seqs: Vec<_> = (0..4).map(|i| render(&generate(&cfg, 1000 + 4 * seed + i)).bundle).collect();
        let (best, rows) = grid_search(&seqs, &grid, &TrackerConfig::default(), DEFAULT_SPLITS).unwrap();
        assert_eq!(rows.len(), 2);
        full_wins += (best == 1) as usize;
    }
    assert!(full_wins >= 18, "full costs chosen on {full_wins}/20 seeds");
}
