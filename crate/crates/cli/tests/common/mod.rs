#![allow(dead_code)]

use std::path::Path;

use fednod::config::{DatasetSource, ExperimentConfig};
use fednod::pipeline::RunSummary;
use fednod_data::SynthSpec;

/// Small synthetic DDD-2D experiment that trains in well under a second
/// per round.
pub fn small_config(n_per_class: usize, rounds: usize, runs: usize, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        rounds,
        runs,
        dataset: DatasetSource::Synthetic(SynthSpec::new(n_per_class, 64, 0.05)),
        output_dir: out.to_path_buf(),
        master_seed: 11,
        ..ExperimentConfig::default()
    };
    c.hyper.batch_size = 8;
    c
}

/// Summary with wall-clock fields zeroed.
pub fn without_times(s: &RunSummary) -> RunSummary {
    RunSummary {
        wall_time_s: 0.0,
        round_wall_time_s: vec![0.0; s.round_wall_time_s.len()],
        ..s.clone()
    }
}

pub fn confusion_total(c: &[[u64; 3]; 3]) -> u64 {
    c.iter().flatten().sum()
}

pub fn confusion_trace(c: &[[u64; 3]; 3]) -> u64 {
    (0..3).map(|i| c[i][i]).sum()
}

/// Plain two-pass mean and 95% normal-approximation halfwidth built on
/// `statrs`, kept separate from the crate's own implementation.
pub fn reference_interval(values: &[f64]) -> (f64, f64) {
    use statrs::statistics::Statistics;
    let mean = values.iter().copied().mean();
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sd = values.iter().copied().std_dev();
    (mean, 1.96 * sd / (values.len() as f64).sqrt())
}
