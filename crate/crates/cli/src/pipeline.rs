use std::time::Instant;

use anyhow::{ensure, Context, Result};
use fednod_core::{build_ddd2d, build_ddd3d, derive_seed, Arch, ModelSpec};
use fednod_data::{
    load_folder_dataset, partition_clients, resize, sequences_from_frames, stratified_split, synth_generate,
    DatasetShard, Example, FrameSample, Label, LoadOptions, SequenceSample,
};
use fednod_federation::{Confusion, RoundReport, Simulation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DatasetSource, ExperimentConfig};

pub const TRAIN_FRACTION: f64 = 0.9;

const DATA_STREAM: u64 = 1;
const SPLIT_STREAM: u64 = 2;
const PARTITION_STREAM: u64 = 3;

/// Seed of run `r`.
pub fn run_seed(config: &ExperimentConfig, run: usize) -> u64 {
    config.master_seed.wrapping_add(run as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Test accuracy after each round.
    pub accuracy: Vec<f64>,
    pub loss: Vec<f64>,
    pub round_wall_time_s: Vec<f64>,
    /// After the last round, or of the initial model when no round ran.
    pub final_accuracy: f64,
    pub final_loss: f64,
    pub final_confusion: Confusion,
    pub wall_time_s: f64,
}

/// A frame for DDD-2D or a clip for DDD-3D.
#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    Frame(FrameSample),
    Clip(SequenceSample),
}

impl Example for Sample {
    fn label(&self) -> Label {
        match self {
            Sample::Frame(f) => f.label(),
            Sample::Clip(c) => c.label(),
        }
    }

    fn item_shape(&self) -> Vec<usize> {
        match self {
            Sample::Frame(f) => f.item_shape(),
            Sample::Clip(c) => c.item_shape(),
        }
    }

    fn write_input(&self, out: &mut [f32]) {
        match self {
            Sample::Frame(f) => f.write_input(out),
            Sample::Clip(c) => c.write_input(out),
        }
    }

    fn video_id(&self) -> &str {
        match self {
            Sample::Frame(f) => f.video_id(),
            Sample::Clip(c) => c.video_id(),
        }
    }
}

/// Everything a run trains and evaluates on.
pub struct Prepared<E> {
    pub spec: ModelSpec,
    pub shards: Vec<DatasetShard<E>>,
    pub test: Vec<E>,
}

pub fn model_spec(config: &ExperimentConfig) -> Result<ModelSpec> {
    Ok(match config.model {
        Arch::Ddd2d => build_ddd2d(config.resolution)?,
        Arch::Ddd3d => build_ddd3d(config.resolution, config.sequence_length.context("sequence_length missing")?)?,
    })
}

/// Frames for one run: folder datasets are the same for every run,
/// synthetic ones are regenerated from the run seed.
pub fn load_frames(config: &ExperimentConfig, seed: u64) -> Result<Vec<FrameSample>> {
    let res = config.resolution;
    let frames = match &config.dataset {
        DatasetSource::Folder(root) => {
            let loaded = load_folder_dataset(root, LoadOptions { resize_to: Some(res) })?;
            for e in &loaded.errors {
                log::warn!("skipped {}: {}", e.path.display(), e.reason);
            }
            log::info!("loaded {} frames from {}", loaded.count(), root.display());
            loaded.samples
        }
        DatasetSource::Synthetic(spec) => {
            let frames = synth_generate(spec, derive_seed(seed, &[DATA_STREAM]));
            if spec.resolution == res {
                frames
            } else {
                frames
                    .into_par_iter()
                    .map(|f| {
                        let img = resize(&f.pixels, res, res)?;
                        Ok(FrameSample::new(img, f.label, f.video_id, f.frame_index))
                    })
                    .collect::<Result<_>>()?
            }
        }
    };
    Ok(frames)
}

/// Items for the configured model (frames, or clips of `sequence_length`
/// frames every `frame_skipping` frames), split 90:10 per class and dealt
/// to the clients.
pub fn prepare(config: &ExperimentConfig, frames: &[FrameSample], seed: u64) -> Result<Prepared<Sample>> {
    let items: Vec<Sample> = match config.model {
        Arch::Ddd2d => frames.iter().cloned().map(Sample::Frame).collect(),
        Arch::Ddd3d => {
            let (l, s) = (
                config.sequence_length.context("sequence_length missing")?,
                config.frame_skipping.context("frame_skipping missing")?,
            );
            let clips = sequences_from_frames(frames, l, s);
            ensure!(!clips.is_empty(), "no video is long enough for {l} frames every {s}");
            log::debug!("assembled {} clips of {l} frames (skip {s})", clips.len());
            clips.into_iter().map(Sample::Clip).collect()
        }
    };
    let (train, test) = stratified_split(&items, TRAIN_FRACTION, derive_seed(seed, &[SPLIT_STREAM]))?;
    let shards = partition_clients(&train, config.nbr_clients, derive_seed(seed, &[PARTITION_STREAM]))?;
    Ok(Prepared {
        spec: model_spec(config)?,
        shards,
        test,
    })
}

pub(crate) fn summarize(
    run: usize,
    seed: u64,
    sizes: (usize, usize),
    reports: &[RoundReport],
    initial: Option<(f64, f64, Confusion)>,
    wall: f64,
) -> RunSummary {
    let (final_accuracy, final_loss, final_confusion) = match reports.last() {
        Some(r) => (r.test_accuracy, r.test_loss, r.confusion),
        None => initial.expect("initial evaluation when no rounds ran"),
    };
    RunSummary {
        run,
        seed,
        n_train: sizes.0,
        n_test: sizes.1,
        accuracy: reports.iter().map(|r| r.test_accuracy).collect(),
        loss: reports.iter().map(|r| r.test_loss).collect(),
        round_wall_time_s: reports.iter().map(|r| r.wall_time_s).collect(),
        final_accuracy,
        final_loss,
        final_confusion,
        wall_time_s: wall,
    }
}

/// Simulated federation over prepared data; returns the summary and the
/// per-round reports.
pub fn simulate<E: Example + Clone>(
    config: &ExperimentConfig,
    prepared: Prepared<E>,
    run: usize,
    seed: u64,
) -> Result<(RunSummary, Vec<RoundReport>)> {
    let started = Instant::now();
    let n_train = prepared.shards.iter().map(|s| s.len()).sum();
    let n_test = prepared.test.len();
    let mut sim = Simulation::new(prepared.spec, prepared.shards, prepared.test, config.federation(), seed)?;
    let initial = if config.rounds == 0 {
        let e = sim.evaluate_global()?;
        Some((e.accuracy, e.loss, e.confusion))
    } else {
        None
    };
    let reports = sim.run(config.rounds)?;
    let summary = summarize(run, seed, (n_train, n_test), &reports, initial, started.elapsed().as_secs_f64());
    Ok((summary, reports))
}

/// One complete run: data, split, partition, federated rounds.
pub fn run_once(config: &ExperimentConfig, run: usize, cached: Option<&[FrameSample]>) -> Result<(RunSummary, Vec<RoundReport>)> {
    let seed = run_seed(config, run);
    let owned;
    let frames = match cached {
        Some(f) => f,
        None => {
            owned = load_frames(config, seed)?;
            &owned[..]
        }
    };
    simulate(config, prepare(config, frames, seed)?, run, seed).with_context(|| format!("run {run} (seed {seed})"))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Run the repetitions concurrently; results are identical because
    /// every run owns its seed.
    pub parallel_runs: bool,
}

/// All runs of one configuration. Configuration and dataset problems are
/// reported before any training starts.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<RunSummary>> {
    config.validate()?;
    for msg in config.out_of_grid() {
        log::warn!("{msg}");
    }
    let cached = match &config.dataset {
        DatasetSource::Folder(_) => Some(load_frames(config, config.master_seed)?),
        DatasetSource::Synthetic(_) => None,
    };
    let one = |r: usize| -> Result<RunSummary> {
        let (summary, _) = run_once(config, r, cached.as_deref())?;
        log::info!(
            "{} run {r}: final accuracy {:.4} in {:.1}s",
            config.config_id(),
            summary.final_accuracy,
            summary.wall_time_s
        );
        Ok(summary)
    };
    if options.parallel_runs {
        (0..config.runs).into_par_iter().map(one).collect()
    } else {
        (0..config.runs).map(one).collect()
    }
}
