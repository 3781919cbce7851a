use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{grid, ExperimentConfig};
use crate::metrics::ensure_writable;
use crate::pipeline::{run_once, run_seed, RunOptions};

pub const SWEEP_CSV: &str = "sweep.csv";

/// Axes to sweep; absent axes keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    pub learning_rate: Option<Vec<f64>>,
    pub momentum: Option<Vec<f64>>,
    pub batch_size: Option<Vec<usize>>,
    pub weight_decay: Option<Vec<f64>>,
    pub nbr_clients: Option<Vec<usize>>,
    pub sequence_length: Option<Vec<usize>>,
    pub frame_skipping: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub base: ExperimentConfig,
    pub axes: Axes,
}

/// One row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_id: String,
    pub run: usize,
    pub seed: u64,
    pub model: String,
    pub nbr_clients: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub sequence_length: Option<usize>,
    pub frame_skipping: Option<usize>,
    pub rounds: usize,
    pub final_accuracy: f64,
    pub final_loss: f64,
    pub wall_time_s: f64,
}

fn check_axis<T: PartialEq + Display + Copy>(
    name: &str,
    values: &Option<Vec<T>>,
    allowed: &[T],
    eq: impl Fn(T, T) -> bool,
) -> Result<()> {
    let Some(values) = values else { return Ok(()) };
    if values.is_empty() {
        bail!("axis {name} is empty");
    }
    for &v in values {
        if !allowed.iter().any(|&a| eq(a, v)) {
            let list: Vec<String> = allowed.iter().map(|a| a.to_string()).collect();
            bail!("axis {name}: {v} is not allowed; allowed values are {{{}}}", list.join(", "));
        }
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

impl GridSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Cartesian product of the axes over the base configuration.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let a = &self.axes;
        if a == &Axes::default() {
            bail!("empty grid: no axis given");
        }
        check_axis("learning_rate", &a.learning_rate, &grid::LEARNING_RATE, close)?;
        check_axis("momentum", &a.momentum, &grid::MOMENTUM, close)?;
        check_axis("batch_size", &a.batch_size, &grid::BATCH_SIZE, |x, y| x == y)?;
        check_axis("weight_decay", &a.weight_decay, &grid::WEIGHT_DECAY, close)?;
        check_axis("nbr_clients", &a.nbr_clients, &grid::NBR_CLIENTS, |x, y| x == y)?;
        check_axis("sequence_length", &a.sequence_length, &grid::SEQUENCE_LENGTH, |x, y| x == y)?;
        check_axis("frame_skipping", &a.frame_skipping, &grid::FRAME_SKIPPING, |x, y| x == y)?;

        let b = &self.base;
        let or = |v: &Option<Vec<f64>>, d: f64| v.clone().unwrap_or_else(|| vec![d]);
        let or_u = |v: &Option<Vec<usize>>, d: usize| v.clone().unwrap_or_else(|| vec![d]);
        let or_opt = |v: &Option<Vec<usize>>, d: Option<usize>| v.as_ref().map_or(vec![d], |v| v.iter().map(|&x| Some(x)).collect());

        let mut out = Vec::new();
        for lr in or(&a.learning_rate, b.hyper.learning_rate) {
            for m in or(&a.momentum, b.hyper.momentum) {
                for bs in or_u(&a.batch_size, b.hyper.batch_size) {
                    for wd in or(&a.weight_decay, b.hyper.weight_decay) {
                        for k in or_u(&a.nbr_clients, b.nbr_clients) {
                            for l in or_opt(&a.sequence_length, b.sequence_length) {
                                for s in or_opt(&a.frame_skipping, b.frame_skipping) {
                                    let mut c = b.clone();
                                    c.hyper.learning_rate = lr;
                                    c.hyper.momentum = m;
                                    c.hyper.batch_size = bs;
                                    c.hyper.weight_decay = wd;
                                    c.nbr_clients = k;
                                    c.sequence_length = l;
                                    c.frame_skipping = s;
                                    c.validate()?;
                                    out.push(c);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `(config_id, run)` pairs already present in a sweep table.
pub fn completed_rows(path: &Path) -> Result<BTreeSet<(String, usize)>> {
    if !path.exists() {
        return Ok(BTreeSet::new());
    }
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize::<SweepRow>()
        .map(|row| {
            let row = row.with_context(|| format!("reading {}", path.display()))?;
            Ok((row.config_id, row.run))
        })
        .collect()
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

/// Runs every (config, run) not yet in `dir/sweep.csv`, appending one row
/// per finished run. Returns the number of rows added.
pub fn sweep(spec: &GridSpec, dir: &Path, options: RunOptions) -> Result<usize> {
    let configs = spec.expand()?;
    ensure_writable(dir)?;
    let path: PathBuf = dir.join(SWEEP_CSV);
    let done = completed_rows(&path)?;
    let fresh = !path.exists();
    let file = OpenOptions::new().create(true).append(true).open(&path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);

    let mut added = 0;
    for config in &configs {
        let id = config.config_id();
        let todo: Vec<usize> = (0..config.runs).filter(|r| !done.contains(&(id.clone(), *r))).collect();
        if todo.is_empty() {
            continue;
        }
        log::info!("{id}: {} of {} runs to do", todo.len(), config.runs);
        let one = |r: &usize| run_once(config, *r, None).map(|(s, _)| s);
        let summaries: Vec<_> = if options.parallel_runs {
            use rayon::prelude::*;
            todo.par_iter().map(one).collect::<Result<_>>()?
        } else {
            todo.iter().map(one).collect::<Result<_>>()?
        };
        for s in summaries {
            writer.serialize(SweepRow {
                config_id: id.clone(),
                run: s.run,
                seed: run_seed(config, s.run),
                model: config.model.to_string(),
                nbr_clients: config.nbr_clients,
                learning_rate: config.hyper.learning_rate,
                momentum: config.hyper.momentum,
                batch_size: config.hyper.batch_size,
                weight_decay: config.hyper.weight_decay,
                sequence_length: config.sequence_length,
                frame_skipping: config.frame_skipping,
                rounds: config.rounds,
                final_accuracy: s.final_accuracy,
                final_loss: s.final_loss,
                wall_time_s: s.wall_time_s,
            })?;
            writer.flush()?;
            added += 1;
        }
    }
    Ok(added)
}
