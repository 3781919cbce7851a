use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use fednod_core::{Arch, Hyperparameters, SUPPORTED_RESOLUTIONS};
use fednod_data::SynthSpec;
use fednod_federation::FederationConfig;
use serde::{Deserialize, Serialize};

/// Search-space values for each tunable.
pub mod grid {
    pub const LEARNING_RATE: [f64; 6] = [0.0001, 0.001, 0.002, 0.005, 0.01, 0.1];
    pub const MOMENTUM: [f64; 7] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9];
    pub const BATCH_SIZE: [usize; 6] = [2, 8, 16, 32, 64, 128];
    pub const WEIGHT_DECAY: [f64; 6] = [0.0001, 0.001, 0.002, 0.005, 0.01, 0.1];
    pub const NBR_CLIENTS: [usize; 6] = [2, 4, 8, 16, 20, 40];
    pub const SEQUENCE_LENGTH: [usize; 7] = [8, 10, 12, 14, 16, 18, 20];
    pub const FRAME_SKIPPING: [usize; 8] = [2, 3, 4, 5, 6, 8, 10, 12];
}

/// Where frames come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    /// `normal/`, `talking/`, `yawning/` folders of PGM frames.
    Folder(PathBuf),
    Synthetic(SynthSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Arch,
    /// Frames are resized to `resolution x resolution` if needed.
    pub resolution: usize,
    pub nbr_clients: usize,
    pub rounds: usize,
    #[serde(default = "one")]
    pub local_epochs: usize,
    #[serde(default)]
    pub hyper: Hyperparameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_skipping: Option<usize>,
    pub dataset: DatasetSource,
    #[serde(default = "five")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Accept values outside the search space (they are still reported).
    #[serde(default)]
    pub allow_out_of_grid: bool,
}

fn one() -> usize {
    1
}

fn five() -> usize {
    5
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl Default for ExperimentConfig {
    /// DDD-2D, two clients, Adam at lr 0.001 / momentum 0.9 / batch 32 /
    /// weight decay 0.0001, 20 rounds on 500 synthetic frames per class.
    fn default() -> Self {
        ExperimentConfig {
            model: Arch::Ddd2d,
            resolution: 64,
            nbr_clients: 2,
            rounds: 20,
            local_epochs: 1,
            hyper: Hyperparameters::default(),
            sequence_length: None,
            frame_skipping: None,
            dataset: DatasetSource::Synthetic(SynthSpec::new(500, 64, 0.05)),
            runs: 5,
            master_seed: 0,
            output_dir: default_output(),
            allow_out_of_grid: false,
        }
    }
}

fn float_in(v: f64, allowed: &[f64]) -> bool {
    allowed.iter().any(|a| (a - v).abs() <= 1e-12 * a.abs().max(1.0))
}

fn listing<T: Display>(allowed: &[T]) -> String {
    allowed.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn off_grid<T: Display>(name: &str, value: T, allowed: &[T]) -> String {
    format!("{name} = {value} is outside the search space {{{}}}", listing(allowed))
}

/// Checks a hyperparameter assignment against the search space.
pub fn out_of_grid_hyper(h: &Hyperparameters) -> Vec<String> {
    let mut out = Vec::new();
    if !float_in(h.learning_rate, &grid::LEARNING_RATE) {
        out.push(off_grid("learning_rate", h.learning_rate, &grid::LEARNING_RATE));
    }
    if !float_in(h.momentum, &grid::MOMENTUM) {
        out.push(off_grid("momentum", h.momentum, &grid::MOMENTUM));
    }
    if !grid::BATCH_SIZE.contains(&h.batch_size) {
        out.push(off_grid("batch_size", h.batch_size, &grid::BATCH_SIZE));
    }
    if !float_in(h.weight_decay, &grid::WEIGHT_DECAY) {
        out.push(off_grid("weight_decay", h.weight_decay, &grid::WEIGHT_DECAY));
    }
    out
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn federation(&self) -> FederationConfig {
        FederationConfig {
            hyper: self.hyper,
            local_epochs: self.local_epochs,
        }
    }

    /// Values outside the search space, one message each.
    pub fn out_of_grid(&self) -> Vec<String> {
        let mut out = out_of_grid_hyper(&self.hyper);
        if !grid::NBR_CLIENTS.contains(&self.nbr_clients) {
            out.push(off_grid("nbr_clients", self.nbr_clients, &grid::NBR_CLIENTS));
        }
        if let Some(l) = self.sequence_length.filter(|l| !grid::SEQUENCE_LENGTH.contains(l)) {
            out.push(off_grid("sequence_length", l, &grid::SEQUENCE_LENGTH));
        }
        if let Some(s) = self.frame_skipping.filter(|s| !grid::FRAME_SKIPPING.contains(s)) {
            out.push(off_grid("frame_skipping", s, &grid::FRAME_SKIPPING));
        }
        out
    }

    /// Structural checks, then the search-space check unless
    /// `allow_out_of_grid` is set.
    pub fn validate(&self) -> Result<()> {
        ensure!(
            SUPPORTED_RESOLUTIONS.contains(&self.resolution),
            "resolution {} unsupported; expected one of {{{}}}",
            self.resolution,
            listing(&SUPPORTED_RESOLUTIONS)
        );
        ensure!(self.nbr_clients >= 1, "nbr_clients must be at least 1");
        ensure!(self.runs >= 1, "runs must be at least 1");
        self.hyper.validate()?;
        match (self.model, self.sequence_length, self.frame_skipping) {
            (Arch::Ddd2d, None, None) => {}
            (Arch::Ddd2d, _, _) => bail!("sequence_length and frame_skipping apply to DDD-3D only"),
            (Arch::Ddd3d, Some(l), Some(s)) => {
                ensure!(l >= 2, "sequence_length must be at least 2");
                ensure!(s >= 1, "frame_skipping must be at least 1");
            }
            (Arch::Ddd3d, _, _) => bail!("DDD-3D needs both sequence_length and frame_skipping"),
        }
        match &self.dataset {
            DatasetSource::Synthetic(s) => {
                ensure!(s.n_per_class >= 1, "synthetic n_per_class must be at least 1");
                ensure!(s.resolution >= 8, "synthetic resolution must be at least 8");
                ensure!(
                    s.noise_level.is_finite() && s.noise_level >= 0.0,
                    "noise_level must be non-negative"
                );
            }
            DatasetSource::Folder(p) => ensure!(p.is_dir(), "dataset folder {} not found", p.display()),
        }
        let off = self.out_of_grid();
        if !off.is_empty() && !self.allow_out_of_grid {
            bail!("{} (set allow_out_of_grid to run anyway)", off.join("; "));
        }
        Ok(())
    }

    /// File-name-safe identifier built from the tunables.
    pub fn config_id(&self) -> String {
        let h = &self.hyper;
        let mut id = format!(
            "{}_r{}_k{}_lr{}_m{}_b{}_wd{}",
            match self.model {
                Arch::Ddd2d => "ddd2d",
                Arch::Ddd3d => "ddd3d",
            },
            self.resolution,
            self.nbr_clients,
            h.learning_rate,
            h.momentum,
            h.batch_size,
            h.weight_decay
        );
        if let (Some(l), Some(s)) = (self.sequence_length, self.frame_skipping) {
            id.push_str(&format!("_L{l}_s{s}"));
        }
        if self.local_epochs != 1 {
            id.push_str(&format!("_e{}", self.local_epochs));
        }
        id
    }
}
