use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fednod_data::Label;
use fednod_federation::Confusion;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::pipeline::RunSummary;
use crate::stats::{aggregate_runs, mean_halfwidth, MeanSeries};

pub const ROUNDS_CSV: &str = "rounds.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const ROUNDS_HEADER: &str = "config_id,run,round,accuracy,loss,wall_time_s";

/// All runs of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config_id: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
}

impl ConfigResult {
    pub fn new(config: &ExperimentConfig, runs: Vec<RunSummary>) -> Self {
        ConfigResult {
            config_id: config.config_id(),
            config: config.clone(),
            runs,
        }
    }
}

/// Aggregated view of one configuration as written to `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config_id: String,
    pub config: ExperimentConfig,
    pub out_of_grid: Vec<String>,
    pub accuracy: MeanSeries,
    pub loss: MeanSeries,
    pub final_accuracy_mean: f64,
    pub final_accuracy_halfwidth: f64,
    pub final_loss_mean: f64,
    pub final_loss_halfwidth: f64,
    /// Final confusion matrices of all runs added together.
    pub pooled_confusion: Confusion,
    pub runs: Vec<RunSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub configs: Vec<ConfigSummary>,
}

pub fn summarize(result: &ConfigResult) -> Result<ConfigSummary> {
    let acc: Vec<Vec<f64>> = result.runs.iter().map(|r| r.accuracy.clone()).collect();
    let loss: Vec<Vec<f64>> = result.runs.iter().map(|r| r.loss.clone()).collect();
    let finals: Vec<f64> = result.runs.iter().map(|r| r.final_accuracy).collect();
    let final_losses: Vec<f64> = result.runs.iter().map(|r| r.final_loss).collect();
    let (fa, fah) = mean_halfwidth(&finals);
    let (fl, flh) = mean_halfwidth(&final_losses);
    let mut pooled = Confusion::default();
    for r in &result.runs {
        for (p, c) in pooled.iter_mut().flatten().zip(r.final_confusion.iter().flatten()) {
            *p += c;
        }
    }
    Ok(ConfigSummary {
        config_id: result.config_id.clone(),
        config: result.config.clone(),
        out_of_grid: result.config.out_of_grid(),
        accuracy: aggregate_runs(&acc)?,
        loss: aggregate_runs(&loss)?,
        final_accuracy_mean: fa,
        final_accuracy_halfwidth: fah,
        final_loss_mean: fl,
        final_loss_halfwidth: flh,
        pooled_confusion: pooled,
        runs: result.runs.clone(),
    })
}

/// Fails early if `dir` cannot be created or written.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let probe = dir.join(".fednod-write-test");
    File::create(&probe).with_context(|| format!("{} is not writable", dir.display()))?;
    fs::remove_file(probe)?;
    Ok(())
}

pub fn confusion_csv(confusion: &Confusion) -> String {
    let mut out = String::from("true\\pred");
    for l in Label::ALL {
        out.push(',');
        out.push_str(l.folder());
    }
    out.push('\n');
    for (l, row) in Label::ALL.iter().zip(confusion) {
        out.push_str(l.folder());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parses a file written by [`confusion_csv`].
pub fn read_confusion_csv(path: &Path) -> Result<Confusion> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Confusion::default();
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        anyhow::ensure!(i < 3 && rec.len() == 4, "{}: expected a 3x3 matrix", path.display());
        for j in 0..3 {
            out[i][j] = rec[j + 1].parse()?;
        }
        rows += 1;
    }
    anyhow::ensure!(rows == 3, "{}: expected 3 rows", path.display());
    Ok(out)
}

/// Writes `rounds.csv`, `summary.json`, one `confusion_<config>.csv` per
/// configuration (runs pooled) and one `confusion_<config>_run<r>.csv` per
/// run into `dir`, returning the written paths.
pub fn emit_metrics(results: &[ConfigResult], dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_writable(dir)?;
    let mut written = Vec::new();

    let path = dir.join(ROUNDS_CSV);
    let mut rounds = csv::Writer::from_path(&path)?;
    rounds.write_record(ROUNDS_HEADER.split(','))?;
    for res in results {
        for run in &res.runs {
            for (i, (acc, loss)) in run.accuracy.iter().zip(&run.loss).enumerate() {
                rounds.write_record([
                    res.config_id.clone(),
                    run.run.to_string(),
                    (i + 1).to_string(),
                    acc.to_string(),
                    loss.to_string(),
                    run.round_wall_time_s[i].to_string(),
                ])?;
            }
        }
    }
    rounds.flush()?;
    written.push(path);

    let summary = Summary {
        configs: results.iter().map(summarize).collect::<Result<_>>()?,
    };
    let path = dir.join(SUMMARY_JSON);
    let mut f = File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    written.push(path);

    for s in &summary.configs {
        let path = dir.join(confusion_file(&s.config_id));
        fs::write(&path, confusion_csv(&s.pooled_confusion))?;
        written.push(path);
        for r in &s.runs {
            let path = dir.join(run_confusion_file(&s.config_id, r.run));
            fs::write(&path, confusion_csv(&r.final_confusion))?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn confusion_file(config_id: &str) -> String {
    format!("confusion_{config_id}.csv")
}

pub fn run_confusion_file(config_id: &str, run: usize) -> String {
    format!("confusion_{config_id}_run{run}.csv")
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
