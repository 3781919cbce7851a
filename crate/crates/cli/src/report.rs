use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use anyhow::{bail, Result};

use crate::metrics::{read_summary, SUMMARY_JSON};
use crate::stats::mean_halfwidth;
use crate::sweep::{read_sweep, SWEEP_CSV};

/// One line of the aggregated report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportLine {
    pub config_id: String,
    pub runs: usize,
    pub final_accuracy: f64,
    pub halfwidth: f64,
}

/// Collects final accuracies from `summary.json` / `sweep.csv` files (or
/// directories containing them) and aggregates them per configuration.
pub fn collect(paths: &[impl AsRef<Path>]) -> Result<Vec<ReportLine>> {
    let mut finals: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for p in paths {
        let p = p.as_ref();
        let mut found = false;
        for (file, is_summary) in [(SUMMARY_JSON, true), (SWEEP_CSV, false)] {
            let candidate = if p.is_dir() { p.join(file) } else { p.to_path_buf() };
            if !candidate.is_file() || candidate.file_name() != Some(file.as_ref()) {
                continue;
            }
            found = true;
            if is_summary {
                for c in read_summary(&candidate)?.configs {
                    let runs = finals.entry(c.config_id).or_default();
                    for r in c.runs {
                        runs.insert(r.run, r.final_accuracy);
                    }
                }
            } else {
                for row in read_sweep(&candidate)? {
                    finals.entry(row.config_id).or_default().insert(row.run, row.final_accuracy);
                }
            }
        }
        if !found {
            bail!("{}: no {SUMMARY_JSON} or {SWEEP_CSV}", p.display());
        }
    }
    Ok(finals
        .into_iter()
        .map(|(config_id, runs)| {
            let values: Vec<f64> = runs.into_values().collect();
            let (mean, hw) = mean_halfwidth(&values);
            ReportLine {
                config_id,
                runs: values.len(),
                final_accuracy: mean,
                halfwidth: hw,
            }
        })
        .collect())
}

pub fn render(lines: &[ReportLine]) -> String {
    let width = lines.iter().map(|l| l.config_id.len()).max().unwrap_or(0).max(9);
    let mut out = format!("{:<width$}  runs  final accuracy\n", "config_id");
    for l in lines {
        let _ = writeln!(
            out,
            "{:<width$}  {:>4}  {:.4} ± {:.4}",
            l.config_id, l.runs, l.final_accuracy, l.halfwidth
        );
    }
    out
}
