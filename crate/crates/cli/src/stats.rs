use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Per-round mean over runs and the half-width of its 95% interval.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSeries {
    pub mean: Vec<f64>,
    pub halfwidth: Vec<f64>,
}

/// Mean and `1.96 * s / sqrt(n)` of one sample, with `s` the sample
/// standard deviation (`n - 1` denominator); the half-width is 0 for a
/// single value.
pub fn mean_halfwidth(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * var.sqrt() / n.sqrt())
}

/// Aggregates equally long per-run series round by round.
pub fn aggregate_runs(series: &[Vec<f64>]) -> Result<MeanSeries> {
    let Some(first) = series.first() else {
        bail!("no runs to aggregate");
    };
    if let Some(bad) = series.iter().position(|s| s.len() != first.len()) {
        bail!(
            "ragged series: run 0 has {} rounds, run {bad} has {}",
            first.len(),
            series[bad].len()
        );
    }
    let mut out = MeanSeries::default();
    for round in 0..first.len() {
        let column: Vec<f64> = series.iter().map(|s| s[round]).collect();
        let (m, h) = mean_halfwidth(&column);
        out.mean.push(m);
        out.halfwidth.push(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_runs_have_no_spread() {
        let s = vec![vec![0.5, 0.7, 0.9]; 5];
        let agg = aggregate_runs(&s).unwrap();
        assert_eq!(agg.halfwidth, vec![0.0; 3]);
        assert_eq!(agg.mean, vec![0.5, 0.7, 0.9]);
    }

    #[test]
    fn two_point_formula() {
        let agg = aggregate_runs(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(agg.mean, vec![0.5]);
        // s = 1/sqrt(2), n = 2
        assert!((agg.halfwidth[0] - 0.98).abs() < 1e-12);
    }

    #[test]
    fn single_run_and_errors() {
        assert_eq!(aggregate_runs(&[vec![0.3]]).unwrap().halfwidth, vec![0.0]);
        assert!(aggregate_runs(&[]).is_err());
        assert!(aggregate_runs(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
