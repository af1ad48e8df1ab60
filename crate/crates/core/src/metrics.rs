//! Statistical post-processing shared by analytic sweeps and simulation
//! output: empirical CDFs, fairness, binomial confidence intervals,
//! distribution distances, and relative-loss tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A statistic could not be formed from the given sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("empty sample set")]
    EmptySamples,
    #[error("all samples are zero; fairness is undefined")]
    AllZeroSamples,
}

/// Right-continuous empirical CDF: sorted distinct sample values paired
/// with the fraction of samples at or below each.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let q = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = q,
            _ => out.push((x, q)),
        }
    }
    Ok(out)
}

/// Jain's fairness index (Σx)²/(n·Σx²): 1 for perfectly equal shares,
/// 1/n when one participant holds everything.
pub fn jain_index(capacities: &[f64]) -> Result<f64, MetricsError> {
    if capacities.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    assert!(
        capacities.iter().all(|&x| x >= 0.0),
        "capacities must be non-negative"
    );
    let sum: f64 = capacities.iter().sum();
    let sum_sq: f64 = capacities.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(MetricsError::AllZeroSamples);
    }
    Ok(sum * sum / (capacities.len() as f64 * sum_sq))
}

/// Wilson score interval for a binomial proportion at normal quantile
/// `z`, clamped to [0, 1].
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    assert!(successes <= trials, "more successes than trials");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let radius = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - radius).max(0.0), (center + radius).min(1.0))
}

/// [`wilson_interval`] at the two-sided 95% level.
pub fn wilson_interval_95(successes: u64, trials: u64) -> (f64, f64) {
    wilson_interval(successes, trials, 1.959_963_984_540_054)
}

/// Kolmogorov–Smirnov statistic of a sample against a reference CDF,
/// sup over the sample points of the gap on either side of each step.
pub fn ks_statistic(samples: &[f64], reference: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = reference(x);
        worst = worst
            .max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs());
    }
    worst
}

/// Total-variation distance between an observed histogram over 0..len and
/// a model pmf, charging the model's tail mass beyond the histogram to
/// the distance.
pub fn total_variation_histogram(counts: &[u64], pmf: impl Fn(u64) -> f64) -> f64 {
    let total: u64 = counts.iter().sum();
    assert!(total > 0, "histogram holds no observations");
    let n = total as f64;
    let mut sum_abs = 0.0;
    let mut model_mass = 0.0;
    for (value, &count) in counts.iter().enumerate() {
        let q = pmf(value as u64);
        model_mass += q;
        sum_abs += (count as f64 / n - q).abs();
    }
    0.5 * (sum_abs + (1.0 - model_mass).max(0.0))
}

/// Min/max relative loss of one capacity column against k = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCell {
    pub min_loss: f64,
    pub max_loss: f64,
}

/// Relative capacity losses versus single connectivity, per failure model
/// row and connectivity column, min/max over a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    /// The k values of the columns (typically 2..=5).
    pub k_values: Vec<u32>,
    /// (row label, one cell per k column).
    pub rows: Vec<(String, Vec<LossCell>)>,
}

/// Min/max over `sweep` of 1 − C(k, s)/C(1, s) for each k in `k_values`.
/// C(1, s) must be strictly positive at every sweep point.
pub fn loss_row(
    capacity: impl Fn(u32, f64) -> f64,
    k_values: &[u32],
    sweep: &[f64],
) -> Vec<LossCell> {
    assert!(!sweep.is_empty(), "loss row needs at least one sweep point");
    k_values
        .iter()
        .map(|&k| {
            let mut min_loss = f64::INFINITY;
            let mut max_loss = f64::NEG_INFINITY;
            for &s in sweep {
                let base = capacity(1, s);
                assert!(
                    base > 0.0,
                    "single-connectivity capacity must be positive at sweep point {s}"
                );
                let loss = 1.0 - capacity(k, s) / base;
                min_loss = min_loss.min(loss);
                max_loss = max_loss.max(loss);
            }
            LossCell { min_loss, max_loss }
        })
        .collect()
}

impl LossTable {
    pub fn new(k_values: Vec<u32>) -> Self {
        LossTable {
            k_values,
            rows: Vec::new(),
        }
    }

    /// Appends a row computed by [`loss_row`] from the given capacity map.
    pub fn push_row(
        &mut self,
        label: impl Into<String>,
        capacity: impl Fn(u32, f64) -> f64,
        sweep: &[f64],
    ) {
        let cells = loss_row(capacity, &self.k_values, sweep);
        self.rows.push((label.into(), cells));
    }

    /// CSV with one `min/max` pair of columns per k.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["model".to_string()];
        for k in &self.k_values {
            header.push(format!("min_loss_k{k}"));
            header.push(format!("max_loss_k{k}"));
        }
        w.write_record(&header)?;
        for (label, cells) in &self.rows {
            let mut record = vec![label.clone()];
            for c in cells {
                record.push(format!("{:.6}", c.min_loss));
                record.push(format!("{:.6}", c.max_loss));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned plain-text rendering, losses in percent.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<14}", "model"));
        for k in &self.k_values {
            out.push_str(&format!("{:>16}", format!("k={k} (min/max %)")));
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(&format!("{label:<14}"));
            for c in cells {
                out.push_str(&format!(
                    "{:>16}",
                    format!("{:.1}/{:.1}", 100.0 * c.min_loss, 100.0 * c.max_loss)
                ));
            }
            out.push('\n');
        }
        out
    }
}
