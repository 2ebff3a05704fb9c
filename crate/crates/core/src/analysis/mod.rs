//! Agreement and stability statistics.
//!
//! Covers Pearson correlation between score series, the two discordance
//! rates (per-comparison against the final tournament ranking, and per-run
//! against the mean-score ranking), score distribution summaries, and the
//! Monte Carlo stability experiment over the synthetic judge.
//!
//! Discordance uses a strict tie rule: a pair counts as discordant whenever
//! the three-valued signs disagree, including a tie on one side against a
//! strict ordering on the other. Rates are exact ratios with no intermediate
//! rounding.

mod stability;

pub use stability::{simulate_stability, SeedOutcome, StabilityParams, StabilityReport};

use crate::aggregate::{EssayStats, GradeSheet};
use crate::corpus::{EssayId, GradeBand};
use crate::protocols::{RunSet, VerdictMatrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const ANALYSIS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("correlation undefined: series {0} is constant")]
    ConstantSeries(String),
}

/// Three-valued sign used by every discordance rule.
pub fn sign3(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Render a rate as a percentage with one decimal, rounding half-up.
pub fn render_rate_percent(rate: f64) -> String {
    format!("{:.1}%", (rate * 1000.0).round() / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub series_x_label: String,
    pub series_y_label: String,
    pub n: usize,
    pub r: f64,
}

/// Sample Pearson correlation between two equal-length series.
///
/// Requires at least 3 paired samples and non-constant series; degenerate
/// inputs error rather than produce NaN.
pub fn pearson(
    x: &[f64],
    y: &[f64],
    x_label: &str,
    y_label: &str,
) -> Result<CorrelationResult, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::Contract(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(AnalysisError::Contract(format!(
            "correlation needs at least 3 paired samples, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(AnalysisError::ConstantSeries(x_label.to_string()));
    }
    if var_y == 0.0 {
        return Err(AnalysisError::ConstantSeries(y_label.to_string()));
    }
    Ok(CorrelationResult {
        series_x_label: x_label.to_string(),
        series_y_label: y_label.to_string(),
        n: x.len(),
        r: cov / (var_x.sqrt() * var_y.sqrt()),
    })
}

/// A discordance measurement.
///
/// `discordant` is a count of pair instances; for the per-run variant it is
/// the mean instances per run and may be fractional. The rate is always
/// exactly `discordant / total`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordanceResult {
    pub discordant: f64,
    pub total: usize,
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_run_rates: Option<Vec<f64>>,
}

impl DiscordanceResult {
    pub fn from_counts(discordant: f64, total: usize) -> Self {
        DiscordanceResult {
            discordant,
            total,
            rate: discordant / total as f64,
            per_run_rates: None,
        }
    }
}

/// Fraction of pairwise verdicts whose sign disagrees with the final grade
/// ordering derived from the same matrix.
pub fn discordance_pairwise(
    matrix: &VerdictMatrix,
    grades: &GradeSheet,
) -> Result<DiscordanceResult, AnalysisError> {
    let grade_of: BTreeMap<&EssayId, f64> = grades
        .grades
        .iter()
        .map(|g| (&g.essay_id, g.grade))
        .collect();
    for id in &matrix.essay_ids {
        if !grade_of.contains_key(id) {
            return Err(AnalysisError::Contract(format!(
                "grade missing for essay {id}"
            )));
        }
    }
    let n = matrix.essay_ids.len();
    let total = n * (n - 1) / 2;
    if matrix.verdicts.len() != total {
        return Err(AnalysisError::Contract(format!(
            "matrix has {} verdicts but a complete round robin needs {total}",
            matrix.verdicts.len()
        )));
    }
    let mut discordant = 0usize;
    for verdict in &matrix.verdicts {
        let grade_gap = grade_of[&verdict.pair.0] - grade_of[&verdict.pair.1];
        if sign3(verdict.value as f64) != sign3(grade_gap) {
            discordant += 1;
        }
    }
    Ok(DiscordanceResult::from_counts(discordant as f64, total))
}

/// For each run, the fraction of essay pairs ordered differently by that
/// run's totals than by the mean totals; the headline rate is the mean of
/// the per-run rates.
pub fn discordance_per_run(
    runsets: &[RunSet],
    final_stats: &[EssayStats],
) -> Result<DiscordanceResult, AnalysisError> {
    if runsets.len() < 2 {
        return Err(AnalysisError::Contract(
            "per-run discordance needs at least 2 essays".to_string(),
        ));
    }
    let repeats = runsets[0].reports.len();
    if repeats == 0 || runsets.iter().any(|r| r.reports.len() != repeats) {
        return Err(AnalysisError::Contract(
            "all run sets must share one non-zero repeat count".to_string(),
        ));
    }
    let mean_of: BTreeMap<&EssayId, f64> = final_stats
        .iter()
        .map(|s| (&s.essay_id, s.mean))
        .collect();
    for runset in runsets {
        if !mean_of.contains_key(&runset.essay_id) {
            return Err(AnalysisError::Contract(format!(
                "final stats missing for essay {}",
                runset.essay_id
            )));
        }
    }

    let n = runsets.len();
    let total = n * (n - 1) / 2;
    let mut per_run_rates = Vec::with_capacity(repeats);
    for run in 0..repeats {
        let mut discordant = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&runsets[i], &runsets[j]);
                let run_gap = a.reports[run].total - b.reports[run].total;
                let mean_gap = mean_of[&a.essay_id] - mean_of[&b.essay_id];
                if sign3(run_gap) != sign3(mean_gap) {
                    discordant += 1;
                }
            }
        }
        per_run_rates.push(discordant as f64 / total as f64);
    }
    let rate = per_run_rates.iter().sum::<f64>() / repeats as f64;
    Ok(DiscordanceResult {
        discordant: rate * total as f64,
        total,
        rate,
        per_run_rates: Some(per_run_rates),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub bins: Vec<HistogramBin>,
    /// Grades strictly below the pass threshold.
    pub below_pass: usize,
    /// Grades strictly above the distinction threshold.
    pub above_distinction: usize,
}

/// Exact min, max, and mean of a grade or score series, a unit-width
/// histogram, and the pass/distinction counts against the band.
pub fn distribution_summary(values: &[f64], band: &GradeBand) -> DistributionSummary {
    assert!(!values.is_empty(), "distribution of an empty series");
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;

    let origin = min.floor();
    let bin_count = ((max.floor() - origin) as usize) + 1;
    let mut bins: Vec<HistogramBin> = (0..bin_count)
        .map(|i| HistogramBin {
            lo: origin + i as f64,
            hi: origin + (i + 1) as f64,
            count: 0,
        })
        .collect();
    for &value in values {
        let index = ((value.floor() - origin) as usize).min(bin_count - 1);
        bins[index].count += 1;
    }

    DistributionSummary {
        n: values.len(),
        min,
        max,
        mean,
        bins,
        below_pass: values.iter().filter(|v| **v < band.pass_threshold).count(),
        above_distinction: values
            .iter()
            .filter(|v| **v > band.distinction_threshold)
            .count(),
    }
}

/// The analysis artifact persisted as `analysis.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub run_id: String,
    pub protocol: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationResult>,
    pub distribution: DistributionSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discordance_pairwise: Option<DiscordanceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discordance_per_run: Option<DiscordanceResult>,
}

/// Plot-ready CSV of one value per essay.
pub fn distribution_csv(rows: &[(EssayId, f64)]) -> String {
    let mut out = String::from("essay_id,value\n");
    for (id, value) in rows {
        out.push_str(&format!("{id},{value}\n"));
    }
    out
}

/// Plot-ready CSV of paired series per essay.
pub fn correlation_csv(rows: &[(EssayId, f64, f64)], x_label: &str, y_label: &str) -> String {
    let sanitize = |s: &str| s.replace([',', '\n'], " ");
    let mut out = format!("essay_id,{},{}\n", sanitize(x_label), sanitize(y_label));
    for (id, x, y) in rows {
        out.push_str(&format!("{id},{x},{y}\n"));
    }
    out
}
