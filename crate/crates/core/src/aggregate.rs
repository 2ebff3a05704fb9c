//! Deterministic scoring math: repeat averaging, tournament sums,
//! normalization over the theoretical attainable range, and grade-band
//! mapping.
//!
//! Normalization uses the theoretical range `[-2(n-1), +2(n-1)]` rather than
//! the observed min and max, so tournament extremes map strictly inside the
//! grade band unless an essay wins or loses every comparison clearly.
//!
//! All operations are pure functions over immutable inputs.

use crate::corpus::{EssayId, GradeBand};
use crate::protocols::{RunSet, VerdictMatrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("contract violation: {0}")]
    Contract(String),
}

/// Spread of one essay's run totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssayStats {
    pub essay_id: EssayId,
    pub min: f64,
    pub max: f64,
    /// Arithmetic mean at full precision; render with [`round2`] for display.
    pub mean: f64,
    pub values: Vec<f64>,
}

/// One essay's final grade with the intermediate tournament quantities when
/// the pairwise protocol produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeEntry {
    pub essay_id: EssayId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<f64>,
    pub grade: f64,
}

/// Where a grade sheet came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeProvenance {
    pub run_id: String,
    pub normalization: String,
    pub repeats: u32,
}

/// Per-essay final grades for one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeSheet {
    pub protocol: String,
    pub band: GradeBand,
    pub grades: Vec<GradeEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub stats: Vec<EssayStats>,
    pub provenance: GradeProvenance,
}

impl GradeSheet {
    pub fn grade_of(&self, essay_id: &EssayId) -> Option<f64> {
        self.grades
            .iter()
            .find(|g| &g.essay_id == essay_id)
            .map(|g| g.grade)
    }
}

/// Round half-up to 2 decimals, the rendering used for reported grades.
pub fn round2(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

/// Per-essay min, max, and mean over run totals.
///
/// The mean sums values in sorted order, so permuting the runs can never
/// change the result, not even in the last floating-point bit.
pub fn average_scores(runsets: &[RunSet]) -> Result<Vec<EssayStats>, AggregateError> {
    let mut out = Vec::with_capacity(runsets.len());
    for runset in runsets {
        if runset.reports.is_empty() {
            return Err(AggregateError::Contract(format!(
                "empty run set for essay {}",
                runset.essay_id
            )));
        }
        let values: Vec<f64> = runset.reports.iter().map(|r| r.total).collect();
        let mut ordered = values.clone();
        ordered.sort_by(f64::total_cmp);
        let min = ordered[0];
        let max = ordered[ordered.len() - 1];
        let mean = ordered.iter().sum::<f64>() / ordered.len() as f64;
        out.push(EssayStats {
            essay_id: runset.essay_id.clone(),
            min,
            max,
            mean,
            values,
        });
    }
    Ok(out)
}

/// Sum each essay's awarded points across all its comparisons.
///
/// For a verdict on pair (a, b) with value v, essay a receives v and essay b
/// receives -v; the sums over a complete matrix always total zero.
pub fn tournament_sums(
    matrix: &VerdictMatrix,
) -> Result<BTreeMap<EssayId, i64>, AggregateError> {
    let missing = matrix.missing_pairs();
    if !missing.is_empty() {
        let listed: Vec<String> = missing
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        return Err(AggregateError::Contract(format!(
            "incomplete matrix, missing pairs: {}",
            listed.join(", ")
        )));
    }
    let mut sums: BTreeMap<EssayId, i64> =
        matrix.essay_ids.iter().map(|id| (id.clone(), 0)).collect();
    for verdict in &matrix.verdicts {
        let ((a, award_a), (b, award_b)) = verdict.awards();
        *sums.get_mut(&a).expect("verdict ids in matrix") += award_a;
        *sums.get_mut(&b).expect("verdict ids in matrix") += award_b;
    }
    Ok(sums)
}

/// Normalize a tournament sum into [0, 1] over the theoretical attainable
/// range `[-2(n-1), +2(n-1)]`.
pub fn normalize_sum(sum: i64, n: usize) -> Result<f64, AggregateError> {
    if n < 2 {
        return Err(AggregateError::Contract(format!(
            "normalization needs at least 2 essays, got {n}"
        )));
    }
    let extent = 2 * (n as i64 - 1);
    if sum.abs() > extent {
        return Err(AggregateError::Contract(format!(
            "sum {sum} outside the attainable range [-{extent}, {extent}]"
        )));
    }
    Ok((sum + extent) as f64 / (2 * extent) as f64)
}

/// Map a normalized score onto the grade band: `floor + (ceiling - floor) * x`.
pub fn grade_from_normalized(x: f64, band: &GradeBand) -> Result<f64, AggregateError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(AggregateError::Contract(format!(
            "normalized score {x} outside [0, 1]"
        )));
    }
    Ok(band.floor + (band.ceiling - band.floor) * x)
}

/// Grade every essay of a complete verdict matrix: tournament sums, then
/// normalization, then the band mapping.
pub fn grade_pairwise(
    matrix: &VerdictMatrix,
    band: &GradeBand,
    provenance: GradeProvenance,
) -> Result<GradeSheet, AggregateError> {
    let sums = tournament_sums(matrix)?;
    let n = matrix.essay_ids.len();
    let mut grades = Vec::with_capacity(n);
    for id in &matrix.essay_ids {
        let sum = sums[id];
        let normalized = normalize_sum(sum, n)?;
        let grade = grade_from_normalized(normalized, band)?;
        grades.push(GradeEntry {
            essay_id: id.clone(),
            sum: Some(sum),
            normalized: Some(normalized),
            grade,
        });
    }
    Ok(GradeSheet {
        protocol: "pairwise".to_string(),
        band: *band,
        grades,
        stats: Vec::new(),
        provenance,
    })
}

/// Grade sheet for a scoring protocol: each essay's grade is its mean total.
pub fn grade_scoring(
    protocol: &str,
    stats: &[EssayStats],
    band: &GradeBand,
    provenance: GradeProvenance,
) -> GradeSheet {
    let grades = stats
        .iter()
        .map(|s| GradeEntry {
            essay_id: s.essay_id.clone(),
            sum: None,
            normalized: None,
            grade: s.mean,
        })
        .collect();
    GradeSheet {
        protocol: protocol.to_string(),
        band: *band,
        grades,
        stats: stats.to_vec(),
        provenance,
    }
}
