//! Monte Carlo rank-stability experiment.
//!
//! For each seed the simulator assigns latent qualities to a synthetic
//! corpus, runs both the repeated-scoring and the pairwise protocols through
//! the synthetic judge, and measures each protocol's discordance rate. The
//! comparison of the two mean rates is the stability verdict: lower pairwise
//! discordance means pairwise comparison ranks essays more consistently than
//! repeated scoring does.
//!
//! Qualities are an evenly spaced grid over [0, 1], shuffled per seed, so
//! every seed sees the same quality spacing and differs only in noise and in
//! which essay holds which rank.

use super::{discordance_pairwise, discordance_per_run, AnalysisError};
use crate::aggregate::{average_scores, grade_pairwise, GradeProvenance};
use crate::corpus::{default_levels, default_rubric, Corpus, Essay, EssayId, GradeBand, WorkshopTheme};
use crate::judge::{JudgeBackend, NoiseParams, SyntheticBackend, SyntheticConfig};
use crate::protocols::{ExecutionOptions, Runner};
use rand_chacha::ChaCha12Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const STABILITY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityParams {
    pub n_essays: usize,
    pub repeats: u32,
    pub noise: NoiseParams,
    pub seeds: u32,
    /// Base seed; seed k of the experiment derives from `base_seed + k`.
    pub base_seed: u64,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            n_essays: 22,
            repeats: 6,
            noise: NoiseParams::default(),
            seeds: 20,
            base_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub pairwise_rate: f64,
    pub per_run_rate: f64,
    /// True when every comparison in this seed came out a tie.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub schema_version: u32,
    pub params: StabilityParams,
    pub per_seed: Vec<SeedOutcome>,
    pub mean_pairwise_rate: f64,
    pub mean_per_run_rate: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// Run the stability experiment.
pub fn simulate_stability(params: &StabilityParams) -> Result<StabilityReport, AnalysisError> {
    if params.n_essays < 3 {
        return Err(AnalysisError::Contract(format!(
            "stability simulation needs at least 3 essays, got {}",
            params.n_essays
        )));
    }
    if params.seeds < 1 {
        return Err(AnalysisError::Contract("at least 1 seed required".to_string()));
    }
    if params.repeats < 2 {
        return Err(AnalysisError::Contract(
            "per-run discordance needs at least 2 repeats".to_string(),
        ));
    }

    let corpus = synthetic_corpus(params.n_essays);
    let mut per_seed = Vec::with_capacity(params.seeds as usize);
    let mut warnings = Vec::new();

    for k in 0..params.seeds {
        let seed = params.base_seed.wrapping_add(k as u64);
        let qualities = shuffled_grid_qualities(params.n_essays, seed);
        let mut config = SyntheticConfig::new(seed).with_noise(params.noise);
        for (essay, quality) in corpus.essays.iter().zip(&qualities) {
            config = config.with_quality(essay.essay_id.as_str(), *quality);
        }
        let backend: Arc<dyn JudgeBackend> = Arc::new(SyntheticBackend::new(config));
        let runner = Runner::new(&corpus, backend).with_options(ExecutionOptions {
            parallelism: 1,
            ..ExecutionOptions::default()
        });

        let runsets = runner
            .run_with_rubric(&corpus.rubric, Some(&corpus.levels), params.repeats)
            .map_err(|e| AnalysisError::Contract(format!("scoring pass failed: {e}")))?;
        let stats = average_scores(&runsets)
            .map_err(|e| AnalysisError::Contract(format!("averaging failed: {e}")))?;
        let per_run = discordance_per_run(&runsets, &stats)?;

        let outcome = runner
            .run_pairwise(&corpus.rubric)
            .map_err(|e| AnalysisError::Contract(format!("pairwise pass failed: {e}")))?;
        let degenerate = outcome.matrix.verdicts.iter().all(|v| v.value == 0);
        if degenerate {
            warnings.push(format!(
                "seed {seed}: degenerate noise, every comparison tied"
            ));
        }
        let provenance = GradeProvenance {
            run_id: format!("stability-seed-{seed}"),
            normalization: "theoretical-range".to_string(),
            repeats: 1,
        };
        let grades = grade_pairwise(&outcome.matrix, &GradeBand::default(), provenance)
            .map_err(|e| AnalysisError::Contract(format!("grading failed: {e}")))?;
        let pairwise = discordance_pairwise(&outcome.matrix, &grades)?;

        per_seed.push(SeedOutcome {
            seed,
            pairwise_rate: pairwise.rate,
            per_run_rate: per_run.rate,
            degenerate,
        });
    }

    let mean_pairwise_rate =
        per_seed.iter().map(|s| s.pairwise_rate).sum::<f64>() / per_seed.len() as f64;
    let mean_per_run_rate =
        per_seed.iter().map(|s| s.per_run_rate).sum::<f64>() / per_seed.len() as f64;

    Ok(StabilityReport {
        schema_version: STABILITY_SCHEMA_VERSION,
        params: params.clone(),
        per_seed,
        mean_pairwise_rate,
        mean_per_run_rate,
        warnings,
    })
}

/// Evenly spaced qualities over [0, 1], assigned to essays in a seed-shuffled
/// order.
fn shuffled_grid_qualities(n: usize, seed: u64) -> Vec<f64> {
    let mut qualities: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5157_ab1e);
    // Fisher-Yates.
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        qualities.swap(i, j);
    }
    qualities
}

/// A minimal in-memory corpus for the simulator.
fn synthetic_corpus(n: usize) -> Corpus {
    let theme = WorkshopTheme {
        theme_id: "SIM".to_string(),
        title: "Simulated Workshop".to_string(),
        description: "A placeholder workshop brief used by the stability simulator."
            .to_string(),
    };
    let essays = (1..=n)
        .map(|i| Essay {
            essay_id: EssayId::new(format!("{i:02}")),
            theme_id: "SIM".to_string(),
            project_description: format!("Simulated project section for essay {i}."),
            contribution: format!("Simulated contribution section for essay {i}."),
            reflection: format!("Simulated reflection section for essay {i}."),
        })
        .collect();
    Corpus {
        themes: vec![theme],
        essays,
        rubric: default_rubric(),
        levels: default_levels(),
        human_scores: None,
        warnings: Vec::new(),
    }
}
