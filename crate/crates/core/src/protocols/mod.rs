//! Protocol runners: unguided repeated scoring, fixed-rubric repeated
//! scoring, and round-robin pairwise comparison.
//!
//! Runners fan backend calls out to a bounded worker pool, but every output
//! is assembled in schedule order, so concurrency never changes results. An
//! unrecoverable call aborts the run with the completed portion persisted for
//! resume; resuming re-dispatches only what is missing.

mod store;

pub use store::{corpus_hash, RunManifest, RunStatus, RunStore, MANIFEST_SCHEMA_VERSION};

use crate::corpus::{Corpus, Essay, EssayId, PerformanceLevels, Rubric};
use crate::judge::{
    build_prompt, parse_comparison_response, parse_score_response, ComparisonVerdict,
    ExpectedRubric, JudgeBackend, JudgeError, Protocol, ScoreReport,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("scoring essay {essay_id} run {run_index} failed: {source}")]
    Score {
        essay_id: EssayId,
        run_index: u32,
        #[source]
        source: JudgeError,
    },
    #[error("comparing ({a}, {b}) failed: {source}")]
    Pair {
        a: EssayId,
        b: EssayId,
        #[source]
        source: JudgeError,
    },
    #[error("run store failure at {path}: {message}")]
    Store { path: PathBuf, message: String },
}

/// All of one essay's repeated score reports for one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSet {
    pub protocol: Protocol,
    pub essay_id: EssayId,
    /// Reports ordered by run index 1..=repeats with no gaps.
    pub reports: Vec<ScoreReport>,
}

/// Complete antisymmetric round-robin outcome: each unordered pair stored
/// once, oriented with the first essay earlier in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictMatrix {
    pub essay_ids: Vec<EssayId>,
    pub verdicts: Vec<ComparisonVerdict>,
}

impl VerdictMatrix {
    pub fn n(&self) -> usize {
        self.essay_ids.len()
    }

    pub fn verdict(&self, a: &EssayId, b: &EssayId) -> Option<&ComparisonVerdict> {
        self.verdicts
            .iter()
            .find(|v| (&v.pair.0, &v.pair.1) == (a, b) || (&v.pair.1, &v.pair.0) == (a, b))
    }

    /// Scheduled pairs that have no verdict yet.
    pub fn missing_pairs(&self) -> Vec<(EssayId, EssayId)> {
        let have: BTreeSet<(&EssayId, &EssayId)> =
            self.verdicts.iter().map(|v| (&v.pair.0, &v.pair.1)).collect();
        match schedule_round_robin(&self.essay_ids) {
            Ok(pairs) => pairs
                .into_iter()
                .filter(|(a, b)| !have.contains(&(a, b)))
                .collect(),
            Err(_) => Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.verdicts.len() == self.n() * (self.n().saturating_sub(1)) / 2
            && self.missing_pairs().is_empty()
    }
}

/// All C(n,2) unordered pairs, each oriented with the earlier essay first,
/// listed in deterministic lexicographic order by corpus position.
pub fn schedule_round_robin(
    essay_ids: &[EssayId],
) -> Result<Vec<(EssayId, EssayId)>, ProtocolError> {
    if essay_ids.len() < 2 {
        return Err(ProtocolError::Contract(format!(
            "round robin needs at least 2 essays, got {}",
            essay_ids.len()
        )));
    }
    let mut ordered = essay_ids.to_vec();
    ordered.sort();
    let mut pairs = Vec::with_capacity(ordered.len() * (ordered.len() - 1) / 2);
    for i in 0..ordered.len() {
        for j in (i + 1)..ordered.len() {
            pairs.push((ordered[i].clone(), ordered[j].clone()));
        }
    }
    Ok(pairs)
}

/// Execution knobs shared by all runners.
#[derive(Debug, Clone)]
pub struct ExecutionOptions {
    /// Upper bound on concurrent backend calls.
    pub parallelism: usize,
    /// Full round-robin passes for pairwise consistency probes.
    pub pairwise_repeats: u32,
    /// Also evaluate each pair with positions swapped, reported separately.
    pub swap_positions: bool,
    /// Reuse partial artifacts from an aborted run in the same store.
    pub resume: bool,
}

impl Default for ExecutionOptions {
    fn default() -> Self {
        ExecutionOptions {
            parallelism: 4,
            pairwise_repeats: 1,
            swap_positions: false,
            resume: false,
        }
    }
}

/// Outcome of a pairwise run: the primary matrix plus any probe passes and
/// the position-swap report, which are never merged into the matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseOutcome {
    pub matrix: VerdictMatrix,
    pub extra_passes: Vec<VerdictMatrix>,
    pub swap_report: Option<SwapReport>,
}

/// Effect of re-judging every pair with essay positions swapped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwapReport {
    pub pairs_total: usize,
    pub verdicts_changed: usize,
    /// (a, b, primary value, swapped-orientation value seen from a).
    pub changed: Vec<(EssayId, EssayId, i8, i8)>,
}

/// Drives one protocol over a corpus against a backend.
pub struct Runner<'a> {
    corpus: &'a Corpus,
    backend: Arc<dyn JudgeBackend>,
    options: ExecutionOptions,
    store: Option<&'a RunStore>,
}

impl<'a> Runner<'a> {
    pub fn new(corpus: &'a Corpus, backend: Arc<dyn JudgeBackend>) -> Self {
        Runner {
            corpus,
            backend,
            options: ExecutionOptions::default(),
            store: None,
        }
    }

    pub fn with_options(mut self, options: ExecutionOptions) -> Self {
        self.options = options;
        self
    }

    /// Persist transcripts and partial artifacts into `store` as the run
    /// progresses.
    pub fn with_store(mut self, store: &'a RunStore) -> Self {
        self.store = Some(store);
        self
    }

    /// Unguided protocol: the judge invents a rubric per run before scoring.
    pub fn run_unguided(&self, repeats: u32) -> Result<Vec<RunSet>, ProtocolError> {
        self.run_scoring(Protocol::Unguided, None, None, repeats)
    }

    /// Fixed-rubric protocol: the same rubric (and optional performance
    /// levels) is embedded in every prompt.
    pub fn run_with_rubric(
        &self,
        rubric: &Rubric,
        levels: Option<&PerformanceLevels>,
        repeats: u32,
    ) -> Result<Vec<RunSet>, ProtocolError> {
        self.run_scoring(Protocol::Rubric, Some(rubric), levels, repeats)
    }

    fn run_scoring(
        &self,
        protocol: Protocol,
        rubric: Option<&Rubric>,
        levels: Option<&PerformanceLevels>,
        repeats: u32,
    ) -> Result<Vec<RunSet>, ProtocolError> {
        if repeats < 1 {
            return Err(ProtocolError::Contract("repeats must be at least 1".to_string()));
        }
        if self.corpus.essays.is_empty() {
            return Err(ProtocolError::Contract("corpus has no essays".to_string()));
        }

        let done: Vec<ScoreReport> = if self.options.resume {
            self.store
                .map(|s| s.read_partial_reports())
                .transpose()?
                .unwrap_or_default()
        } else {
            Vec::new()
        };
        let done_keys: BTreeSet<(EssayId, u32)> = done
            .iter()
            .map(|r| (r.essay_id.clone(), r.run_index))
            .collect();

        let mut jobs: Vec<(&Essay, u32)> = Vec::new();
        for essay in &self.corpus.essays {
            for run_index in 1..=repeats {
                if !done_keys.contains(&(essay.essay_id.clone(), run_index)) {
                    jobs.push((essay, run_index));
                }
            }
        }

        let worker = |job: &(&Essay, u32)| -> Result<ScoreReport, ProtocolError> {
            let (essay, run_index) = *job;
            let theme = self.corpus.theme_for(essay);
            let bundle = build_prompt(protocol, theme, essay, None, rubric, levels)
                .map_err(|source| ProtocolError::Score {
                    essay_id: essay.essay_id.clone(),
                    run_index,
                    source,
                })?
                .with_run_index(run_index);
            let raw = self.dispatch_with_transcript(&bundle).map_err(|source| {
                ProtocolError::Score {
                    essay_id: essay.essay_id.clone(),
                    run_index,
                    source,
                }
            })?;
            let expected = match rubric {
                Some(r) => ExpectedRubric::Fixed(r),
                None => ExpectedRubric::Generated,
            };
            parse_score_response(&raw, expected, &essay.essay_id, run_index).map_err(|source| {
                ProtocolError::Score {
                    essay_id: essay.essay_id.clone(),
                    run_index,
                    source,
                }
            })
        };

        let results = run_pool(&jobs, self.options.parallelism, worker);

        let mut completed = done;
        let mut first_error = None;
        for result in results {
            match result {
                Some(Ok(report)) => completed.push(report),
                Some(Err(e)) if first_error.is_none() => first_error = Some(e),
                _ => {}
            }
        }
        completed.sort_by(|a, b| {
            a.essay_id
                .cmp(&b.essay_id)
                .then(a.run_index.cmp(&b.run_index))
        });

        if let Some(error) = first_error {
            if let Some(store) = self.store {
                store.write_partial_reports(&completed)?;
            }
            return Err(error);
        }

        if let Some(store) = self.store {
            store.clear_partial_reports()?;
        }
        Ok(group_reports(protocol, &self.corpus.essay_ids(), completed))
    }

    /// Pairwise protocol: a complete round robin judged once per pair, plus
    /// optional probe passes and a position-swap audit.
    pub fn run_pairwise(&self, rubric: &Rubric) -> Result<PairwiseOutcome, ProtocolError> {
        if self.options.pairwise_repeats < 1 {
            return Err(ProtocolError::Contract(
                "pairwise repeats must be at least 1".to_string(),
            ));
        }
        let essay_ids = self.corpus.essay_ids();
        let pairs = schedule_round_robin(&essay_ids)?;

        let done: Vec<ComparisonVerdict> = if self.options.resume {
            self.store
                .map(|s| s.read_partial_verdicts())
                .transpose()?
                .unwrap_or_default()
        } else {
            Vec::new()
        };

        let mut all = done;
        for pass in 1..=self.options.pairwise_repeats {
            let fresh = self.pairwise_pass(&pairs, rubric, pass, false, &all)?;
            all.extend(fresh);
        }
        let swap_verdicts = if self.options.swap_positions {
            Some(self.pairwise_pass(&pairs, rubric, SWAP_PASS_BASE, true, &all)?)
        } else {
            None
        };

        let matrix = VerdictMatrix {
            essay_ids: essay_ids.clone(),
            verdicts: pairs
                .iter()
                .map(|(a, b)| {
                    all.iter()
                        .find(|v| v.run_index == 1 && (&v.pair.0, &v.pair.1) == (a, b))
                        .expect("complete pass produced every pair")
                        .clone()
                })
                .collect(),
        };
        let extra_passes = (2..=self.options.pairwise_repeats)
            .map(|pass| VerdictMatrix {
                essay_ids: essay_ids.clone(),
                verdicts: pairs
                    .iter()
                    .map(|(a, b)| {
                        all.iter()
                            .find(|v| v.run_index == pass && (&v.pair.0, &v.pair.1) == (a, b))
                            .expect("complete pass produced every pair")
                            .clone()
                    })
                    .collect(),
            })
            .collect();

        let swap_report = swap_verdicts.map(|swapped| {
            let mut changed = Vec::new();
            for (a, b) in &pairs {
                let primary = matrix.verdict(a, b).expect("complete matrix").value;
                // The swapped pass judged (b, a); seen from a that verdict negates.
                let swapped_value = swapped
                    .iter()
                    .find(|v| (&v.pair.0, &v.pair.1) == (a, b))
                    .map(|v| v.value)
                    .unwrap_or(primary);
                if swapped_value != primary {
                    changed.push((a.clone(), b.clone(), primary, swapped_value));
                }
            }
            SwapReport {
                pairs_total: pairs.len(),
                verdicts_changed: changed.len(),
                changed,
            }
        });

        if let Some(store) = self.store {
            store.clear_partial_verdicts()?;
        }
        Ok(PairwiseOutcome {
            matrix,
            extra_passes,
            swap_report,
        })
    }

    fn pairwise_pass(
        &self,
        pairs: &[(EssayId, EssayId)],
        rubric: &Rubric,
        pass: u32,
        swapped: bool,
        already: &[ComparisonVerdict],
    ) -> Result<Vec<ComparisonVerdict>, ProtocolError> {
        let done: BTreeSet<(&EssayId, &EssayId)> = already
            .iter()
            .filter(|v| v.run_index == pass)
            .map(|v| (&v.pair.0, &v.pair.1))
            .collect();
        let jobs: Vec<&(EssayId, EssayId)> = pairs
            .iter()
            .filter(|(a, b)| !done.contains(&(a, b)))
            .collect();

        let worker = |job: &&(EssayId, EssayId)| -> Result<ComparisonVerdict, ProtocolError> {
            let (a, b) = *job;
            let pair_error = |source: JudgeError| ProtocolError::Pair {
                a: a.clone(),
                b: b.clone(),
                source,
            };
            let essay_a = self.corpus.essay(a).expect("scheduled id in corpus");
            let essay_b = self.corpus.essay(b).expect("scheduled id in corpus");
            let (first, second) = if swapped { (essay_b, essay_a) } else { (essay_a, essay_b) };
            let theme = self.corpus.theme_for(first);
            let bundle = build_prompt(
                Protocol::Pairwise,
                theme,
                first,
                Some(second),
                Some(rubric),
                None,
            )
            .map_err(pair_error)?
            .with_run_index(pass);
            let raw = self.dispatch_with_transcript(&bundle).map_err(pair_error)?;
            let verdict = parse_comparison_response(
                &raw,
                (first.essay_id.clone(), second.essay_id.clone()),
                pass,
            )
            .map_err(pair_error)?;
            // Store canonical orientation (a, b) regardless of prompt order.
            Ok(if swapped {
                ComparisonVerdict {
                    pair: (a.clone(), b.clone()),
                    value: -verdict.value,
                    per_criterion_notes: verdict.per_criterion_notes,
                    run_index: pass,
                }
            } else {
                verdict
            })
        };

        let results = run_pool(&jobs, self.options.parallelism, worker);
        let mut fresh = Vec::new();
        let mut first_error = None;
        for result in results {
            match result {
                Some(Ok(verdict)) => fresh.push(verdict),
                Some(Err(e)) if first_error.is_none() => first_error = Some(e),
                _ => {}
            }
        }
        if let Some(error) = first_error {
            if let Some(store) = self.store {
                let mut partial = already.to_vec();
                partial.extend(fresh);
                store.write_partial_verdicts(&partial)?;
            }
            return Err(error);
        }
        Ok(fresh)
    }

    fn dispatch_with_transcript(
        &self,
        bundle: &crate::judge::PromptBundle,
    ) -> Result<String, JudgeError> {
        let raw = self.backend.dispatch(bundle)?;
        if let Some(store) = self.store {
            store.write_transcript(&bundle.fixture_key(), &raw).ok();
        }
        Ok(raw)
    }

    pub fn judge_calls(&self) -> u64 {
        self.backend.calls()
    }
}

/// Swap passes are recorded under run indices that cannot collide with
/// ordinary probe passes.
const SWAP_PASS_BASE: u32 = 1_000_000;

/// Group a flat, sorted report list into one RunSet per essay (corpus order).
pub fn group_reports(
    protocol: Protocol,
    essay_ids: &[EssayId],
    reports: Vec<ScoreReport>,
) -> Vec<RunSet> {
    essay_ids
        .iter()
        .map(|id| {
            let mut mine: Vec<ScoreReport> = reports
                .iter()
                .filter(|r| &r.essay_id == id)
                .cloned()
                .collect();
            mine.sort_by_key(|r| r.run_index);
            RunSet {
                protocol,
                essay_id: id.clone(),
                reports: mine,
            }
        })
        .collect()
}

/// Bounded-pool map: workers pull jobs by index, stop dispatching new jobs
/// once any job fails, and deposit results by index so output order never
/// depends on completion order.
fn run_pool<J: Sync, R: Send>(
    jobs: &[J],
    parallelism: usize,
    worker: impl Fn(&J) -> Result<R, ProtocolError> + Sync,
) -> Vec<Option<Result<R, ProtocolError>>> {
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let results: Vec<Mutex<Option<Result<R, ProtocolError>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let workers = parallelism.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= jobs.len() {
                    break;
                }
                let result = worker(&jobs[index]);
                if result.is_err() {
                    stop.store(true, Ordering::Relaxed);
                }
                *results[index].lock().unwrap() = Some(result);
            });
        }
    });
    results.into_iter().map(|m| m.into_inner().unwrap()).collect()
}
