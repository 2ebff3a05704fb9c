//! Judge backends: live HTTP, replay fixtures, and the synthetic noise model.
//!
//! Backends are `Send + Sync` and tolerate concurrent dispatch. Replay and
//! synthetic dispatch are pure functions of the bundle (plus configuration),
//! so results never depend on call order.

use super::parse::{render_comparison_response, render_score_response};
use super::{JudgeError, PartLabel, PromptBundle, Protocol, COMPARISON_CRITERIA};
use crate::corpus::{Criterion, Rubric};
use rand_chacha::ChaCha12Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

/// A source of judge responses.
pub trait JudgeBackend: Send + Sync {
    /// Send one prompt and return the raw response text.
    fn dispatch(&self, bundle: &PromptBundle) -> Result<String, JudgeError>;

    /// Total dispatch calls made so far, successful or not.
    fn calls(&self) -> u64;

    fn kind(&self) -> BackendKind;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
    Synthetic,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
            BackendKind::Synthetic => "synthetic",
        };
        f.write_str(s)
    }
}

/// Noise model knobs for the synthetic judge.
///
/// A score run draws `total = clamp(round(18 + 12q + e), 0, 30)` with
/// `e ~ N(0, score_sigma)`. A comparison draws the gap `qa - qb + e'` with
/// `e' ~ N(0, comparison_sigma)` and maps it through symmetric thresholds:
/// beyond `clear_threshold` is a ±2 verdict, beyond `slight_threshold` a ±1,
/// anything closer a tie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub score_sigma: f64,
    pub comparison_sigma: f64,
    pub slight_threshold: f64,
    pub clear_threshold: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            score_sigma: 2.0,
            comparison_sigma: 0.1,
            slight_threshold: 0.05,
            clear_threshold: 0.25,
        }
    }
}

impl NoiseParams {
    pub fn zero_noise() -> Self {
        NoiseParams {
            score_sigma: 0.0,
            comparison_sigma: 0.0,
            ..NoiseParams::default()
        }
    }

    pub fn verdict_from_gap(&self, gap: f64) -> i8 {
        if gap > self.clear_threshold {
            2
        } else if gap > self.slight_threshold {
            1
        } else if gap < -self.clear_threshold {
            -2
        } else if gap < -self.slight_threshold {
            -1
        } else {
            0
        }
    }
}

/// Synthetic judge configuration: a seed, optional explicit latent qualities
/// per essay id, and the noise model. Ids without an explicit quality get one
/// derived deterministically from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    #[serde(default)]
    pub qualities: BTreeMap<String, f64>,
    #[serde(default)]
    pub noise: NoiseParams,
}

impl SyntheticConfig {
    pub fn new(seed: u64) -> Self {
        SyntheticConfig {
            seed,
            qualities: BTreeMap::new(),
            noise: NoiseParams::default(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseParams) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_quality(mut self, essay_id: &str, quality: f64) -> Self {
        self.qualities.insert(essay_id.to_string(), quality);
        self
    }
}

/// Live backend configuration. The endpoint is a chat-completions style URL;
/// credentials come from `JUDGE_API_KEY` and are never serialized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiveConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(skip)]
    pub api_key: String,
    pub max_retries: u32,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl LiveConfig {
    pub fn from_env() -> Result<Self, JudgeError> {
        let var = |name: &str| {
            std::env::var(name)
                .map_err(|_| JudgeError::Contract(format!("environment variable {name} not set")))
        };
        Ok(LiveConfig {
            endpoint: var("JUDGE_ENDPOINT")?,
            model: var("JUDGE_MODEL")?,
            api_key: var("JUDGE_API_KEY")?,
            max_retries: 3,
            timeout_secs: 120,
            max_in_flight: 4,
        })
    }
}

/// Backend selection plus its kind-specific settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JudgeBackendConfig {
    Live(LiveConfig),
    Replay { fixture_dir: PathBuf },
    Synthetic(SyntheticConfig),
}

impl JudgeBackendConfig {
    pub fn kind(&self) -> BackendKind {
        match self {
            JudgeBackendConfig::Live(_) => BackendKind::Live,
            JudgeBackendConfig::Replay { .. } => BackendKind::Replay,
            JudgeBackendConfig::Synthetic(_) => BackendKind::Synthetic,
        }
    }
}

/// Construct the backend described by `config`.
pub fn make_backend(config: &JudgeBackendConfig) -> Result<Arc<dyn JudgeBackend>, JudgeError> {
    match config {
        JudgeBackendConfig::Live(cfg) => Ok(Arc::new(LiveBackend::new(cfg.clone())?)),
        JudgeBackendConfig::Replay { fixture_dir } => {
            if !fixture_dir.is_dir() {
                return Err(JudgeError::Contract(format!(
                    "replay fixture directory {} does not exist",
                    fixture_dir.display()
                )));
            }
            Ok(Arc::new(ReplayBackend::new(fixture_dir.clone())))
        }
        JudgeBackendConfig::Synthetic(cfg) => Ok(Arc::new(SyntheticBackend::new(cfg.clone()))),
    }
}

// --- replay ---

/// Returns stored fixture bytes keyed by the bundle hash, unchanged.
pub struct ReplayBackend {
    fixture_dir: PathBuf,
    calls: AtomicU64,
}

impl ReplayBackend {
    pub fn new(fixture_dir: PathBuf) -> Self {
        ReplayBackend {
            fixture_dir,
            calls: AtomicU64::new(0),
        }
    }

    pub fn fixture_path(&self, bundle: &PromptBundle) -> PathBuf {
        self.fixture_dir.join(format!("{}.txt", bundle.fixture_key()))
    }
}

impl JudgeBackend for ReplayBackend {
    fn dispatch(&self, bundle: &PromptBundle) -> Result<String, JudgeError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let path = self.fixture_path(bundle);
        std::fs::read_to_string(&path).map_err(|_| JudgeError::MissingFixture {
            key: bundle.fixture_key(),
            dir: self.fixture_dir.display().to_string(),
        })
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }
}

// --- synthetic ---

/// Generates schema-valid responses from a seeded noise model around latent
/// essay qualities. Responses are a pure function of (seed, bundle).
pub struct SyntheticBackend {
    config: SyntheticConfig,
    calls: AtomicU64,
}

impl SyntheticBackend {
    pub fn new(config: SyntheticConfig) -> Self {
        SyntheticBackend {
            config,
            calls: AtomicU64::new(0),
        }
    }

    /// Latent quality for an essay id: explicit if configured, otherwise
    /// derived uniformly from the seed.
    pub fn quality(&self, essay_id: &str) -> f64 {
        if let Some(q) = self.config.qualities.get(essay_id) {
            return *q;
        }
        let mut rng = derived_rng(self.config.seed, &["quality", essay_id]);
        uniform(&mut rng)
    }

    fn score_response(&self, bundle: &PromptBundle) -> Result<String, JudgeError> {
        let quality = self.quality(bundle.essay_a.as_str());
        let mut rng = derived_rng(self.config.seed, &["score", &bundle.fixture_key()]);
        let noise = gaussian(&mut rng) * self.config.noise.score_sigma;
        let total = (18.0 + 12.0 * quality + noise).round().clamp(0.0, 30.0);

        let criteria = match bundle.protocol {
            Protocol::Unguided => synthetic_rubric(bundle.run_index),
            _ => rubric_criteria_from_prompt(bundle)?,
        };
        let per_criterion = split_total(total as u32, &criteria);
        let rationale = format!(
            "Synthetic evaluation: the essay presents its project, role, and reflection at a \
             consistent level; awarded {total} of 30 points."
        );
        let rubric = match bundle.protocol {
            Protocol::Unguided => Some(Rubric {
                criteria,
                total_points: 30,
            }),
            _ => None,
        };
        Ok(render_score_response(
            &per_criterion,
            total,
            &rationale,
            rubric.as_ref(),
        ))
    }

    fn comparison_response(&self, bundle: &PromptBundle) -> Result<String, JudgeError> {
        let essay_b = bundle.essay_b.as_ref().ok_or_else(|| {
            JudgeError::Contract("pairwise bundle missing second essay".to_string())
        })?;
        let qa = self.quality(bundle.essay_a.as_str());
        let qb = self.quality(essay_b.as_str());
        let mut rng = derived_rng(self.config.seed, &["compare", &bundle.fixture_key()]);
        let noise = gaussian(&mut rng) * self.config.noise.comparison_sigma;
        let value = self.config.noise.verdict_from_gap(qa - qb + noise);

        let stance = match value {
            2 => "the first essay is clearly stronger",
            1 => "the first essay is slightly stronger",
            0 => "the essays are evenly matched",
            -1 => "the second essay is slightly stronger",
            _ => "the second essay is clearly stronger",
        };
        let notes: BTreeMap<String, String> = COMPARISON_CRITERIA
            .iter()
            .map(|criterion| (criterion.to_string(), format!("On {criterion}, {stance}.")))
            .collect();
        Ok(render_comparison_response(value, &notes))
    }
}

impl JudgeBackend for SyntheticBackend {
    fn dispatch(&self, bundle: &PromptBundle) -> Result<String, JudgeError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        match bundle.protocol {
            Protocol::Pairwise => self.comparison_response(bundle),
            _ => self.score_response(bundle),
        }
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Synthetic
    }
}

/// Criterion names and maxima recovered from the rendered rubrics part, so the
/// synthetic response matches whatever rubric the prompt embedded.
fn rubric_criteria_from_prompt(bundle: &PromptBundle) -> Result<Vec<Criterion>, JudgeError> {
    let part = bundle
        .parts
        .iter()
        .find(|p| p.label == PartLabel::Rubrics)
        .ok_or_else(|| JudgeError::Contract("bundle has no rubrics part".to_string()))?;
    let mut criteria = Vec::new();
    for line in part.text.lines() {
        let line = line.trim();
        let Some((_, rest)) = line.split_once(". ") else {
            continue;
        };
        let Some((name, tail)) = rest.rsplit_once(" (") else {
            continue;
        };
        let Some(points) = tail.strip_suffix(" Points)") else {
            continue;
        };
        if let Ok(max_points) = points.parse::<u32>() {
            criteria.push(Criterion {
                name: name.to_string(),
                max_points,
                descriptors: Vec::new(),
            });
        }
    }
    if criteria.is_empty() {
        return Err(JudgeError::Contract(
            "no criteria recognizable in the rubrics part".to_string(),
        ));
    }
    Ok(criteria)
}

/// Rubric the synthetic judge "generates" for unguided runs. Two shapes
/// alternate by run so repeated runs exercise rubric diversity.
fn synthetic_rubric(run_index: u32) -> Vec<Criterion> {
    let names: [&str; 3] = if run_index % 2 == 1 {
        ["Project Description", "Contribution", "Reflection"]
    } else {
        ["Content", "Clarity and Organization", "Analysis and Critical Thinking"]
    };
    names
        .iter()
        .map(|name| Criterion {
            name: name.to_string(),
            max_points: 10,
            descriptors: Vec::new(),
        })
        .collect()
}

/// Split an integer total across criteria without exceeding any maximum.
fn split_total(total: u32, criteria: &[Criterion]) -> BTreeMap<String, f64> {
    let mut remaining = total;
    let mut out = BTreeMap::new();
    let n = criteria.len() as u32;
    for (i, criterion) in criteria.iter().enumerate() {
        let left = n - i as u32;
        let base = remaining / left;
        let bump = u32::from(!remaining.is_multiple_of(left));
        let share = (base + bump).min(criterion.max_points);
        out.insert(criterion.name.clone(), share as f64);
        remaining -= share;
    }
    debug_assert_eq!(remaining, 0, "total must fit under the criterion maxima");
    out
}

// --- seeded draws ---

fn derived_rng(seed: u64, tags: &[&str]) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for tag in tags {
        hasher.update([0u8]);
        hasher.update(tag.as_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 8];
    key.copy_from_slice(&digest[..8]);
    ChaCha12Rng::seed_from_u64(u64::from_le_bytes(key))
}

/// Uniform draw in [0, 1).
pub(crate) fn uniform(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw via Box-Muller.
pub(crate) fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// --- live ---

/// Bounded counting semaphore for the in-flight request cap.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }
}

struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        *self.semaphore.permits.lock().unwrap() += 1;
        self.semaphore.available.notify_one();
    }
}

/// Chat-completions HTTP backend with retries and an in-flight cap.
pub struct LiveBackend {
    config: LiveConfig,
    agent: ureq::Agent,
    limiter: Semaphore,
    calls: AtomicU64,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self, JudgeError> {
        if config.endpoint.is_empty() || config.model.is_empty() {
            return Err(JudgeError::Contract(
                "live backend requires endpoint and model".to_string(),
            ));
        }
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build();
        let limiter = Semaphore::new(config.max_in_flight.max(1));
        Ok(LiveBackend {
            agent: agent_config.into(),
            config,
            limiter,
            calls: AtomicU64::new(0),
        })
    }

    fn try_once(&self, prompt: &str) -> Result<String, String> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut response = self
            .agent
            .post(&self.config.endpoint)
            .header("authorization", &format!("Bearer {}", self.config.api_key))
            .send_json(&body)
            .map_err(|e| e.to_string())?;
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| format!("bad response body: {e}"))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| "response carried no message content".to_string())
    }
}

impl JudgeBackend for LiveBackend {
    fn dispatch(&self, bundle: &PromptBundle) -> Result<String, JudgeError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let _permit = self.limiter.acquire();
        let prompt = bundle.render();
        let mut last_error = String::new();
        let attempts = self.config.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = Duration::from_millis(500u64 << (attempt - 1).min(6));
                std::thread::sleep(backoff);
            }
            match self.try_once(&prompt) {
                Ok(text) => return Ok(text),
                Err(message) => last_error = message,
            }
        }
        Err(JudgeError::Transport {
            attempts,
            message: last_error,
        })
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{default_rubric, Essay, EssayId, WorkshopTheme};
    use crate::judge::parse::{parse_comparison_response, parse_score_response, ExpectedRubric};
    use crate::judge::{build_prompt, Protocol};

    fn theme() -> WorkshopTheme {
        WorkshopTheme {
            theme_id: "T1".to_string(),
            title: "Bridge Load Limits".to_string(),
            description: "Mitigate failures caused by overweight vehicles.".to_string(),
        }
    }

    fn essay(id: &str) -> Essay {
        Essay {
            essay_id: EssayId::new(id),
            theme_id: "T1".to_string(),
            project_description: format!("Project section for {id}."),
            contribution: format!("Contribution section for {id}."),
            reflection: format!("Reflection section for {id}."),
        }
    }

    fn pairwise_bundle(a: &str, b: &str) -> PromptBundle {
        let rubric = default_rubric();
        build_prompt(
            Protocol::Pairwise,
            &theme(),
            &essay(a),
            Some(&essay(b)),
            Some(&rubric),
            None,
        )
        .unwrap()
    }

    #[test]
    fn replay_returns_fixture_bytes_unchanged() {
        let tmp = tempfile::TempDir::new().unwrap();
        let backend = ReplayBackend::new(tmp.path().to_path_buf());
        let bundle = pairwise_bundle("1", "2");
        let text = "verbatim fixture text\nwith two lines";
        std::fs::write(backend.fixture_path(&bundle), text).unwrap();
        assert_eq!(backend.dispatch(&bundle).unwrap(), text);
        assert_eq!(backend.dispatch(&bundle).unwrap(), text);
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn replay_missing_fixture_names_the_key() {
        let tmp = tempfile::TempDir::new().unwrap();
        let backend = ReplayBackend::new(tmp.path().to_path_buf());
        let bundle = pairwise_bundle("1", "2");
        let err = backend.dispatch(&bundle).unwrap_err();
        assert!(err.to_string().contains(&bundle.fixture_key()));
    }

    #[test]
    fn synthetic_same_seed_same_bundle_is_identical() {
        let config = SyntheticConfig::new(42);
        let backend_a = SyntheticBackend::new(config.clone());
        let backend_b = SyntheticBackend::new(config);
        let bundle = pairwise_bundle("3", "7");
        assert_eq!(
            backend_a.dispatch(&bundle).unwrap(),
            backend_b.dispatch(&bundle).unwrap()
        );
        // Repeat calls on one backend are also identical.
        assert_eq!(
            backend_a.dispatch(&bundle).unwrap(),
            backend_a.dispatch(&bundle).unwrap()
        );
    }

    /// Independent route through the threshold table, for checking the
    /// backend's verdicts against the documented noise model.
    fn oracle_verdict(gap: f64, noise: &NoiseParams) -> i8 {
        let magnitude = gap.abs();
        let size = if magnitude > noise.clear_threshold {
            2
        } else if magnitude > noise.slight_threshold {
            1
        } else {
            0
        };
        if gap < 0.0 {
            -size
        } else {
            size
        }
    }

    #[test]
    fn zero_noise_wide_gap_gives_clear_verdict() {
        let config = SyntheticConfig::new(1)
            .with_noise(NoiseParams::zero_noise())
            .with_quality("1", 0.9)
            .with_quality("2", 0.1);
        let backend = SyntheticBackend::new(config.clone());
        let bundle = pairwise_bundle("1", "2");
        let raw = backend.dispatch(&bundle).unwrap();
        let verdict =
            parse_comparison_response(&raw, (EssayId::new("1"), EssayId::new("2")), 1).unwrap();
        assert_eq!(verdict.value, oracle_verdict(0.9 - 0.1, &config.noise));
        assert_eq!(verdict.value, 2);
    }

    #[test]
    fn zero_noise_verdicts_match_oracle_across_gaps() {
        for (qa, qb) in [
            (0.5, 0.5),
            (0.52, 0.5),
            (0.58, 0.5),
            (0.8, 0.5),
            (0.5, 0.58),
            (0.1, 0.9),
        ] {
            let config = SyntheticConfig::new(9)
                .with_noise(NoiseParams::zero_noise())
                .with_quality("1", qa)
                .with_quality("2", qb);
            let backend = SyntheticBackend::new(config.clone());
            let raw = backend.dispatch(&pairwise_bundle("1", "2")).unwrap();
            let verdict =
                parse_comparison_response(&raw, (EssayId::new("1"), EssayId::new("2")), 1)
                    .unwrap();
            assert_eq!(verdict.value, oracle_verdict(qa - qb, &config.noise));
        }
    }

    #[test]
    fn synthetic_score_parses_against_prompt_rubric() {
        let rubric = default_rubric();
        let bundle = build_prompt(
            Protocol::Rubric,
            &theme(),
            &essay("5"),
            None,
            Some(&rubric),
            None,
        )
        .unwrap();
        let backend = SyntheticBackend::new(SyntheticConfig::new(11));
        let raw = backend.dispatch(&bundle).unwrap();
        let report =
            parse_score_response(&raw, ExpectedRubric::Fixed(&rubric), &EssayId::new("5"), 1)
                .unwrap();
        assert!(report.total >= 0.0 && report.total <= 30.0);
        assert!(report.generated_rubric.is_none());
    }

    #[test]
    fn synthetic_unguided_scores_carry_a_rubric() {
        let bundle =
            build_prompt(Protocol::Unguided, &theme(), &essay("5"), None, None, None).unwrap();
        let backend = SyntheticBackend::new(SyntheticConfig::new(11));
        let raw = backend.dispatch(&bundle).unwrap();
        let report =
            parse_score_response(&raw, ExpectedRubric::Generated, &EssayId::new("5"), 1).unwrap();
        let rubric = report.generated_rubric.expect("unguided run generates a rubric");
        assert_eq!(rubric.total_points, 30);
    }

    #[test]
    fn zero_noise_score_tracks_quality_exactly() {
        let config = SyntheticConfig::new(3)
            .with_noise(NoiseParams::zero_noise())
            .with_quality("9", 0.5);
        let backend = SyntheticBackend::new(config);
        let rubric = default_rubric();
        let bundle = build_prompt(
            Protocol::Rubric,
            &theme(),
            &essay("9"),
            None,
            Some(&rubric),
            None,
        )
        .unwrap();
        let raw = backend.dispatch(&bundle).unwrap();
        let report =
            parse_score_response(&raw, ExpectedRubric::Fixed(&rubric), &EssayId::new("9"), 1)
                .unwrap();
        assert_eq!(report.total, 24.0); // 18 + 12 * 0.5
    }

    #[test]
    fn split_total_respects_maxima() {
        let rubric = default_rubric();
        for total in 0..=30u32 {
            let split = split_total(total, &rubric.criteria);
            let sum: f64 = split.values().sum();
            assert_eq!(sum, total as f64);
            for (name, points) in &split {
                let max = rubric.criterion(name).unwrap().max_points as f64;
                assert!(*points >= 0.0 && *points <= max);
            }
        }
    }

    #[test]
    fn derived_qualities_are_stable_and_spread() {
        let backend = SyntheticBackend::new(SyntheticConfig::new(5));
        let q1 = backend.quality("1");
        assert_eq!(q1, backend.quality("1"));
        assert!((0.0..1.0).contains(&q1));
        assert_ne!(q1, backend.quality("2"));
    }
}
