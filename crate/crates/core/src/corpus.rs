//! Corpus loading and validation.
//!
//! A corpus is a directory of JSON files, one per entity class:
//!
//! ```text
//! themes.json        list of WorkshopTheme
//! essays.json        list of Essay
//! rubric.json        Rubric
//! levels.json        PerformanceLevels
//! human_scores.json  list of HumanScoreRecord (optional)
//! ```
//!
//! Loading cross-references every essay against its theme, checks the
//! structural invariants, and collects word-count warnings without failing.
//! A loaded [`Corpus`] is immutable and safe to share across threads.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Word-count bands checked per essay section, reported as warnings.
pub const PROJECT_WORD_BAND: (usize, usize) = (300, 400);
pub const CONTRIBUTION_WORD_BAND: (usize, usize) = (300, 400);
pub const REFLECTION_WORD_BAND: (usize, usize) = (200, 300);

/// Identifier of one essay within a corpus.
///
/// Ids are strings, but ordering zero-pads them to equal width first so that
/// ordinal ids ("1", "2", ..., "22") sort numerically. All round-robin
/// scheduling and matrix orientation downstream relies on this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EssayId(pub String);

impl EssayId {
    pub fn new(id: impl Into<String>) -> Self {
        EssayId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn padded(&self, width: usize) -> String {
        format!("{:0>width$}", self.0, width = width)
    }
}

impl fmt::Display for EssayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EssayId {
    fn from(s: &str) -> Self {
        EssayId(s.to_string())
    }
}

impl Ord for EssayId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let width = self.0.len().max(other.0.len());
        self.padded(width).cmp(&other.padded(width))
    }
}

impl PartialOrd for EssayId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One workshop theme: the project brief the essays respond to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkshopTheme {
    pub theme_id: String,
    pub title: String,
    /// Prompt part 1 text; target length is around 500 words.
    pub description: String,
}

/// One student's three-section reflective essay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Essay {
    pub essay_id: EssayId,
    pub theme_id: String,
    pub project_description: String,
    pub contribution: String,
    pub reflection: String,
}

impl Essay {
    /// Full essay text as presented to the judge.
    pub fn sections(&self) -> [(&'static str, &str); 3] {
        [
            ("Project Description", self.project_description.as_str()),
            ("Contribution", self.contribution.as_str()),
            ("Reflection", self.reflection.as_str()),
        ]
    }
}

/// A single scoring criterion within a rubric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub max_points: u32,
    #[serde(default)]
    pub descriptors: Vec<String>,
}

/// Machine-readable scoring criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rubric {
    pub criteria: Vec<Criterion>,
    pub total_points: u32,
}

impl Rubric {
    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn validate(&self) -> Result<(), String> {
        let sum: u32 = self.criteria.iter().map(|c| c.max_points).sum();
        if sum != self.total_points {
            return Err(format!(
                "rubric total_points {} does not equal criterion sum {}",
                self.total_points, sum
            ));
        }
        Ok(())
    }
}

/// One labeled point tier anchoring criterion scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub label: String,
    pub points: u32,
    pub description: String,
}

/// The level-to-points ladder used alongside a rubric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceLevels {
    pub levels: Vec<Level>,
}

impl PerformanceLevels {
    pub fn validate(&self) -> Result<(), String> {
        for pair in self.levels.windows(2) {
            if pair[1].points >= pair[0].points {
                return Err(format!(
                    "performance levels must be strictly decreasing: {} ({}) then {} ({})",
                    pair[0].label, pair[0].points, pair[1].label, pair[1].points
                ));
            }
        }
        Ok(())
    }
}

/// One rater's scores for one essay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanScoreRecord {
    pub essay_id: EssayId,
    pub rater_id: String,
    pub per_criterion: BTreeMap<String, f64>,
    pub total: f64,
}

/// Output grade interval with pass and distinction thresholds.
///
/// The distinction threshold is strict: a grade counts only when it lies
/// above the threshold, so exactly 24.0 is not a distinction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradeBand {
    pub floor: f64,
    pub ceiling: f64,
    pub pass_threshold: f64,
    pub distinction_threshold: f64,
}

impl Default for GradeBand {
    fn default() -> Self {
        GradeBand {
            floor: 18.0,
            ceiling: 30.0,
            pass_threshold: 18.0,
            distinction_threshold: 24.0,
        }
    }
}

impl GradeBand {
    pub fn validate(&self) -> Result<(), String> {
        let ok = self.floor < self.ceiling
            && self.floor <= self.pass_threshold
            && self.pass_threshold <= self.distinction_threshold
            && self.distinction_threshold <= self.ceiling;
        if ok {
            Ok(())
        } else {
            Err(format!(
                "invalid grade band: floor {} <= pass {} <= distinction {} <= ceiling {} violated",
                self.floor, self.pass_threshold, self.distinction_threshold, self.ceiling
            ))
        }
    }
}

/// A fully cross-referenced evaluation corpus.
///
/// Essays are held in corpus order (zero-padded id order); everything
/// downstream that needs a deterministic essay ordering takes it from here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub themes: Vec<WorkshopTheme>,
    pub essays: Vec<Essay>,
    pub rubric: Rubric,
    pub levels: PerformanceLevels,
    pub human_scores: Option<Vec<HumanScoreRecord>>,
    /// Soft findings collected at load time (word-count bands). Never affect scores.
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn essay_ids(&self) -> Vec<EssayId> {
        self.essays.iter().map(|e| e.essay_id.clone()).collect()
    }

    pub fn essay(&self, id: &EssayId) -> Option<&Essay> {
        self.essays.iter().find(|e| &e.essay_id == id)
    }

    pub fn theme(&self, theme_id: &str) -> Option<&WorkshopTheme> {
        self.themes.iter().find(|t| t.theme_id == theme_id)
    }

    pub fn theme_for(&self, essay: &Essay) -> &WorkshopTheme {
        self.theme(&essay.theme_id)
            .expect("loaded corpus cross-references every essay theme")
    }

    /// Mean human total per essay, in corpus order, for essays that have at
    /// least one human score record.
    pub fn human_means(&self) -> Vec<(EssayId, f64)> {
        let Some(records) = &self.human_scores else {
            return Vec::new();
        };
        let mut by_essay: BTreeMap<EssayId, Vec<f64>> = BTreeMap::new();
        for rec in records {
            by_essay
                .entry(rec.essay_id.clone())
                .or_default()
                .push(rec.total);
        }
        self.essays
            .iter()
            .filter_map(|e| {
                by_essay.get(&e.essay_id).map(|totals| {
                    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
                    (e.essay_id.clone(), mean)
                })
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing {name} in corpus directory {dir}")]
    MissingFile { name: &'static str, dir: PathBuf },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("corpus validation failed:\n{}", findings.join("\n"))]
    Validation { findings: Vec<String> },
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn band_warning(essay: &EssayId, section: &str, count: usize, band: (usize, usize)) -> Option<String> {
    if count < band.0 || count > band.1 {
        Some(format!(
            "essay {essay}: {section} has {count} words, outside the {}-{} band",
            band.0, band.1
        ))
    } else {
        None
    }
}

/// Load a corpus directory, check every structural invariant, and collect
/// word-count warnings.
///
/// Hard failures: a missing required file, malformed JSON, duplicate or empty
/// ids, dangling theme references, empty essay sections, and rubric or level
/// ladder violations. Word-count band misses are warnings on the returned
/// corpus, never errors.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    // Required files, probed in a fixed order so the error names the first gap.
    for name in ["essays.json", "themes.json", "rubric.json", "levels.json"] {
        if !root.join(name).is_file() {
            return Err(CorpusError::MissingFile {
                name: match name {
                    "essays.json" => "essays.json",
                    "themes.json" => "themes.json",
                    "rubric.json" => "rubric.json",
                    _ => "levels.json",
                },
                dir: root.to_path_buf(),
            });
        }
    }

    let themes: Vec<WorkshopTheme> = read_json(&root.join("themes.json"))?;
    let mut essays: Vec<Essay> = read_json(&root.join("essays.json"))?;
    let rubric: Rubric = read_json(&root.join("rubric.json"))?;
    let levels: PerformanceLevels = read_json(&root.join("levels.json"))?;
    let human_path = root.join("human_scores.json");
    let human_scores: Option<Vec<HumanScoreRecord>> = if human_path.is_file() {
        Some(read_json(&human_path)?)
    } else {
        None
    };

    let mut findings = Vec::new();

    let mut theme_ids = BTreeSet::new();
    for theme in &themes {
        if theme.theme_id.is_empty() {
            findings.push("theme with empty theme_id".to_string());
        } else if !theme_ids.insert(theme.theme_id.clone()) {
            findings.push(format!("duplicate theme_id {}", theme.theme_id));
        }
        if word_count(&theme.description) == 0 {
            findings.push(format!("theme {}: empty description", theme.theme_id));
        }
    }

    let mut essay_ids = BTreeSet::new();
    let mut dangling: Vec<String> = Vec::new();
    for essay in &essays {
        if !essay_ids.insert(essay.essay_id.clone()) {
            findings.push(format!("duplicate essay_id {}", essay.essay_id));
        }
        if !theme_ids.contains(&essay.theme_id) {
            dangling.push(essay.essay_id.to_string());
        }
        for (section, text) in essay.sections() {
            if text.trim().is_empty() {
                findings.push(format!("essay {}: empty {section} section", essay.essay_id));
            }
        }
    }
    if !dangling.is_empty() {
        findings.push(format!(
            "essays referencing themes not on disk: {}",
            dangling.join(", ")
        ));
    }

    if let Err(msg) = rubric.validate() {
        findings.push(msg);
    }
    if let Err(msg) = levels.validate() {
        findings.push(msg);
    }

    if !findings.is_empty() {
        return Err(CorpusError::Validation { findings });
    }

    essays.sort_by(|a, b| a.essay_id.cmp(&b.essay_id));

    let mut warnings = Vec::new();
    for essay in &essays {
        let id = &essay.essay_id;
        warnings.extend(band_warning(
            id,
            "project description",
            word_count(&essay.project_description),
            PROJECT_WORD_BAND,
        ));
        warnings.extend(band_warning(
            id,
            "contribution",
            word_count(&essay.contribution),
            CONTRIBUTION_WORD_BAND,
        ));
        warnings.extend(band_warning(
            id,
            "reflection",
            word_count(&essay.reflection),
            REFLECTION_WORD_BAND,
        ));
    }

    Ok(Corpus {
        themes,
        essays,
        rubric,
        levels,
        human_scores,
        warnings,
    })
}

/// Check every human score record against the corpus rubric and essay set.
///
/// Findings are data, not errors; an empty list means every record passes.
pub fn validate_human_scores(corpus: &Corpus) -> Vec<String> {
    let mut findings = Vec::new();
    let Some(records) = &corpus.human_scores else {
        return findings;
    };
    let essay_ids: BTreeSet<&EssayId> = corpus.essays.iter().map(|e| &e.essay_id).collect();
    for rec in records {
        let who = format!("essay {} rater {}", rec.essay_id, rec.rater_id);
        if !essay_ids.contains(&rec.essay_id) {
            findings.push(format!("{who}: essay_id not in essay set"));
        }
        let sum: f64 = rec.per_criterion.values().sum();
        if (sum - rec.total).abs() > 1e-6 {
            findings.push(format!(
                "{who}: total mismatch (total {} but criteria sum to {})",
                rec.total, sum
            ));
        }
        for (name, value) in &rec.per_criterion {
            match corpus.rubric.criterion(name) {
                None => findings.push(format!("{who}: unknown criterion {name}")),
                Some(criterion) => {
                    if *value < 0.0 {
                        findings.push(format!("{who}: criterion {name} is negative"));
                    } else if *value > criterion.max_points as f64 {
                        findings.push(format!(
                            "{who}: criterion {name} score {value} exceeds max_points {}",
                            criterion.max_points
                        ));
                    }
                }
            }
        }
    }
    findings
}

/// The shipped default rubric: three criteria worth ten points each.
pub fn default_rubric() -> Rubric {
    Rubric {
        criteria: vec![
            Criterion {
                name: "Technical Knowledge and Application".to_string(),
                max_points: 10,
                descriptors: vec![
                    "Understanding of Concepts".to_string(),
                    "Practical Application".to_string(),
                    "Innovation and Problem Solving".to_string(),
                ],
            },
            Criterion {
                name: "Teamwork and Collaborative Skills".to_string(),
                max_points: 10,
                descriptors: vec![
                    "Individual Role and Contribution".to_string(),
                    "Team Interaction and Communication".to_string(),
                    "Peer Engagement".to_string(),
                ],
            },
            Criterion {
                name: "Reflective Learning and Personal Growth".to_string(),
                max_points: 10,
                descriptors: vec![
                    "Self-Reflection and Insights".to_string(),
                    "Design Thinking and Process".to_string(),
                    "Skill and Attitude Development".to_string(),
                ],
            },
        ],
        total_points: 30,
    }
}

/// The shipped default performance ladder: 10, 8, 6, 4.
pub fn default_levels() -> PerformanceLevels {
    PerformanceLevels {
        levels: vec![
            Level {
                label: "Outstanding".to_string(),
                points: 10,
                description: "Exceptional command of the material, strong initiative, and \
                              insightful reflection throughout."
                    .to_string(),
            },
            Level {
                label: "Highly Competent".to_string(),
                points: 8,
                description: "Thorough grasp of concepts with effective collaboration and \
                              thoughtful, well-supported reflection."
                    .to_string(),
            },
            Level {
                label: "Competent".to_string(),
                points: 6,
                description: "Adequate understanding, collaboration, and reflective thinking."
                    .to_string(),
            },
            Level {
                label: "Needs Improvement".to_string(),
                points: 4,
                description: "Noticeable gaps in technical application, collaboration, or \
                              reflective depth."
                    .to_string(),
            },
        ],
    }
}
