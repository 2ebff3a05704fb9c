//! Prompt assembly, judge backends, and response parsing.
//!
//! Each protocol fixes an ordered list of prompt parts:
//!
//! * unguided — workshop description, student essay, instructions (3 parts)
//! * rubric   — workshop description, student essay, rubrics, instructions (4 parts)
//! * pairwise — workshop description, student essay, second essay, rubrics,
//!   instructions (5 parts); the rubrics part excludes performance levels
//!
//! Every prompt ends by demanding a machine-readable JSON block; free-text
//! pattern extraction is a parsing fallback only.

mod backend;
mod parse;

pub use backend::{
    make_backend, BackendKind, JudgeBackend, JudgeBackendConfig, LiveBackend, LiveConfig,
    NoiseParams, ReplayBackend, SyntheticBackend, SyntheticConfig,
};
pub use parse::{
    parse_comparison_response, parse_score_response, render_comparison_response,
    render_score_response, ExpectedRubric,
};

use crate::corpus::{Essay, EssayId, PerformanceLevels, Rubric, WorkshopTheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// The three comparison criteria named in the pairwise instructions.
pub const COMPARISON_CRITERIA: [&str; 3] =
    ["Project Description", "Role and Contribution", "Reflection and Insight"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Unguided,
    Rubric,
    Pairwise,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Protocol::Unguided => "unguided",
            Protocol::Rubric => "rubric",
            Protocol::Pairwise => "pairwise",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartLabel {
    WorkshopDescription,
    StudentEssay,
    SecondEssay,
    Rubrics,
    Instructions,
}

impl PartLabel {
    fn heading(self) -> &'static str {
        match self {
            PartLabel::WorkshopDescription => "Workshop Description",
            PartLabel::StudentEssay => "Student Essay",
            PartLabel::SecondEssay => "Second Essay",
            PartLabel::Rubrics => "Rubrics",
            PartLabel::Instructions => "Instructions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptPart {
    pub label: PartLabel,
    pub text: String,
}

/// One fully assembled judge prompt.
///
/// `run_index` distinguishes otherwise identical repeat calls so that replay
/// fixtures and synthetic noise draws are keyed per run; it is part of the
/// bundle's content hash but never rendered into the prompt text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub protocol: Protocol,
    pub parts: Vec<PromptPart>,
    pub essay_a: EssayId,
    pub essay_b: Option<EssayId>,
    pub run_index: u32,
}

impl PromptBundle {
    pub fn with_run_index(mut self, run_index: u32) -> Self {
        self.run_index = run_index;
        self
    }

    /// The prompt text sent to a live judge: the parts under fixed headings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for part in &self.parts {
            let heading = match (part.label, &self.essay_b) {
                (PartLabel::StudentEssay, _) => format!("Student Essay (#{})", self.essay_a),
                (PartLabel::SecondEssay, Some(b)) => format!("Second Essay (#{b})"),
                (label, _) => label.heading().to_string(),
            };
            out.push_str("## ");
            out.push_str(&heading);
            out.push_str("\n\n");
            out.push_str(&part.text);
            out.push_str("\n\n");
        }
        out
    }

    /// Content hash of the whole bundle, used as the replay fixture key and
    /// the transcript filename. Any change to the prompt template, the essay
    /// text, or the run index yields a different key.
    pub fn fixture_key(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("bundle serializes");
        let digest = Sha256::digest(&canonical);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            write!(hex, "{byte:02x}").unwrap();
        }
        hex
    }

    fn part(&self, label: PartLabel) -> Option<&PromptPart> {
        self.parts.iter().find(|p| p.label == label)
    }

    pub fn instructions(&self) -> &str {
        self.part(PartLabel::Instructions)
            .map(|p| p.text.as_str())
            .unwrap_or("")
    }
}

/// One judge run's scores for one essay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub essay_id: EssayId,
    pub run_index: u32,
    pub per_criterion: BTreeMap<String, f64>,
    pub total: f64,
    pub rationale: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_rubric: Option<Rubric>,
}

/// Signed outcome of one pairwise comparison, oriented so the pair is stored
/// once with `pair.0 < pair.1` in corpus order. A positive value means the
/// first essay is superior; the implied point award is zero-sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub pair: (EssayId, EssayId),
    pub value: i8,
    pub per_criterion_notes: BTreeMap<String, String>,
    pub run_index: u32,
}

impl ComparisonVerdict {
    /// Points implied for each essay of the pair: `(value, -value)`.
    pub fn awards(&self) -> ((EssayId, i64), (EssayId, i64)) {
        (
            (self.pair.0.clone(), self.value as i64),
            (self.pair.1.clone(), -(self.value as i64)),
        )
    }
}

pub fn verdict_value_in_range(value: i64) -> bool {
    (-2..=2).contains(&value)
}

#[derive(Debug, Error)]
pub enum JudgeError {
    /// A precondition of prompt assembly or backend configuration failed.
    #[error("contract violation: {0}")]
    Contract(String),
    /// The live backend exhausted its retries.
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    /// The replay store has no fixture for the requested bundle.
    #[error("missing replay fixture {key} under {dir}")]
    MissingFixture { key: String, dir: String },
    /// The response could not be parsed into a structured record. The raw
    /// text is carried for audit.
    #[error("unparsable judge response: {reason}")]
    Parse { reason: String, raw: String },
}

/// Assemble the prompt for one evaluation call.
///
/// Preconditions: `essay_b` is present iff the protocol is pairwise, `rubric`
/// is present iff the protocol uses one (rubric or pairwise), and `levels`
/// are forbidden for pairwise prompts.
pub fn build_prompt(
    protocol: Protocol,
    theme: &WorkshopTheme,
    essay_a: &Essay,
    essay_b: Option<&Essay>,
    rubric: Option<&Rubric>,
    levels: Option<&PerformanceLevels>,
) -> Result<PromptBundle, JudgeError> {
    match protocol {
        Protocol::Unguided => {
            if rubric.is_some() {
                return Err(JudgeError::Contract(
                    "rubric forbidden for the unguided protocol".to_string(),
                ));
            }
            if levels.is_some() {
                return Err(JudgeError::Contract(
                    "performance levels forbidden for the unguided protocol".to_string(),
                ));
            }
        }
        Protocol::Rubric => {
            if rubric.is_none() {
                return Err(JudgeError::Contract(
                    "rubric required for the rubric protocol".to_string(),
                ));
            }
        }
        Protocol::Pairwise => {
            if rubric.is_none() {
                return Err(JudgeError::Contract(
                    "rubric required for the pairwise protocol".to_string(),
                ));
            }
            if levels.is_some() {
                return Err(JudgeError::Contract(
                    "performance levels forbidden for pairwise prompts".to_string(),
                ));
            }
        }
    }
    match (protocol, essay_b) {
        (Protocol::Pairwise, None) => {
            return Err(JudgeError::Contract(
                "second essay required for the pairwise protocol".to_string(),
            ))
        }
        (Protocol::Pairwise, Some(_)) => {}
        (_, Some(_)) => {
            return Err(JudgeError::Contract(
                "second essay forbidden outside the pairwise protocol".to_string(),
            ))
        }
        (_, None) => {}
    }

    let mut parts = vec![
        PromptPart {
            label: PartLabel::WorkshopDescription,
            text: workshop_description_text(theme),
        },
        PromptPart {
            label: PartLabel::StudentEssay,
            text: essay_text(essay_a),
        },
    ];
    if let Some(b) = essay_b {
        parts.push(PromptPart {
            label: PartLabel::SecondEssay,
            text: essay_text(b),
        });
    }
    if let Some(rubric) = rubric {
        parts.push(PromptPart {
            label: PartLabel::Rubrics,
            text: rubric_text(rubric, levels),
        });
    }
    parts.push(PromptPart {
        label: PartLabel::Instructions,
        text: instructions_text(protocol),
    });

    Ok(PromptBundle {
        protocol,
        parts,
        essay_a: essay_a.essay_id.clone(),
        essay_b: essay_b.map(|b| b.essay_id.clone()),
        run_index: 1,
    })
}

fn workshop_description_text(theme: &WorkshopTheme) -> String {
    format!(
        "{title}\n\n{description}\n\nEach participant submitted a reflective essay with three \
         sections: a Project Description (300-400 words), a Contribution section (300-400 \
         words), and a Reflection (200-300 words).",
        title = theme.title,
        description = theme.description,
    )
}

fn essay_text(essay: &Essay) -> String {
    let mut out = String::new();
    for (i, (section, text)) in essay.sections().into_iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(section);
        out.push_str(":\n");
        out.push_str(text);
    }
    out
}

fn rubric_text(rubric: &Rubric, levels: Option<&PerformanceLevels>) -> String {
    let mut out = String::new();
    for (i, criterion) in rubric.criteria.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "{}. {} ({} Points)\n",
            i + 1,
            criterion.name,
            criterion.max_points
        ));
        for descriptor in &criterion.descriptors {
            out.push_str("   - ");
            out.push_str(descriptor);
            out.push('\n');
        }
    }
    if let Some(levels) = levels {
        out.push_str("\nPerformance Levels:\n");
        for level in &levels.levels {
            out.push_str(&format!(
                "- {} ({} Points): {}\n",
                level.label, level.points, level.description
            ));
        }
    }
    out
}

fn instructions_text(protocol: Protocol) -> String {
    match protocol {
        Protocol::Unguided => format!(
            "Evaluation procedure:\n\
             1. Generate rubrics based on the workshop description.\n\
             2. Explain the theoretical background behind the creation of those rubrics.\n\
             3. Evaluate the student's essay out of 30 points using the created rubrics.\n\
             4. Explain the reasoning behind the assigned score.\n\n\
             {}",
            score_schema_text(true)
        ),
        Protocol::Rubric => format!(
            "Evaluation procedure:\n\
             1. Evaluate the student's essay out of 30 points using the specified rubrics.\n\
             2. Explain the rationale behind the assigned score.\n\n\
             {}",
            score_schema_text(false)
        ),
        Protocol::Pairwise => format!(
            "Evaluation procedure:\n\
             1. Compare the two essays based on three main criteria: {criteria}.\n\
             2. If one essay is slightly superior, it receives +1 point, and the other -1 \
             point. If one is clearly superior, it receives +2 points, and the other -2 \
             points. If both are equal, each receives 0 points.\n\
             3. State the points awarded to the first essay.\n\n\
             {schema}",
            criteria = COMPARISON_CRITERIA.join(", "),
            schema = comparison_schema_text(),
        ),
    }
}

fn score_schema_text(with_rubric: bool) -> String {
    let rubric_field = if with_rubric {
        ", \"rubric\": {\"criteria\": [{\"name\": \"...\", \"max_points\": 10, \
         \"descriptors\": [\"...\"]}, ...], \"total_points\": 30}"
    } else {
        ""
    };
    format!(
        "Finish your reply with exactly one JSON code block of the form:\n\
         ```json\n\
         {{\"criteria\": {{\"<criterion name>\": <points>, ...}}, \"total\": <points>, \
         \"rationale\": \"<summary of your reasoning>\"{rubric_field}}}\n\
         ```"
    )
}

fn comparison_schema_text() -> String {
    format!(
        "Finish your reply with exactly one JSON code block of the form:\n\
         ```json\n\
         {{\"value\": -2 | -1 | 0 | 1 | 2, \"notes\": {{\"{}\": \"...\", \"{}\": \"...\", \
         \"{}\": \"...\"}}}}\n\
         ```\n\
         where a positive value means the first essay is superior.",
        COMPARISON_CRITERIA[0], COMPARISON_CRITERIA[1], COMPARISON_CRITERIA[2]
    )
}
