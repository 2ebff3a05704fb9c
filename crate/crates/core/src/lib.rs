//! Essay evaluation with an LLM judge.
//!
//! The library orchestrates three evaluation protocols over a corpus of
//! student essays — unguided repeated scoring, fixed-rubric repeated scoring,
//! and round-robin pairwise comparison — then aggregates the outcomes into
//! grades and agreement statistics.
//!
//! Modules follow the pipeline order:
//!
//! * [`corpus`] — load and validate essays, rubrics, and human scores.
//! * [`judge`] — prompt assembly, judge backends (live / replay / synthetic),
//!   and response parsing.
//! * [`protocols`] — protocol runners, round-robin scheduling, and run
//!   artifact persistence.
//! * [`aggregate`] — averaging, tournament sums, normalization, and grade
//!   mapping.
//! * [`analysis`] — Pearson correlation, discordance rates, distribution
//!   summaries, and the rank-stability simulation.

pub mod aggregate;
pub mod analysis;
pub mod corpus;
pub mod judge;
pub mod protocols;

pub use corpus::{Corpus, CorpusError, Essay, EssayId, GradeBand, Rubric};
pub use judge::{JudgeBackend, JudgeError, Protocol, PromptBundle};
pub use protocols::{ProtocolError, RunSet, VerdictMatrix};
