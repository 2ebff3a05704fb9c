//! Run artifact persistence.
//!
//! Every run lives under `runs/<run-id>/`:
//!
//! ```text
//! manifest.json      config, corpus hash, backend kind, seed, call count
//! reports.json       all ScoreReports (scoring protocols)
//! verdicts.json      the VerdictMatrix (pairwise protocol)
//! grades.json        the GradeSheet
//! transcripts/       raw judge responses, one file per bundle key
//! ```
//!
//! Transcript filenames are the bundle fixture keys, so a live run's
//! transcript directory doubles as a replay fixture store. Partial artifacts
//! (`reports_partial.json`, `verdicts_partial.json`) persist aborted runs for
//! resume and are removed on success. Nothing here carries timestamps: a run
//! is reproducible byte-for-byte from its manifest.

use super::{ProtocolError, VerdictMatrix};
use crate::aggregate::GradeSheet;
use crate::corpus::{Corpus, GradeBand};
use crate::judge::{ComparisonVerdict, JudgeBackendConfig, ScoreReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Partial,
}

/// Everything needed to reconstruct a run. Credentials are never stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub protocol: String,
    pub corpus_path: String,
    pub corpus_hash: String,
    pub backend: JudgeBackendConfig,
    pub repeats: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parallelism: usize,
    pub pairwise_repeats: u32,
    pub swap_positions: bool,
    pub band: GradeBand,
    pub judge_calls: u64,
    pub status: RunStatus,
}

/// Content hash of a loaded corpus (essays, themes, rubric, levels, and human
/// scores), independent of on-disk formatting.
pub fn corpus_hash(corpus: &Corpus) -> String {
    let canonical = serde_json::to_vec(corpus).expect("corpus serializes");
    let digest = Sha256::digest(&canonical);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

pub struct RunStore {
    dir: PathBuf,
}

impl RunStore {
    /// Create `root/<run_id>/` (and its transcripts directory) if needed.
    pub fn create(root: &Path, run_id: &str) -> Result<RunStore, ProtocolError> {
        let dir = root.join(run_id);
        std::fs::create_dir_all(dir.join("transcripts")).map_err(|e| ProtocolError::Store {
            path: dir.clone(),
            message: e.to_string(),
        })?;
        Ok(RunStore { dir })
    }

    /// Open an existing run directory.
    pub fn open(dir: &Path) -> Result<RunStore, ProtocolError> {
        if !dir.is_dir() {
            return Err(ProtocolError::Store {
                path: dir.to_path_buf(),
                message: "run directory does not exist".to_string(),
            });
        }
        Ok(RunStore {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), ProtocolError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| ProtocolError::Store {
            path: path.clone(),
            message: e.to_string(),
        })?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| ProtocolError::Store {
            path,
            message: e.to_string(),
        })
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<T, ProtocolError> {
        let path = self.dir.join(name);
        let text = std::fs::read_to_string(&path).map_err(|e| ProtocolError::Store {
            path: path.clone(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| ProtocolError::Store {
            path,
            message: e.to_string(),
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.dir.join(name).is_file()
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<(), ProtocolError> {
        self.write_json("manifest.json", manifest)
    }

    pub fn read_manifest(&self) -> Result<RunManifest, ProtocolError> {
        self.read_json("manifest.json")
    }

    pub fn write_reports(&self, reports: &[ScoreReport]) -> Result<(), ProtocolError> {
        self.write_json("reports.json", &reports)
    }

    pub fn read_reports(&self) -> Result<Vec<ScoreReport>, ProtocolError> {
        self.read_json("reports.json")
    }

    pub fn write_verdicts(&self, matrix: &VerdictMatrix) -> Result<(), ProtocolError> {
        self.write_json("verdicts.json", matrix)
    }

    pub fn read_verdicts(&self) -> Result<VerdictMatrix, ProtocolError> {
        self.read_json("verdicts.json")
    }

    pub fn write_grades(&self, sheet: &GradeSheet) -> Result<(), ProtocolError> {
        self.write_json("grades.json", sheet)
    }

    pub fn read_grades(&self) -> Result<GradeSheet, ProtocolError> {
        self.read_json("grades.json")
    }

    pub fn write_partial_reports(&self, reports: &[ScoreReport]) -> Result<(), ProtocolError> {
        self.write_json("reports_partial.json", &reports)
    }

    pub fn read_partial_reports(&self) -> Result<Vec<ScoreReport>, ProtocolError> {
        if self.has("reports_partial.json") {
            self.read_json("reports_partial.json")
        } else {
            Ok(Vec::new())
        }
    }

    pub fn clear_partial_reports(&self) -> Result<(), ProtocolError> {
        let path = self.dir.join("reports_partial.json");
        if path.is_file() {
            std::fs::remove_file(&path).map_err(|e| ProtocolError::Store {
                path,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn write_partial_verdicts(
        &self,
        verdicts: &[ComparisonVerdict],
    ) -> Result<(), ProtocolError> {
        self.write_json("verdicts_partial.json", &verdicts)
    }

    pub fn read_partial_verdicts(&self) -> Result<Vec<ComparisonVerdict>, ProtocolError> {
        if self.has("verdicts_partial.json") {
            self.read_json("verdicts_partial.json")
        } else {
            Ok(Vec::new())
        }
    }

    pub fn clear_partial_verdicts(&self) -> Result<(), ProtocolError> {
        let path = self.dir.join("verdicts_partial.json");
        if path.is_file() {
            std::fs::remove_file(&path).map_err(|e| ProtocolError::Store {
                path,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn write_transcript(&self, key: &str, text: &str) -> std::io::Result<()> {
        std::fs::write(self.dir.join("transcripts").join(format!("{key}.txt")), text)
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        self.dir.join("transcripts")
    }

    /// Generic named artifact, for analysis outputs and probe passes.
    pub fn write_named<T: Serialize>(&self, name: &str, value: &T) -> Result<(), ProtocolError> {
        self.write_json(name, value)
    }

    pub fn read_named<T: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<T, ProtocolError> {
        self.read_json(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), ProtocolError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| ProtocolError::Store {
            path,
            message: e.to_string(),
        })
    }
}
