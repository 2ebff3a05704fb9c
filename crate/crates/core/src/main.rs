//! Command-line entry point wiring corpus -> protocols -> aggregation ->
//! analysis, with run persistence and report emission.
//!
//! Exit codes: 0 success, 1 validation failure, 2 missing input, 3 backend
//! failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use essayjudge::aggregate::{
    average_scores, grade_pairwise, grade_scoring, round2, EssayStats, GradeProvenance,
    GradeSheet,
};
use essayjudge::analysis::{
    correlation_csv, discordance_pairwise, discordance_per_run, distribution_csv,
    distribution_summary, pearson, render_rate_percent, simulate_stability, AnalysisError,
    AnalysisReport, StabilityParams, ANALYSIS_SCHEMA_VERSION,
};
use essayjudge::corpus::{load_corpus, validate_human_scores, Corpus, CorpusError, GradeBand};
use essayjudge::judge::{
    make_backend, JudgeBackendConfig, JudgeError, LiveConfig, NoiseParams, SyntheticConfig,
};
use essayjudge::protocols::{
    corpus_hash, group_reports, ExecutionOptions, ProtocolError, RunManifest, RunStatus,
    RunStore, Runner, MANIFEST_SCHEMA_VERSION,
};
use essayjudge::Protocol;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_MISSING_INPUT: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser)]
#[command(name = "essayjudge", version, about = "LLM-as-judge essay evaluation toolkit")]
struct Cli {
    /// Corpus directory (themes.json, essays.json, rubric.json, levels.json).
    #[arg(long, global = true, default_value = "data/sample-corpus")]
    corpus: PathBuf,

    /// Output directory for run artifacts.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,

    /// Seed for the synthetic backend and simulations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Judge backend.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Synthetic)]
    backend: BackendArg,

    /// Maximum concurrent judge calls.
    #[arg(long = "parallel", global = true, default_value_t = 4)]
    parallel: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Live,
    Replay,
    Synthetic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProtocolArg {
    Unguided,
    Rubric,
    Pairwise,
    /// Import human scores from the corpus as a grade sheet.
    HumanImport,
}

impl ProtocolArg {
    fn name(self) -> &'static str {
        match self {
            ProtocolArg::Unguided => "unguided",
            ProtocolArg::Rubric => "rubric",
            ProtocolArg::Pairwise => "pairwise",
            ProtocolArg::HumanImport => "human-import",
        }
    }
}

#[derive(Args, Clone, Copy)]
struct BandArgs {
    #[arg(long, default_value_t = 18.0)]
    band_floor: f64,
    #[arg(long, default_value_t = 30.0)]
    band_ceiling: f64,
    #[arg(long, default_value_t = 18.0)]
    pass_threshold: f64,
    #[arg(long, default_value_t = 24.0)]
    distinction_threshold: f64,
}

impl BandArgs {
    fn band(&self) -> GradeBand {
        GradeBand {
            floor: self.band_floor,
            ceiling: self.band_ceiling,
            pass_threshold: self.pass_threshold,
            distinction_threshold: self.distinction_threshold,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct NoiseArgs {
    /// Synthetic score noise, in points.
    #[arg(long, default_value_t = 2.0)]
    score_sigma: f64,
    /// Synthetic comparison noise, in quality units.
    #[arg(long, default_value_t = 0.1)]
    comparison_sigma: f64,
    /// Quality gap beyond which a comparison is at least slight (+-1).
    #[arg(long, default_value_t = 0.05)]
    slight_threshold: f64,
    /// Quality gap beyond which a comparison is clear (+-2).
    #[arg(long, default_value_t = 0.25)]
    clear_threshold: f64,
}

impl NoiseArgs {
    fn noise(&self) -> NoiseParams {
        NoiseParams {
            score_sigma: self.score_sigma,
            comparison_sigma: self.comparison_sigma,
            slight_threshold: self.slight_threshold,
            clear_threshold: self.clear_threshold,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus directory and print findings.
    Validate,

    /// Run an evaluation protocol and persist its artifacts.
    Evaluate {
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Scoring runs per essay.
        #[arg(long, default_value_t = 6)]
        repeats: u32,
        /// Replay fixture directory (defaults to <corpus>/fixtures).
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Explicit run id (default derives from corpus hash and config).
        #[arg(long)]
        run_id: Option<String>,
        /// Resume an aborted run by id.
        #[arg(long)]
        resume: Option<String>,
        /// Full round-robin passes for pairwise consistency probes.
        #[arg(long, default_value_t = 1)]
        pairwise_repeats: u32,
        /// Also judge every pair with positions swapped, reported separately.
        #[arg(long, default_value_t = false)]
        swap_positions: bool,
        #[command(flatten)]
        band: BandArgs,
        #[command(flatten)]
        noise: NoiseArgs,
    },

    /// Compute agreement statistics over a persisted run.
    Analyze {
        /// Run directory (e.g. runs/<run-id>).
        #[arg(long)]
        run: PathBuf,
        /// Human score file overriding the corpus human_scores.json.
        #[arg(long)]
        human: Option<PathBuf>,
        /// Fail unless a correlation against human scores can be computed.
        #[arg(long, default_value_t = false)]
        correlate: bool,
    },

    /// Monte Carlo rank-stability experiment over the synthetic judge.
    Simulate {
        #[arg(long, default_value_t = 22)]
        essays: usize,
        #[arg(long, default_value_t = 6)]
        repeats: u32,
        #[arg(long, default_value_t = 20)]
        seeds: u32,
        /// Output file for the stability report.
        #[arg(long = "report", default_value = "stability.json")]
        report_path: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
    },

    /// Print a human-readable summary of a persisted run.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        let code = match &e {
            CorpusError::MissingFile { .. } | CorpusError::Io { .. } => EXIT_MISSING_INPUT,
            CorpusError::Parse { .. } | CorpusError::Validation { .. } => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        let code = match &e {
            ProtocolError::Contract(_) => EXIT_MISSING_INPUT,
            ProtocolError::Store { .. } => EXIT_MISSING_INPUT,
            ProtocolError::Score { source, .. } | ProtocolError::Pair { source, .. } => {
                match source {
                    JudgeError::Contract(_) => EXIT_MISSING_INPUT,
                    _ => EXIT_BACKEND,
                }
            }
        };
        CliError::new(code, e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::new(EXIT_VALIDATION, e.to_string())
    }
}

impl From<JudgeError> for CliError {
    fn from(e: JudgeError) -> Self {
        let code = match &e {
            JudgeError::Contract(_) => EXIT_MISSING_INPUT,
            _ => EXIT_BACKEND,
        };
        CliError::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate => cmd_validate(&cli),
        Command::Evaluate { .. } => cmd_evaluate(&cli),
        Command::Analyze { run, human, correlate } => {
            cmd_analyze(&cli, run, human.as_deref(), *correlate)
        }
        Command::Simulate {
            essays,
            repeats,
            seeds,
            report_path,
            noise,
        } => cmd_simulate(&cli, *essays, *repeats, *seeds, report_path, noise),
        Command::Report { run } => cmd_report(run),
    }
}

fn cmd_validate(cli: &Cli) -> Result<(), CliError> {
    let corpus = load_corpus(&cli.corpus)?;
    for warning in &corpus.warnings {
        println!("warning: {warning}");
    }
    let findings = validate_human_scores(&corpus);
    for finding in &findings {
        println!("finding: {finding}");
    }
    if findings.is_empty() {
        println!(
            "corpus OK: {} essays, {} themes, rubric {} points, human scores {}",
            corpus.essays.len(),
            corpus.themes.len(),
            corpus.rubric.total_points,
            match &corpus.human_scores {
                Some(records) => format!("{} records", records.len()),
                None => "absent".to_string(),
            }
        );
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_VALIDATION,
            format!("{} human score finding(s)", findings.len()),
        ))
    }
}

/// Deterministic run id from everything that shapes a run's outputs.
fn derive_run_id<T: serde::Serialize>(inputs: &T) -> String {
    let canonical = serde_json::to_vec(inputs).expect("run id inputs serialize");
    let digest = Sha256::digest(&canonical);
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

fn backend_config(cli: &Cli, fixtures: Option<&Path>, noise: &NoiseArgs) -> Result<JudgeBackendConfig, CliError> {
    Ok(match cli.backend {
        BackendArg::Synthetic => JudgeBackendConfig::Synthetic(
            SyntheticConfig::new(cli.seed).with_noise(noise.noise()),
        ),
        BackendArg::Replay => {
            let dir = fixtures
                .map(Path::to_path_buf)
                .unwrap_or_else(|| cli.corpus.join("fixtures"));
            if !dir.is_dir() {
                return Err(CliError::new(
                    EXIT_MISSING_INPUT,
                    format!("replay fixture directory {} does not exist", dir.display()),
                ));
            }
            JudgeBackendConfig::Replay { fixture_dir: dir }
        }
        BackendArg::Live => {
            let mut config = LiveConfig::from_env()?;
            config.max_in_flight = cli.parallel.max(1);
            JudgeBackendConfig::Live(config)
        }
    })
}

fn cmd_evaluate(cli: &Cli) -> Result<(), CliError> {
    let Command::Evaluate {
        protocol,
        repeats,
        fixtures,
        run_id,
        resume,
        pairwise_repeats,
        swap_positions,
        band,
        noise,
    } = &cli.command
    else {
        unreachable!("dispatched from run()");
    };
    let band = band.band();
    band.validate()
        .map_err(|m| CliError::new(EXIT_MISSING_INPUT, m))?;
    if *repeats < 1 {
        return Err(CliError::new(EXIT_MISSING_INPUT, "repeats must be at least 1"));
    }

    let corpus = load_corpus(&cli.corpus)?;
    let digest = corpus_hash(&corpus);
    let config = backend_config(cli, fixtures.as_deref(), noise)?;

    let run_id = match (resume, run_id) {
        (Some(id), _) => id.clone(),
        (None, Some(id)) => id.clone(),
        (None, None) => derive_run_id(&(
            &digest,
            protocol.name(),
            &config,
            cli.seed,
            *repeats,
            *pairwise_repeats,
            *swap_positions,
            &band,
        )),
    };
    let store = RunStore::create(&cli.out, &run_id)?;
    if resume.is_some() && store.has("manifest.json") {
        let manifest = store.read_manifest()?;
        if manifest.corpus_hash != digest {
            return Err(CliError::new(
                EXIT_MISSING_INPUT,
                format!(
                    "corpus hash {digest} does not match the resumed run's {}",
                    manifest.corpus_hash
                ),
            ));
        }
    }

    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        run_id: run_id.clone(),
        protocol: protocol.name().to_string(),
        corpus_path: cli.corpus.display().to_string(),
        corpus_hash: digest,
        backend: config.clone(),
        repeats: match protocol {
            ProtocolArg::Unguided | ProtocolArg::Rubric => *repeats,
            _ => 1,
        },
        seed: Some(cli.seed),
        parallelism: cli.parallel.max(1),
        pairwise_repeats: *pairwise_repeats,
        swap_positions: *swap_positions,
        band,
        judge_calls: 0,
        status: RunStatus::Partial,
    };

    if matches!(protocol, ProtocolArg::HumanImport) {
        import_human_grades(&corpus, &band, &store, &mut manifest)?;
        println!("run {run_id}: imported human scores into {}", store.dir().display());
        return Ok(());
    }

    let backend = make_backend(&config)?;
    let options = ExecutionOptions {
        parallelism: cli.parallel.max(1),
        pairwise_repeats: *pairwise_repeats,
        swap_positions: *swap_positions,
        resume: resume.is_some(),
    };
    let runner = Runner::new(&corpus, backend.clone())
        .with_options(options)
        .with_store(&store);

    let provenance = GradeProvenance {
        run_id: run_id.clone(),
        normalization: "theoretical-range".to_string(),
        repeats: manifest.repeats,
    };

    let outcome: Result<GradeSheet, ProtocolError> = match protocol {
        ProtocolArg::Unguided | ProtocolArg::Rubric => {
            let result = match protocol {
                ProtocolArg::Unguided => runner.run_unguided(*repeats),
                _ => runner.run_with_rubric(&corpus.rubric, Some(&corpus.levels), *repeats),
            };
            result.and_then(|runsets| {
                let reports: Vec<_> = runsets
                    .iter()
                    .flat_map(|r| r.reports.iter().cloned())
                    .collect();
                store.write_reports(&reports)?;
                let stats = average_scores(&runsets).map_err(|e| {
                    ProtocolError::Contract(format!("averaging failed: {e}"))
                })?;
                Ok(grade_scoring(protocol.name(), &stats, &band, provenance.clone()))
            })
        }
        ProtocolArg::Pairwise => runner.run_pairwise(&corpus.rubric).and_then(|outcome| {
            store.write_verdicts(&outcome.matrix)?;
            for (i, pass) in outcome.extra_passes.iter().enumerate() {
                store.write_named(&format!("verdicts_pass{}.json", i + 2), pass)?;
            }
            if let Some(swap) = &outcome.swap_report {
                store.write_named("swap_report.json", swap)?;
            }
            grade_pairwise(&outcome.matrix, &band, provenance.clone())
                .map_err(|e| ProtocolError::Contract(e.to_string()))
        }),
        ProtocolArg::HumanImport => unreachable!("handled above"),
    };

    manifest.judge_calls = backend.calls();
    match outcome {
        Ok(sheet) => {
            store.write_grades(&sheet)?;
            manifest.status = RunStatus::Complete;
            store.write_manifest(&manifest)?;
            println!(
                "run {run_id}: {} complete, {} judge call(s), artifacts in {}",
                protocol.name(),
                manifest.judge_calls,
                store.dir().display()
            );
            Ok(())
        }
        Err(e) => {
            store.write_manifest(&manifest)?;
            eprintln!(
                "run {run_id}: aborted with partial artifacts in {}; resume with --resume {run_id}",
                store.dir().display()
            );
            Err(e.into())
        }
    }
}

fn import_human_grades(
    corpus: &Corpus,
    band: &GradeBand,
    store: &RunStore,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    let Some(records) = &corpus.human_scores else {
        return Err(CliError::new(
            EXIT_MISSING_INPUT,
            "human-import requires human_scores.json in the corpus",
        ));
    };
    let findings = validate_human_scores(corpus);
    if !findings.is_empty() {
        return Err(CliError::new(
            EXIT_VALIDATION,
            format!("human scores invalid:\n{}", findings.join("\n")),
        ));
    }
    let stats: Vec<EssayStats> = corpus
        .essays
        .iter()
        .filter_map(|essay| {
            let totals: Vec<f64> = records
                .iter()
                .filter(|r| r.essay_id == essay.essay_id)
                .map(|r| r.total)
                .collect();
            if totals.is_empty() {
                return None;
            }
            let min = totals.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mean = totals.iter().sum::<f64>() / totals.len() as f64;
            Some(EssayStats {
                essay_id: essay.essay_id.clone(),
                min,
                max,
                mean,
                values: totals,
            })
        })
        .collect();
    if stats.is_empty() {
        return Err(CliError::new(EXIT_MISSING_INPUT, "no human score records"));
    }
    let provenance = GradeProvenance {
        run_id: manifest.run_id.clone(),
        normalization: "none".to_string(),
        repeats: 1,
    };
    let sheet = grade_scoring("human-import", &stats, band, provenance);
    store.write_grades(&sheet)?;
    manifest.status = RunStatus::Complete;
    store.write_manifest(manifest)?;
    Ok(())
}

fn cmd_analyze(
    cli: &Cli,
    run_dir: &Path,
    human_path: Option<&Path>,
    correlate: bool,
) -> Result<(), CliError> {
    let store = RunStore::open(run_dir)?;
    let manifest = store.read_manifest()?;

    let corpus_dir = if cli.corpus == Path::new("data/sample-corpus")
        && Path::new(&manifest.corpus_path).exists()
    {
        PathBuf::from(&manifest.corpus_path)
    } else {
        cli.corpus.clone()
    };
    let mut corpus = load_corpus(&corpus_dir)?;
    if let Some(path) = human_path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(EXIT_MISSING_INPUT, format!("cannot read {}: {e}", path.display()))
        })?;
        corpus.human_scores = Some(serde_json::from_str(&text).map_err(|e| {
            CliError::new(EXIT_VALIDATION, format!("bad human scores {}: {e}", path.display()))
        })?);
    }

    let sheet = store.read_grades()?;
    let grade_rows: Vec<(essayjudge::EssayId, f64)> = sheet
        .grades
        .iter()
        .map(|g| (g.essay_id.clone(), g.grade))
        .collect();

    let human_means = corpus.human_means();
    let correlation = if manifest.protocol == "human-import" {
        None
    } else {
        let paired: Vec<(essayjudge::EssayId, f64, f64)> = grade_rows
            .iter()
            .filter_map(|(id, grade)| {
                human_means
                    .iter()
                    .find(|(hid, _)| hid == id)
                    .map(|(_, human)| (id.clone(), *grade, *human))
            })
            .collect();
        if paired.len() >= 3 {
            let x: Vec<f64> = paired.iter().map(|(_, g, _)| *g).collect();
            let y: Vec<f64> = paired.iter().map(|(_, _, h)| *h).collect();
            let result = pearson(
                &x,
                &y,
                &format!("llm-{}", manifest.protocol),
                "human-mean",
            )?;
            store.write_text(
                "correlation.csv",
                &correlation_csv(&paired, &result.series_x_label, &result.series_y_label),
            )?;
            Some(result)
        } else {
            None
        }
    };
    if correlate && correlation.is_none() {
        return Err(CliError::new(
            EXIT_MISSING_INPUT,
            "human scores required: provide --human or a corpus human_scores.json \
             covering at least 3 graded essays",
        ));
    }

    let grades_only: Vec<f64> = grade_rows.iter().map(|(_, g)| *g).collect();
    let distribution = distribution_summary(&grades_only, &sheet.band);
    store.write_text("distribution.csv", &distribution_csv(&grade_rows))?;

    let (disc_pairwise, disc_per_run) = match manifest.protocol.as_str() {
        "pairwise" => {
            let matrix = store.read_verdicts()?;
            (Some(discordance_pairwise(&matrix, &sheet)?), None)
        }
        "unguided" | "rubric" => {
            let reports = store.read_reports()?;
            let runsets = group_reports(
                match manifest.protocol.as_str() {
                    "unguided" => Protocol::Unguided,
                    _ => Protocol::Rubric,
                },
                &corpus.essay_ids(),
                reports,
            );
            let stats = average_scores(&runsets)
                .map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
            (None, Some(discordance_per_run(&runsets, &stats)?))
        }
        _ => (None, None),
    };

    let report = AnalysisReport {
        schema_version: ANALYSIS_SCHEMA_VERSION,
        run_id: manifest.run_id.clone(),
        protocol: manifest.protocol.clone(),
        correlation,
        distribution,
        discordance_pairwise: disc_pairwise,
        discordance_per_run: disc_per_run,
    };
    store.write_named("analysis.json", &report)?;

    print_analysis(&report);
    Ok(())
}

fn print_analysis(report: &AnalysisReport) {
    println!("analysis of run {} ({})", report.run_id, report.protocol);
    let d = &report.distribution;
    println!(
        "  grades: n {:>3}  min {:>6.2}  max {:>6.2}  mean {:>6.2}",
        d.n, d.min, d.max, d.mean
    );
    println!(
        "  below pass: {}  above distinction: {}",
        d.below_pass, d.above_distinction
    );
    if let Some(c) = &report.correlation {
        println!(
            "  correlation {} vs {} over {} essays: r = {:.3}",
            c.series_x_label, c.series_y_label, c.n, c.r
        );
    }
    if let Some(disc) = &report.discordance_pairwise {
        println!(
            "  pairwise discordance: {} of {} comparisons differ from the final ranking ({})",
            disc.discordant,
            disc.total,
            render_rate_percent(disc.rate)
        );
    }
    if let Some(disc) = &report.discordance_per_run {
        println!(
            "  per-run discordance: mean {:.1} of {} pairs differ from the mean ranking ({})",
            disc.discordant,
            disc.total,
            render_rate_percent(disc.rate)
        );
    }
}

fn cmd_simulate(
    cli: &Cli,
    essays: usize,
    repeats: u32,
    seeds: u32,
    report_path: &Path,
    noise: &NoiseArgs,
) -> Result<(), CliError> {
    let params = StabilityParams {
        n_essays: essays,
        repeats,
        noise: noise.noise(),
        seeds,
        base_seed: cli.seed,
    };
    let report = simulate_stability(&params)?;
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    text.push('\n');
    if let Some(parent) = report_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).ok();
        }
    }
    std::fs::write(report_path, text).map_err(|e| {
        CliError::new(EXIT_MISSING_INPUT, format!("cannot write {}: {e}", report_path.display()))
    })?;

    let wins = report
        .per_seed
        .iter()
        .filter(|s| s.pairwise_rate < s.per_run_rate)
        .count();
    println!(
        "stability over {} seeds ({} essays, {} repeats):",
        report.params.seeds, report.params.n_essays, report.params.repeats
    );
    println!(
        "  mean discordance   pairwise {:>8}   per-run scoring {:>8}",
        render_rate_percent(report.mean_pairwise_rate),
        render_rate_percent(report.mean_per_run_rate)
    );
    println!(
        "  pairwise is the more stable protocol in {wins}/{} seeds",
        report.per_seed.len()
    );
    for warning in &report.warnings {
        println!("  warning: {warning}");
    }
    println!("report written to {}", report_path.display());
    Ok(())
}

fn cmd_report(run_dir: &Path) -> Result<(), CliError> {
    let store = RunStore::open(run_dir)?;
    let manifest = store.read_manifest()?;
    let sheet = store.read_grades()?;

    println!(
        "run {} | protocol {} | backend {} | {} judge call(s) | status {:?}",
        manifest.run_id,
        manifest.protocol,
        match &manifest.backend {
            JudgeBackendConfig::Live(c) => format!("live ({})", c.model),
            JudgeBackendConfig::Replay { fixture_dir } =>
                format!("replay ({})", fixture_dir.display()),
            JudgeBackendConfig::Synthetic(c) => format!("synthetic (seed {})", c.seed),
        },
        manifest.judge_calls,
        manifest.status
    );
    println!(
        "band [{}, {}], pass {}, distinction > {}",
        manifest.band.floor,
        manifest.band.ceiling,
        manifest.band.pass_threshold,
        manifest.band.distinction_threshold
    );
    println!();
    let has_sums = sheet.grades.iter().any(|g| g.sum.is_some());
    if has_sums {
        println!("{:>8} {:>6} {:>11} {:>8}", "essay", "sum", "normalized", "grade");
        for entry in &sheet.grades {
            println!(
                "{:>8} {:>6} {:>11.6} {:>8.2}",
                entry.essay_id.to_string(),
                entry.sum.unwrap_or(0),
                entry.normalized.unwrap_or(0.0),
                round2(entry.grade)
            );
        }
    } else {
        println!("{:>8} {:>7} {:>7} {:>8}", "essay", "min", "max", "grade");
        let stats_of = |id: &essayjudge::EssayId| sheet.stats.iter().find(|s| &s.essay_id == id);
        for entry in &sheet.grades {
            let (min, max) = stats_of(&entry.essay_id)
                .map(|s| (s.min, s.max))
                .unwrap_or((entry.grade, entry.grade));
            println!(
                "{:>8} {:>7.2} {:>7.2} {:>8.2}",
                entry.essay_id.to_string(),
                min,
                max,
                round2(entry.grade)
            );
        }
    }

    if store.has("analysis.json") {
        let analysis: AnalysisReport = store.read_named("analysis.json")?;
        println!();
        print_analysis(&analysis);
    }
    Ok(())
}
