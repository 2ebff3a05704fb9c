//! Checks on the shipped sample corpus and its replay fixtures.

use essayjudge::aggregate::{grade_pairwise, round2, GradeProvenance};
use essayjudge::analysis::pearson;
use essayjudge::corpus::{load_corpus, validate_human_scores, EssayId};
use essayjudge::judge::{JudgeBackendConfig, ReplayBackend};
use essayjudge::protocols::Runner;
use essayjudge::GradeBand;
use std::path::{Path, PathBuf};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample-corpus")
}

#[test]
fn sample_corpus_mirrors_the_course_structure() {
    let corpus = load_corpus(&corpus_dir()).unwrap();
    assert_eq!(corpus.essays.len(), 22);
    assert_eq!(corpus.themes.len(), 4);
    assert_eq!(corpus.rubric.total_points, 30);
    assert_eq!(corpus.rubric.criteria.len(), 3);
    assert!(corpus.warnings.is_empty(), "{:?}", corpus.warnings);

    // Theme grouping: ids 1-6, 7-11, 12-16, 17-22.
    let theme_of = |id: usize| {
        corpus
            .essay(&EssayId::new(id.to_string()))
            .unwrap()
            .theme_id
            .clone()
    };
    for id in 1..=22 {
        let expected = match id {
            1..=6 => "kinematic-synthesis",
            7..=11 => "all-electric-airplane",
            12..=16 => "radioactive-waste",
            _ => "monster-track",
        };
        assert_eq!(theme_of(id), expected, "essay {id} grouped wrongly");
    }

    assert!(validate_human_scores(&corpus).is_empty());
    assert_eq!(corpus.human_means().len(), 22);
}

#[test]
fn word_counts_sit_inside_the_documented_bands() {
    let corpus = load_corpus(&corpus_dir()).unwrap();
    for essay in &corpus.essays {
        let words = |text: &str| text.split_whitespace().count();
        let project = words(&essay.project_description);
        let contribution = words(&essay.contribution);
        let reflection = words(&essay.reflection);
        assert!((300..=400).contains(&project), "essay {}", essay.essay_id);
        assert!((300..=400).contains(&contribution), "essay {}", essay.essay_id);
        assert!((200..=300).contains(&reflection), "essay {}", essay.essay_id);
        let total = project + contribution + reflection;
        assert!((800..=1100).contains(&total), "essay {}whole-essay length", essay.essay_id);
    }
}

#[test]
fn bundled_fixtures_replay_the_designed_tournament() {
    let corpus = load_corpus(&corpus_dir()).unwrap();
    let backend = essayjudge::judge::make_backend(&JudgeBackendConfig::Replay {
        fixture_dir: corpus_dir().join("fixtures"),
    })
    .unwrap();
    let runner = Runner::new(&corpus, backend);
    let outcome = runner.run_pairwise(&corpus.rubric).unwrap();
    assert_eq!(outcome.matrix.verdicts.len(), 231);

    // The bundled consistency pair: essay 19 holds a slight edge over 13.
    let verdict = outcome
        .matrix
        .verdict(&EssayId::new("13"), &EssayId::new("19"))
        .unwrap();
    assert_eq!(verdict.pair, (EssayId::new("13"), EssayId::new("19")));
    assert_eq!(verdict.value, -1);

    let sheet = grade_pairwise(
        &outcome.matrix,
        &GradeBand::default(),
        GradeProvenance {
            run_id: "test".to_string(),
            normalization: "theoretical-range".to_string(),
            repeats: 1,
        },
    )
    .unwrap();
    let grades: Vec<f64> = sheet.grades.iter().map(|g| g.grade).collect();
    let min = grades.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = grades.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(round2(min), 19.14);
    assert_eq!(round2(max), 29.29);

    // Correlation against the bundled human scores is the designed 0.716.
    let human: Vec<f64> = corpus.human_means().iter().map(|(_, h)| *h).collect();
    let r = pearson(&grades, &human, "llm", "human").unwrap().r;
    assert!((r - 0.716).abs() < 1e-9, "r = {r}");

    // Human totals stay inside the score scale with per-criterion splits.
    for record in corpus.human_scores.as_ref().unwrap() {
        assert!(record.total > 0.0 && record.total < 30.0);
        assert_eq!(record.per_criterion.len(), 3);
    }
}

#[test]
fn fixture_keys_match_the_current_prompt_templates() {
    // Every scheduled bundle must find its fixture; a template edit that
    // invalidates the bundled fixtures should fail here, loudly.
    let corpus = load_corpus(&corpus_dir()).unwrap();
    let backend = ReplayBackend::new(corpus_dir().join("fixtures"));
    let ids = corpus.essay_ids();
    let pairs = essayjudge::protocols::schedule_round_robin(&ids).unwrap();
    for (a, b) in pairs {
        let essay_a = corpus.essay(&a).unwrap();
        let essay_b = corpus.essay(&b).unwrap();
        let bundle = essayjudge::judge::build_prompt(
            essayjudge::Protocol::Pairwise,
            corpus.theme_for(essay_a),
            essay_a,
            Some(essay_b),
            Some(&corpus.rubric),
            None,
        )
        .unwrap();
        assert!(
            backend.fixture_path(&bundle).is_file(),
            "missing fixture for pair ({a}, {b}); regenerate with make-sample-data"
        );
    }
}
