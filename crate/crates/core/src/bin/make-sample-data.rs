//! Regenerates the bundled sample corpus and its replay fixtures.
//!
//! Everything under `data/sample-corpus/` is synthetic and fully determined
//! by this program:
//!
//! * 22 essays across 4 workshop themes (ids 1-6, 7-11, 12-16, 17-22), with
//!   section lengths inside the documented word bands;
//! * 231 pairwise replay fixtures produced by the zero-noise synthetic judge
//!   over a searched latent-quality vector whose tournament sums span
//!   exactly [-34, +37], so the graded corpus exercises the full reported
//!   grade range without touching the band endpoints;
//! * bundled human scores solved in closed form so that the Pearson
//!   correlation between the pairwise grades and the human means is exactly
//!   0.716.
//!
//! Run from the repository root:
//!
//! ```text
//! cargo run -p essayjudge --bin make-sample-data
//! ```

use essayjudge::aggregate::{grade_pairwise, GradeProvenance};
use essayjudge::analysis::pearson;
use essayjudge::corpus::{
    default_levels, default_rubric, Essay, EssayId, HumanScoreRecord, WorkshopTheme,
};
use essayjudge::judge::{
    build_prompt, parse_comparison_response, JudgeBackend, NoiseParams, Protocol,
    SyntheticBackend, SyntheticConfig,
};
use essayjudge::protocols::schedule_round_robin;
use essayjudge::{Corpus, GradeBand, VerdictMatrix};
use rand_chacha::ChaCha12Rng;
use rand_core::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::path::Path;

/// Seed for the bundled fixture responses.
const SAMPLE_SEED: u64 = 7;
/// Correlation the bundled human scores are solved to produce.
const TARGET_R: f64 = 0.716;
/// Tournament extremes the latent qualities are searched for.
const TARGET_MAX_SUM: i64 = 37;
const TARGET_MIN_SUM: i64 = -34;

fn main() {
    let root = Path::new("data/sample-corpus");
    std::fs::create_dir_all(root.join("fixtures")).expect("create sample corpus directory");

    let themes = theme_specs();
    let essays = generate_essays(&themes);
    let corpus = Corpus {
        themes: themes.iter().map(|t| t.theme()).collect(),
        essays,
        rubric: default_rubric(),
        levels: default_levels(),
        human_scores: None,
        warnings: Vec::new(),
    };

    let qualities = search_quality_vector(&corpus);
    let (matrix, fixtures) = judge_all_pairs(&corpus, &qualities);
    let grades = grade_pairwise(
        &matrix,
        &GradeBand::default(),
        GradeProvenance {
            run_id: "sample-generation".to_string(),
            normalization: "theoretical-range".to_string(),
            repeats: 1,
        },
    )
    .expect("complete matrix grades");

    let sums: Vec<i64> = grades.grades.iter().map(|g| g.sum.unwrap()).collect();
    assert_eq!(*sums.iter().max().unwrap(), TARGET_MAX_SUM);
    assert_eq!(*sums.iter().min().unwrap(), TARGET_MIN_SUM);

    let grade_vec: Vec<f64> = grades.grades.iter().map(|g| g.grade).collect();
    let human = solve_human_totals(&grade_vec);
    let r = pearson(&grade_vec, &human, "llm", "human").unwrap().r;
    assert!(
        (r - TARGET_R).abs() < 1e-12,
        "solved correlation {r} missed the target"
    );

    write_json(&root.join("themes.json"), &corpus.themes);
    write_json(&root.join("essays.json"), &corpus.essays);
    write_json(&root.join("rubric.json"), &corpus.rubric);
    write_json(&root.join("levels.json"), &corpus.levels);
    write_json(
        &root.join("human_scores.json"),
        &human_records(&corpus, &human),
    );
    for (key, text) in &fixtures {
        std::fs::write(root.join("fixtures").join(format!("{key}.txt")), text)
            .expect("write fixture");
    }
    std::fs::write(root.join("README.md"), corpus_readme()).expect("write corpus README");

    let reloaded = essayjudge::corpus::load_corpus(root).expect("generated corpus loads");
    assert!(
        reloaded.warnings.is_empty(),
        "generated essays must sit inside the word bands: {:?}",
        reloaded.warnings
    );
    assert!(essayjudge::corpus::validate_human_scores(&reloaded).is_empty());

    println!(
        "sample corpus written: 22 essays, 4 themes, {} fixtures", fixtures.len()
    );
    println!(
        "tournament sums span [{TARGET_MIN_SUM}, {TARGET_MAX_SUM}]; grades {:.2}..{:.2}",
        grade_vec.iter().cloned().fold(f64::INFINITY, f64::min),
        grade_vec.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    println!("human correlation solved to r = {r:.12}");
}

// --- themes and essay text ---

struct ThemeSpec {
    id: &'static str,
    title: &'static str,
    focus: &'static str,
    artifact: &'static str,
    discipline: &'static str,
    stakeholder: &'static str,
    brief: &'static str,
}

impl ThemeSpec {
    fn theme(&self) -> WorkshopTheme {
        WorkshopTheme {
            theme_id: self.id.to_string(),
            title: self.title.to_string(),
            description: self.description(),
        }
    }

    fn description(&self) -> String {
        format!(
            "{brief} Over seven three-hour sessions the group moves from problem framing to a \
             defended concept: early meetings map the context around {focus} and collect the \
             constraints that matter to {stakeholder}; the middle sessions alternate divergent \
             ideation with convergent scoring until one direction survives; an interim report \
             forces the team to state its assumptions about {discipline} out loud; and the \
             closing sessions are spent prototyping, testing, and preparing a final \
             presentation of {artifact}. Students work in one team throughout and are expected \
             to carry a clearly identifiable individual responsibility in addition to the \
             shared outcome. The course values the quality of the process as much as the \
             final artifact: a traceable path from observation to requirement to design \
             decision counts for more than an impressive but unexplained result.",
            brief = self.brief,
            focus = self.focus,
            stakeholder = self.stakeholder,
            discipline = self.discipline,
            artifact = self.artifact,
        )
    }
}

fn theme_specs() -> Vec<ThemeSpec> {
    vec![
        ThemeSpec {
            id: "kinematic-synthesis",
            title: "Kinematic Synthesis",
            focus: "the gap between train doors and station platforms",
            artifact: "a retractable bridging mechanism",
            discipline: "mechanism design",
            stakeholder: "passengers with reduced mobility",
            brief: "This workshop asks students to reduce the boarding risk created by the \
                    gap between train doors and station platforms, a hazard that falls \
                    hardest on wheelchair users, small children, and travellers with heavy \
                    luggage.",
        },
        ThemeSpec {
            id: "all-electric-airplane",
            title: "All Electric Airplane",
            focus: "carbon emissions from short-haul aviation",
            artifact: "an all-electric regional aircraft concept",
            discipline: "electric propulsion sizing",
            stakeholder: "regional airlines",
            brief: "This workshop asks students to confront the carbon footprint of \
                    short-haul flying by developing the case for an all-electric regional \
                    aircraft, from battery energy density through route economics.",
        },
        ThemeSpec {
            id: "radioactive-waste",
            title: "Radioactive Waste",
            focus: "the long-term disposal of spent nuclear fuel",
            artifact: "a staged deep-repository roadmap",
            discipline: "systems engineering",
            stakeholder: "host communities",
            brief: "This workshop asks students to plan the disposal of high-level \
                    radioactive waste, balancing geological containment options against the \
                    social concerns of the communities asked to host them.",
        },
        ThemeSpec {
            id: "monster-track",
            title: "Monster Track",
            focus: "bridge collapses caused by overloaded trucks",
            artifact: "a load-screening checkpoint scheme",
            discipline: "structural monitoring",
            stakeholder: "highway authorities",
            brief: "This workshop asks students to stop bridge failures caused by trucks \
                    loaded beyond the capacity the spans were designed for, a problem that \
                    mixes enforcement, sensing, and infrastructure economics.",
        },
    ]
}

/// Theme index for each essay id 1..=22: 1-6, 7-11, 12-16, 17-22.
fn theme_index(ordinal: usize) -> usize {
    match ordinal {
        1..=6 => 0,
        7..=11 => 1,
        12..=16 => 2,
        _ => 3,
    }
}

fn generate_essays(themes: &[ThemeSpec]) -> Vec<Essay> {
    (1..=22)
        .map(|ordinal| {
            let theme = &themes[theme_index(ordinal)];
            let mut rng = ChaCha12Rng::seed_from_u64(0xE55A_u64 * 1000 + ordinal as u64);
            Essay {
                essay_id: EssayId::new(ordinal.to_string()),
                theme_id: theme.id.to_string(),
                project_description: section_text(&mut rng, theme, Section::Project, 330),
                contribution: section_text(&mut rng, theme, Section::Contribution, 330),
                reflection: section_text(&mut rng, theme, Section::Reflection, 230),
            }
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Section {
    Project,
    Contribution,
    Reflection,
}

fn section_text(rng: &mut ChaCha12Rng, theme: &ThemeSpec, section: Section, target: usize) -> String {
    let pool = sentence_pool(theme, section);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    shuffle(rng, &mut order);
    let mut out = String::new();
    let mut words = 0usize;
    for &index in order.iter().cycle() {
        if words >= target {
            break;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&pool[index]);
        words += pool[index].split_whitespace().count();
    }
    out
}

fn sentence_pool(theme: &ThemeSpec, section: Section) -> Vec<String> {
    let f = theme.focus;
    let a = theme.artifact;
    let d = theme.discipline;
    let s = theme.stakeholder;
    let templates: Vec<String> = match section {
        Section::Project => vec![
            format!("Our team spent the seven workshop sessions on {f}, starting from a deliberately broad survey of who is harmed today and under what circumstances the harm is worst."),
            format!("The stated goal of the project was to deliver {a} that every member of the group could defend technically in front of an unfamiliar audience."),
            format!("During the ideation sessions we mapped user journeys on the whiteboard, clustered the recurring pain points, and voted with limited stickers so that no single voice could dominate the direction."),
            format!("The interim report forced us to write down the assumptions about {d} that we had been carrying implicitly, and two of them did not survive the first round of questions."),
            format!("We built a deliberately rough prototype early, tested it against the success criteria we had agreed in week two, and rebuilt the weakest subsystem instead of polishing the parts that already worked."),
            format!("A short benchmark review of existing approaches showed us where {a} could differ meaningfully from what {s} can already buy, and where we would simply be repeating known answers."),
            format!("Design thinking methods gave the work its rhythm: divergent sketching when we felt stuck, convergent scoring when the option list grew past what we could evaluate honestly."),
            format!("Feedback from the interim session pushed us to simplify the concept considerably and to quantify its benefit for {s} rather than asserting it."),
            format!("By the final session we could present {a} together with the measurements and assumptions behind it, and we closed by naming the trade-offs we would revisit with more time."),
            format!("We kept a shared log of decisions so that the path from observation to requirement to design choice stayed traceable when the concept changed under us."),
            format!("The conclusion we defended was modest but concrete: the concept addresses the sharpest part of {f} first and leaves the long tail to a later iteration."),
            format!("Splitting the analysis of {f} into independent questions let pairs of teammates work in parallel without blocking one another before the weekly merge."),
        ],
        Section::Contribution => vec![
            format!("My main responsibility was coordinating the {d} analysis and keeping the models different teammates built consistent with one another."),
            format!("I prepared the comparison matrix the team used to score candidate concepts, and I kept it honest by writing down the scoring rules before anyone saw the options."),
            format!("When the schedule slipped after the interim report, I reorganized our task board, negotiated new internal milestones, and made the replanning visible instead of silent."),
            format!("I drafted the sections of the interim report that covered {f}, then rewrote them after teammates marked every claim we could not yet support."),
            format!("I built the first mock-up of {a} and ran the quick tests that exposed its two most serious weaknesses while there was still time to react."),
            format!("In discussions I often took the role of devil's advocate, which was uncomfortable but sharpened the justification we could offer for the final design."),
            format!("I collected the background material on {d} and summarized it in two pages so the whole team argued from the same facts."),
            format!("I facilitated two of the ideation sessions and paid attention to drawing out the quieter members before the loud consensus formed."),
            format!("I owned the slide deck and the rehearsal plan for the final presentation, including the dry run where we timed every section twice."),
            format!("Before we presented, I checked our claims about {s} against published figures so that the numbers in the conclusion were ones we could stand behind."),
            format!("Between sessions I kept the shared repository tidy, merging the week's documents and flagging the open questions for the next meeting."),
            format!("I volunteered to track the risks we had accepted, and I raised the two that matured so the team could respond with a plan rather than a scramble."),
        ],
        Section::Reflection => vec![
            format!("The clearest lesson of the workshops was that structured methods matter most precisely when the team disagrees, because they turn an argument into a procedure."),
            format!("I learned to treat criticism of {a} as information about the design rather than a verdict on me, which made the feedback sessions useful instead of bruising."),
            format!("Working on {f} showed me how strongly the framing of a problem determines which solutions look feasible at all."),
            format!("I became noticeably more comfortable presenting unfinished work and asking for targeted feedback on the specific part I distrusted."),
            format!("My planning habits improved: I now break ambiguous goals into intermediate results that can be checked, and I can feel the difference when I skip that step."),
            format!("Listening carefully to teammates from different backgrounds changed my view of {d} from a fixed toolbox into a set of choices with owners and reasons."),
            format!("The habit I most want to carry forward is prototyping early, because every hour spent on the rough version saved several on the polished one."),
            format!("Managing the trade-off between depth and schedule was the hardest personal lesson, and I did not manage it gracefully until the final two weeks."),
            format!("I noticed that my confidence in group settings grew once I had a defined responsibility, and I want to seek that clarity deliberately next time."),
        ],
    };
    templates
}

fn shuffle(rng: &mut ChaCha12Rng, values: &mut [usize]) {
    for i in (1..values.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        values.swap(i, j);
    }
}

// --- latent quality search ---

/// Zero-noise verdict sums for a quality vector, using the documented
/// threshold model directly.
fn threshold_sums(qualities: &[f64], noise: &NoiseParams) -> Vec<i64> {
    let n = qualities.len();
    let mut sums = vec![0i64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let value = noise.verdict_from_gap(qualities[i] - qualities[j]) as i64;
            sums[i] += value;
            sums[j] -= value;
        }
    }
    sums
}

/// Search seeded quality vectors until the zero-noise tournament reproduces
/// the target extreme sums and the bundled consistency pair: essay 19 holds
/// a slight edge over essay 13.
fn search_quality_vector(corpus: &Corpus) -> BTreeMap<String, f64> {
    let noise = NoiseParams::zero_noise();
    let ids: Vec<&str> = corpus.essays.iter().map(|e| e.essay_id.as_str()).collect();
    let index_13 = ids.iter().position(|id| *id == "13").unwrap();
    let index_19 = ids.iter().position(|id| *id == "19").unwrap();

    for search_seed in 0u64..5_000_000 {
        let mut rng = ChaCha12Rng::seed_from_u64(0x0511_0000 + search_seed);
        let qualities: Vec<f64> = (0..ids.len())
            .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect();
        let gap_13_19 = qualities[index_13] - qualities[index_19];
        if noise.verdict_from_gap(gap_13_19) != -1 {
            continue;
        }
        let sums = threshold_sums(&qualities, &noise);
        if sums.iter().max() == Some(&TARGET_MAX_SUM)
            && sums.iter().min() == Some(&TARGET_MIN_SUM)
        {
            println!("quality vector found at search seed {search_seed}");
            return ids
                .iter()
                .zip(&qualities)
                .map(|(id, q)| (id.to_string(), *q))
                .collect();
        }
    }
    panic!("no quality vector satisfied the targets within the search budget");
}

// --- fixtures ---

/// Judge every scheduled pair with the zero-noise synthetic backend and
/// collect both the fixture texts and the resulting matrix.
fn judge_all_pairs(
    corpus: &Corpus,
    qualities: &BTreeMap<String, f64>,
) -> (VerdictMatrix, Vec<(String, String)>) {
    let mut config = SyntheticConfig::new(SAMPLE_SEED).with_noise(NoiseParams::zero_noise());
    for (id, quality) in qualities {
        config = config.with_quality(id, *quality);
    }
    let backend = SyntheticBackend::new(config);

    let essay_ids = corpus.essay_ids();
    let pairs = schedule_round_robin(&essay_ids).expect("22 essays schedule");
    let mut fixtures = Vec::with_capacity(pairs.len());
    let mut verdicts = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        let essay_a = corpus.essay(a).unwrap();
        let essay_b = corpus.essay(b).unwrap();
        let theme = corpus.theme_for(essay_a);
        let bundle = build_prompt(
            Protocol::Pairwise,
            theme,
            essay_a,
            Some(essay_b),
            Some(&corpus.rubric),
            None,
        )
        .expect("pairwise bundle")
        .with_run_index(1);
        let raw = backend.dispatch(&bundle).expect("synthetic dispatch");
        let verdict =
            parse_comparison_response(&raw, (a.clone(), b.clone()), 1).expect("parse own output");
        fixtures.push((bundle.fixture_key(), raw));
        verdicts.push(verdict);
    }
    (
        VerdictMatrix {
            essay_ids,
            verdicts,
        },
        fixtures,
    )
}

// --- human score solve ---

/// Solve per-essay human totals whose Pearson correlation with the grade
/// vector is exactly `TARGET_R`.
///
/// Writing a for the centered grades and c for a centered direction
/// orthogonal to a, any mix a + k*c correlates with the grades at
/// 1/sqrt(1 + k^2 |c|^2 / |a|^2); choosing k = (|a|/|c|) * sqrt(1/r^2 - 1)
/// pins the correlation to r, and a positive affine rescale into a plausible
/// human range leaves it untouched.
fn solve_human_totals(grades: &[f64]) -> Vec<f64> {
    let n = grades.len();
    let mean = grades.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = grades.iter().map(|g| g - mean).collect();

    // Deterministic direction, centered and projected orthogonal to the grades.
    let mut rng = ChaCha12Rng::seed_from_u64(0xC0_FACE);
    let raw_direction: Vec<f64> = (0..n)
        .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5)
        .collect();
    let direction_mean = raw_direction.iter().sum::<f64>() / n as f64;
    let direction: Vec<f64> = raw_direction.iter().map(|v| v - direction_mean).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let projection = dot(&direction, &centered) / dot(&centered, &centered);
    let orthogonal: Vec<f64> = direction
        .iter()
        .zip(&centered)
        .map(|(v, a)| v - projection * a)
        .collect();

    let norm_a = dot(&centered, &centered).sqrt();
    let norm_c = dot(&orthogonal, &orthogonal).sqrt();
    let k = (norm_a / norm_c) * (1.0 / (TARGET_R * TARGET_R) - 1.0).sqrt();
    let mixed: Vec<f64> = centered
        .iter()
        .zip(&orthogonal)
        .map(|(a, c)| a + k * c)
        .collect();

    // Rescale into a plausible committee range around 23 points.
    let peak = mixed.iter().cloned().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = 3.4 / peak;
    mixed.iter().map(|v| 23.0 + scale * v).collect()
}

/// Split each solved total across the three rubric criteria so the parts sum
/// back exactly in floating point: the first two shares are the total third
/// rounded to a dyadic grid (exact doubling), and the remainder difference is
/// exact by Sterbenz's lemma because 2p lies within [total/2, 2*total].
fn human_records(corpus: &Corpus, totals: &[f64]) -> Vec<HumanScoreRecord> {
    let names: Vec<&str> = corpus
        .rubric
        .criteria
        .iter()
        .map(|c| c.name.as_str())
        .collect();
    corpus
        .essays
        .iter()
        .zip(totals)
        .map(|(essay, &total)| {
            let p = (total / 3.0 * 64.0).round() / 64.0;
            let last = total - 2.0 * p;
            let mut per_criterion = BTreeMap::new();
            per_criterion.insert(names[0].to_string(), p);
            per_criterion.insert(names[1].to_string(), p);
            per_criterion.insert(names[2].to_string(), last);
            HumanScoreRecord {
                essay_id: essay.essay_id.clone(),
                rater_id: "faculty-panel".to_string(),
                per_criterion,
                total,
            }
        })
        .collect()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) {
    let mut text = serde_json::to_string_pretty(value).expect("serialize");
    text.push('\n');
    std::fs::write(path, text).expect("write json");
}

fn corpus_readme() -> &'static str {
    "# Sample corpus\n\n\
     Synthetic evaluation corpus: 22 generated essays across 4 workshop themes\n\
     (ids 1-6, 7-11, 12-16, 17-22), the default 3x10-point rubric with its\n\
     performance levels, bundled human scores, and a complete set of pairwise\n\
     replay fixtures under `fixtures/`.\n\n\
     No text here comes from real students; essays, scores, and judge\n\
     responses are all generated by `cargo run -p essayjudge --bin\n\
     make-sample-data`, which documents how the fixture verdicts and the\n\
     human score vector were constructed. Do not edit these files by hand:\n\
     fixture filenames are content hashes of the exact prompts, so editing\n\
     the corpus invalidates them loudly.\n"
}
