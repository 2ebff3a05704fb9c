//! Judge response parsing.
//!
//! Responses are expected to end with a fenced JSON block matching the schema
//! the prompt demanded. When the block is present it is authoritative; for
//! score responses a pattern fallback scans for "N/30" and per-criterion
//! "N/10" mentions.

use super::{verdict_value_in_range, ComparisonVerdict, JudgeError, ScoreReport};
use crate::corpus::{EssayId, Rubric};
use serde::Deserialize;
use serde_json::Value;
use std::collections::BTreeMap;

/// What rubric the score response is expected to carry its criteria from.
#[derive(Debug, Clone, Copy)]
pub enum ExpectedRubric<'a> {
    /// The fixed rubric embedded in the prompt; response criteria must match it.
    Fixed(&'a Rubric),
    /// Unguided protocol: the response must include the rubric it generated.
    Generated,
}

const SUM_TOLERANCE: f64 = 1e-6;

fn parse_err(reason: impl Into<String>, raw: &str) -> JudgeError {
    JudgeError::Parse {
        reason: reason.into(),
        raw: raw.to_string(),
    }
}

/// Candidate JSON regions of a response, most specific first: the last
/// fenced ```json block, then the outermost braced region. Callers take the
/// first candidate that deserializes.
fn json_candidates(text: &str) -> Vec<String> {
    let mut candidates = Vec::new();
    if let Some(start) = text.rfind("```json") {
        let body = &text[start + 7..];
        if let Some(end) = body.find("```") {
            candidates.push(body[..end].trim().to_string());
        }
    }
    if let (Some(start), Some(end)) = (text.find('{'), text.rfind('}')) {
        if end > start {
            candidates.push(text[start..=end].to_string());
        }
    }
    candidates
}

fn first_parsable<T: for<'de> Deserialize<'de>>(text: &str) -> Option<T> {
    json_candidates(text)
        .iter()
        .find_map(|candidate| serde_json::from_str(candidate).ok())
}

#[derive(Deserialize)]
struct RawScore {
    criteria: BTreeMap<String, f64>,
    total: f64,
    #[serde(default)]
    rationale: String,
    #[serde(default)]
    rubric: Option<Rubric>,
}

/// Parse one score response into a [`ScoreReport`].
///
/// Enforces 0 <= total <= 30 and total = sum of the per-criterion points;
/// criteria are checked against the expected rubric (fixed or generated).
pub fn parse_score_response(
    raw: &str,
    expected: ExpectedRubric<'_>,
    essay_id: &EssayId,
    run_index: u32,
) -> Result<ScoreReport, JudgeError> {
    if raw.trim().is_empty() {
        return Err(parse_err("empty response", raw));
    }

    let parsed: Option<RawScore> = first_parsable(raw);

    let (per_criterion, total, rationale, generated_rubric) = match parsed {
        Some(score) => (
            score.criteria,
            score.total,
            if score.rationale.is_empty() {
                raw.trim().to_string()
            } else {
                score.rationale
            },
            score.rubric,
        ),
        None => {
            let (criteria, total, rationale) = fallback_scan_score(raw, expected)?;
            (criteria, total, rationale, None)
        }
    };

    if !(0.0..=30.0).contains(&total) {
        return Err(parse_err(format!("total {total} outside 0..=30"), raw));
    }
    if !per_criterion.is_empty() {
        let sum: f64 = per_criterion.values().sum();
        if (sum - total).abs() > SUM_TOLERANCE {
            return Err(parse_err(
                format!("criterion sum mismatch: criteria sum to {sum} but total is {total}"),
                raw,
            ));
        }
    }

    let generated_rubric = match expected {
        ExpectedRubric::Fixed(rubric) => {
            check_criteria(&per_criterion, rubric, raw)?;
            None
        }
        ExpectedRubric::Generated => {
            let rubric = generated_rubric
                .ok_or_else(|| parse_err("missing generated rubric in unguided response", raw))?;
            rubric
                .validate()
                .map_err(|msg| parse_err(format!("generated rubric invalid: {msg}"), raw))?;
            check_criteria(&per_criterion, &rubric, raw)?;
            Some(rubric)
        }
    };

    Ok(ScoreReport {
        essay_id: essay_id.clone(),
        run_index,
        per_criterion,
        total,
        rationale,
        generated_rubric,
    })
}

fn check_criteria(
    per_criterion: &BTreeMap<String, f64>,
    rubric: &Rubric,
    raw: &str,
) -> Result<(), JudgeError> {
    for (name, points) in per_criterion {
        let Some(criterion) = rubric.criterion(name) else {
            return Err(parse_err(format!("unknown criterion {name:?}"), raw));
        };
        if *points < 0.0 || *points > criterion.max_points as f64 {
            return Err(parse_err(
                format!(
                    "criterion {name:?} score {points} outside 0..={}",
                    criterion.max_points
                ),
                raw,
            ));
        }
    }
    Ok(())
}

/// Pattern fallback when no JSON block parses: a total "N/30" plus, for fixed
/// rubrics, per-criterion "Name ... N/10" matches. Unguided responses cannot
/// fall back because the generated rubric would be unrecoverable.
fn fallback_scan_score(
    raw: &str,
    expected: ExpectedRubric<'_>,
) -> Result<(BTreeMap<String, f64>, f64, String), JudgeError> {
    let total = scan_fraction(raw, 30)
        .ok_or_else(|| parse_err("no parsable total (no JSON block and no N/30 pattern)", raw))?;

    let mut per_criterion = BTreeMap::new();
    if let ExpectedRubric::Fixed(rubric) = expected {
        for criterion in &rubric.criteria {
            if let Some(pos) = raw.find(criterion.name.as_str()) {
                let tail = &raw[pos + criterion.name.len()..];
                let line = tail.lines().next().unwrap_or("");
                if let Some(points) = scan_fraction(line, criterion.max_points) {
                    per_criterion.insert(criterion.name.clone(), points);
                }
            }
        }
    } else {
        return Err(parse_err(
            "missing generated rubric in unguided response (no JSON block)",
            raw,
        ));
    }

    Ok((per_criterion, total, raw.trim().to_string()))
}

/// First "N/den" fraction in the text, e.g. "24/30" with `den` 30.
fn scan_fraction(text: &str, den: u32) -> Option<f64> {
    let needle = format!("/{den}");
    let mut search_from = 0;
    while let Some(rel) = text[search_from..].find(&needle) {
        let pos = search_from + rel;
        // Reject longer denominators like "/300".
        let after = pos + needle.len();
        if text[after..].chars().next().is_some_and(|c| c.is_ascii_digit()) {
            search_from = after;
            continue;
        }
        let head = &text[..pos];
        let digits: String = head
            .chars()
            .rev()
            .take_while(|c| c.is_ascii_digit() || *c == '.')
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if let Ok(value) = digits.parse::<f64>() {
            return Some(value);
        }
        search_from = after;
    }
    None
}

#[derive(Deserialize)]
struct RawComparison {
    value: i64,
    #[serde(default)]
    notes: BTreeMap<String, String>,
}

/// Parse one pairwise comparison response into a verdict for `pair`.
pub fn parse_comparison_response(
    raw: &str,
    pair: (EssayId, EssayId),
    run_index: u32,
) -> Result<ComparisonVerdict, JudgeError> {
    if raw.trim().is_empty() {
        return Err(parse_err("empty response", raw));
    }
    let parsed: RawComparison = match first_parsable(raw) {
        Some(parsed) => parsed,
        None if first_parsable::<Value>(raw).is_some() => {
            return Err(parse_err("verdict value absent or malformed", raw));
        }
        None => return Err(parse_err("no JSON block found", raw)),
    };
    if !verdict_value_in_range(parsed.value) {
        return Err(parse_err(
            format!("verdict value {} outside {{-2,-1,0,+1,+2}}", parsed.value),
            raw,
        ));
    }
    Ok(ComparisonVerdict {
        pair,
        value: parsed.value as i8,
        per_criterion_notes: parsed.notes,
        run_index,
    })
}

/// Render a schema-valid score response the way the synthetic judge answers.
pub fn render_score_response(
    per_criterion: &BTreeMap<String, f64>,
    total: f64,
    rationale: &str,
    rubric: Option<&Rubric>,
) -> String {
    let mut body = serde_json::Map::new();
    body.insert(
        "criteria".to_string(),
        serde_json::to_value(per_criterion).unwrap(),
    );
    body.insert("total".to_string(), serde_json::to_value(total).unwrap());
    body.insert("rationale".to_string(), Value::String(rationale.to_string()));
    if let Some(rubric) = rubric {
        body.insert("rubric".to_string(), serde_json::to_value(rubric).unwrap());
    }
    format!(
        "{rationale}\n\n```json\n{}\n```\n",
        serde_json::to_string(&Value::Object(body)).unwrap()
    )
}

/// Render a schema-valid comparison response.
pub fn render_comparison_response(value: i8, notes: &BTreeMap<String, String>) -> String {
    let summary = match value {
        2 => "The first essay is clearly superior.",
        1 => "The first essay is slightly superior.",
        0 => "The two essays are equal.",
        -1 => "The second essay is slightly superior.",
        _ => "The second essay is clearly superior.",
    };
    let body = serde_json::json!({ "value": value, "notes": notes });
    format!("{summary}\n\n```json\n{body}\n```\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::default_rubric;

    fn id(s: &str) -> EssayId {
        EssayId::new(s)
    }

    fn score_json(a: f64, b: f64, c: f64, total: f64) -> String {
        let rubric = default_rubric();
        format!(
            "Some reasoning first.\n\n```json\n{{\"criteria\": {{\"{}\": {a}, \"{}\": {b}, \
             \"{}\": {c}}}, \"total\": {total}, \"rationale\": \"solid work\"}}\n```",
            rubric.criteria[0].name, rubric.criteria[1].name, rubric.criteria[2].name
        )
    }

    #[test]
    fn schema_valid_score_sums_to_total() {
        let rubric = default_rubric();
        let raw = score_json(8.0, 8.0, 8.0, 24.0);
        let report =
            parse_score_response(&raw, ExpectedRubric::Fixed(&rubric), &id("1"), 1).unwrap();
        assert_eq!(report.total, 24.0);
        assert_eq!(report.per_criterion.len(), 3);
        assert_eq!(report.rationale, "solid work");
        assert!(report.generated_rubric.is_none());
    }

    #[test]
    fn criterion_sum_mismatch_is_rejected() {
        let rubric = default_rubric();
        let raw = score_json(9.0, 8.0, 9.0, 27.0);
        let err =
            parse_score_response(&raw, ExpectedRubric::Fixed(&rubric), &id("1"), 1).unwrap_err();
        assert!(err.to_string().contains("criterion sum mismatch"));
    }

    #[test]
    fn out_of_range_criterion_is_rejected() {
        let rubric = default_rubric();
        let raw = score_json(11.0, 8.0, 8.0, 27.0);
        let err =
            parse_score_response(&raw, ExpectedRubric::Fixed(&rubric), &id("1"), 1).unwrap_err();
        assert!(err.to_string().contains("outside 0..=10"));
    }

    #[test]
    fn unknown_criterion_is_rejected() {
        let rubric = default_rubric();
        let raw = "```json\n{\"criteria\": {\"Creative Flair\": 8}, \"total\": 8, \
                   \"rationale\": \"x\"}\n```";
        let err =
            parse_score_response(raw, ExpectedRubric::Fixed(&rubric), &id("1"), 1).unwrap_err();
        assert!(err.to_string().contains("unknown criterion"));
    }

    #[test]
    fn unguided_requires_generated_rubric() {
        let raw = score_json(8.0, 8.0, 8.0, 24.0);
        let err = parse_score_response(&raw, ExpectedRubric::Generated, &id("1"), 1).unwrap_err();
        assert!(err.to_string().contains("missing generated rubric"));
    }

    #[test]
    fn unguided_parses_generated_rubric() {
        let rubric = default_rubric();
        let rubric_json = serde_json::to_string(&rubric).unwrap();
        let raw = format!(
            "```json\n{{\"criteria\": {{\"{}\": 7, \"{}\": 8, \"{}\": 9}}, \"total\": 24, \
             \"rationale\": \"r\", \"rubric\": {rubric_json}}}\n```",
            rubric.criteria[0].name, rubric.criteria[1].name, rubric.criteria[2].name
        );
        let report = parse_score_response(&raw, ExpectedRubric::Generated, &id("1"), 2).unwrap();
        assert_eq!(report.generated_rubric.as_ref(), Some(&rubric));
        assert_eq!(report.run_index, 2);
    }

    #[test]
    fn fallback_scans_total_and_criteria() {
        let rubric = default_rubric();
        let raw = format!(
            "The essay earns 24/30 overall.\n{}: 8/10 shows depth.\n{}: 8/10 works well.\n\
             {}: 8/10 reflects growth.",
            rubric.criteria[0].name, rubric.criteria[1].name, rubric.criteria[2].name
        );
        let report =
            parse_score_response(&raw, ExpectedRubric::Fixed(&rubric), &id("1"), 1).unwrap();
        assert_eq!(report.total, 24.0);
        assert_eq!(report.per_criterion.len(), 3);
    }

    #[test]
    fn fallback_without_total_is_an_error() {
        let rubric = default_rubric();
        let err = parse_score_response(
            "no numbers here at all",
            ExpectedRubric::Fixed(&rubric),
            &id("1"),
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("no parsable total"));
        match err {
            JudgeError::Parse { raw, .. } => assert!(raw.contains("no numbers")),
            _ => panic!("expected parse error"),
        }
    }

    /// Six transcripts whose totals span 20 to 26, the spread one essay showed
    /// across repeated rubric-guided runs.
    #[test]
    fn six_run_transcripts_span_twenty_to_twenty_six() {
        let rubric = default_rubric();
        let totals: [f64; 6] = [20.0, 26.0, 22.0, 25.0, 21.0, 24.0];
        let mut parsed = Vec::new();
        for (i, &total) in totals.iter().enumerate() {
            let a = (total / 3.0).floor();
            let c = total - 2.0 * a;
            let raw = score_json(a, a, c, total);
            let report = parse_score_response(
                &raw,
                ExpectedRubric::Fixed(&rubric),
                &id("13"),
                (i + 1) as u32,
            )
            .unwrap();
            parsed.push(report.total);
        }
        let min = parsed.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = parsed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((min, max), (20.0, 26.0));
    }

    #[test]
    fn comparison_maps_clearly_superior_second_essay() {
        let raw = "Essay b is clearly superior.\n\n```json\n{\"value\": -2, \"notes\": \
                   {\"Project Description\": \"b covers the design arc\"}}\n```";
        let verdict = parse_comparison_response(raw, (id("1"), id("2")), 1).unwrap();
        assert_eq!(verdict.value, -2);
        assert_eq!(verdict.per_criterion_notes.len(), 1);
    }

    #[test]
    fn comparison_equal_is_zero() {
        let raw = "```json\n{\"value\": 0, \"notes\": {}}\n```";
        let verdict = parse_comparison_response(raw, (id("1"), id("2")), 1).unwrap();
        assert_eq!(verdict.value, 0);
    }

    #[test]
    fn comparison_slight_edge_for_second() {
        // Mirrors the bundled consistency probe: #19 edges #13.
        let raw = "Both essays show strong reflective learning, but the second essay's \
                   broader growth gives it a slight edge.\n\n```json\n{\"value\": -1, \
                   \"notes\": {\"Reflection and Insight\": \"second essay shows broader \
                   personal growth\"}}\n```";
        let verdict = parse_comparison_response(raw, (id("13"), id("19")), 1).unwrap();
        assert_eq!(verdict.value, -1);
    }

    #[test]
    fn comparison_out_of_set_value_is_rejected() {
        let raw = "```json\n{\"value\": 3, \"notes\": {}}\n```";
        let err = parse_comparison_response(raw, (id("1"), id("2")), 1).unwrap_err();
        assert!(err.to_string().contains("outside"));
    }

    #[test]
    fn comparison_missing_value_is_rejected() {
        let raw = "```json\n{\"notes\": {}}\n```";
        let err = parse_comparison_response(raw, (id("1"), id("2")), 1).unwrap_err();
        assert!(err.to_string().contains("absent or malformed"));
    }

    #[test]
    fn zero_sum_award_holds_for_parsed_verdicts() {
        for value in [-2i8, -1, 0, 1, 2] {
            let raw = render_comparison_response(value, &BTreeMap::new());
            let verdict = parse_comparison_response(&raw, (id("1"), id("2")), 1).unwrap();
            let ((_, pa), (_, pb)) = verdict.awards();
            assert_eq!(pa + pb, 0);
        }
    }

    #[test]
    fn render_then_parse_round_trips() {
        let rubric = default_rubric();
        let mut criteria = BTreeMap::new();
        for (i, criterion) in rubric.criteria.iter().enumerate() {
            criteria.insert(criterion.name.clone(), 6.0 + i as f64);
        }
        let raw = render_score_response(&criteria, 21.0, "balanced essay", Some(&rubric));
        let report = parse_score_response(&raw, ExpectedRubric::Generated, &id("7"), 3).unwrap();
        assert_eq!(report.per_criterion, criteria);
        assert_eq!(report.total, 21.0);
        assert_eq!(report.rationale, "balanced essay");
        assert_eq!(report.generated_rubric.as_ref(), Some(&rubric));
    }

    mod round_trip_properties {
        use super::*;
        use crate::corpus::{Criterion, Rubric};
        use proptest::prelude::*;

        fn name_strategy() -> impl Strategy<Value = String> {
            // Names stress JSON escaping but stay off the code-fence marker.
            "[A-Za-z0-9 .,'\"{}\\\\-]{1,24}"
        }

        proptest! {
            #[test]
            fn score_responses_round_trip(
                criteria in proptest::collection::btree_map(name_strategy(), 0u32..=10, 3),
                rationale in "[A-Za-z0-9 .,:'\"{}\\\\\n-]{0,120}",
                run_index in 1u32..10,
            ) {
                let per_criterion: BTreeMap<String, f64> = criteria
                    .iter()
                    .map(|(name, points)| (name.clone(), *points as f64))
                    .collect();
                let total: f64 = per_criterion.values().sum();
                let rubric = Rubric {
                    criteria: criteria
                        .keys()
                        .map(|name| Criterion {
                            name: name.clone(),
                            max_points: 10,
                            descriptors: Vec::new(),
                        })
                        .collect(),
                    total_points: 30,
                };
                let raw = render_score_response(&per_criterion, total, &rationale, Some(&rubric));
                let report =
                    parse_score_response(&raw, ExpectedRubric::Generated, &id("5"), run_index)
                        .unwrap();
                prop_assert_eq!(report.per_criterion, per_criterion);
                prop_assert_eq!(report.total, total);
                if !rationale.is_empty() {
                    prop_assert_eq!(report.rationale, rationale);
                }
                prop_assert_eq!(report.generated_rubric, Some(rubric));
            }

            #[test]
            fn comparison_responses_round_trip(
                value in -2i8..=2,
                notes in proptest::collection::btree_map(
                    name_strategy(),
                    "[A-Za-z0-9 .,'\"-]{0,60}",
                    0..4,
                ),
                run_index in 1u32..10,
            ) {
                let raw = render_comparison_response(value, &notes);
                let verdict =
                    parse_comparison_response(&raw, (id("1"), id("2")), run_index).unwrap();
                prop_assert_eq!(verdict.value, value);
                prop_assert_eq!(verdict.per_criterion_notes, notes);
                prop_assert_eq!(verdict.run_index, run_index);
            }
        }
    }
}
