//! Turns raw responder text into a verdict and scores it against ground
//! truth. Only the first non-empty line counts; accepted literals are
//! "Yes", "No", and "I don't know" with surrounding whitespace, one final
//! period, and either apostrophe allowed.

use serde::{Deserialize, Serialize};

use crate::epistemic::Answer;

/// Grading knobs. Matching is case-sensitive unless the robustness flag is
/// set; only whitespace, a single trailing period, and apostrophe variants
/// are relaxed by default.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct GraderConfig {
    #[serde(default)]
    pub case_insensitive: bool,
}

/// A parsed reply: one of the three answers, or Invalid when the first
/// non-empty line matches nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
    Invalid,
}

impl Verdict {
    pub fn as_answer(&self) -> Option<Answer> {
        match self {
            Verdict::Yes => Some(Answer::Yes),
            Verdict::No => Some(Answer::No),
            Verdict::Unknown => Some(Answer::Unknown),
            Verdict::Invalid => None,
        }
    }
}

impl From<Answer> for Verdict {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Yes => Verdict::Yes,
            Answer::No => Verdict::No,
            Answer::Unknown => Verdict::Unknown,
        }
    }
}

/// The outcome of parsing one raw reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedResponse {
    pub verdict: Verdict,
    /// The first non-empty line, trimmed, before normalization.
    pub matched_line: String,
    /// Which relaxations fired, for audit.
    pub notes: Vec<String>,
}

/// Parses arbitrary responder output. Every input maps to exactly one of
/// the four verdicts; Invalid is a value, not an error.
pub fn parse_response(raw: &str, config: &GraderConfig) -> ParsedResponse {
    let Some(line) = raw.lines().find(|l| !l.trim().is_empty()) else {
        return ParsedResponse {
            verdict: Verdict::Invalid,
            matched_line: String::new(),
            notes: vec!["empty input".into()],
        };
    };
    let mut notes = Vec::new();
    let trimmed = line.trim();
    if trimmed.len() != line.len() {
        notes.push("trimmed surrounding whitespace".into());
    }
    let mut candidate = trimmed.to_string();
    if let Some(stripped) = candidate.strip_suffix('.') {
        if !stripped.ends_with('.') {
            notes.push("stripped one trailing period".into());
            candidate = stripped.to_string();
        }
    }
    if candidate.contains('\u{2019}') {
        notes.push("normalized curly apostrophe".into());
        candidate = candidate.replace('\u{2019}', "'");
    }
    let verdict = Answer::ALL
        .iter()
        .find(|a| {
            if config.case_insensitive {
                candidate.eq_ignore_ascii_case(a.surface())
            } else {
                candidate == a.surface()
            }
        })
        .map(|&a| Verdict::from(a))
        .unwrap_or(Verdict::Invalid);
    ParsedResponse { verdict, matched_line: trimmed.to_string(), notes }
}

/// How a verdict compares to the ground truth. Invalid verdicts count as
/// incorrect in accuracy but are tallied separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Score {
    Correct,
    Incorrect,
    Invalid,
}

pub fn score(parsed: &ParsedResponse, truth: Answer) -> Score {
    match parsed.verdict.as_answer() {
        None => Score::Invalid,
        Some(answer) if answer == truth => Score::Correct,
        Some(_) => Score::Incorrect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strict() -> GraderConfig {
        GraderConfig::default()
    }

    #[test]
    fn conformance_table() {
        let cases: &[(&str, Verdict)] = &[
            ("Yes", Verdict::Yes),
            ("Yes.", Verdict::Yes),
            ("No", Verdict::No),
            ("  No.  ", Verdict::No),
            ("I don't know", Verdict::Unknown),
            ("I don\u{2019}t know", Verdict::Unknown),
            ("\n  I don\u{2019}t know \nBecause the announcement ...", Verdict::Unknown),
            ("Yes\nactually, let me explain at length", Verdict::Yes),
            ("", Verdict::Invalid),
            ("   \n\t\n", Verdict::Invalid),
            ("Probably yes", Verdict::Invalid),
            ("yes", Verdict::Invalid),   // strict casing by default
            ("Yes..", Verdict::Invalid), // only one final period allowed
            ("I dont know", Verdict::Invalid),
            ("Maybe\nYes", Verdict::Invalid), // first non-empty line decides
            ("Because I see one muddy child, Yes", Verdict::Invalid),
        ];
        for (raw, expected) in cases {
            assert_eq!(parse_response(raw, &strict()).verdict, *expected, "input {raw:?}");
        }
    }

    #[test]
    fn case_insensitive_flag_relaxes_casing_only() {
        let relaxed = GraderConfig { case_insensitive: true };
        assert_eq!(parse_response("yes", &relaxed).verdict, Verdict::Yes);
        assert_eq!(parse_response("I DON'T KNOW", &relaxed).verdict, Verdict::Unknown);
        assert_eq!(parse_response("Probably yes", &relaxed).verdict, Verdict::Invalid);
    }

    #[test]
    fn notes_record_the_relaxations() {
        let parsed = parse_response("  I don\u{2019}t know. ", &strict());
        assert_eq!(parsed.verdict, Verdict::Unknown);
        assert!(parsed.notes.iter().any(|n| n.contains("whitespace")));
        assert!(parsed.notes.iter().any(|n| n.contains("period")));
        assert!(parsed.notes.iter().any(|n| n.contains("apostrophe")));
    }

    #[test]
    fn parsing_the_matched_line_is_idempotent() {
        for raw in ["Yes.", "  No ", "I don\u{2019}t know\nexplanation", "Probably yes"] {
            let first = parse_response(raw, &strict());
            let again = parse_response(&first.matched_line, &strict());
            assert_eq!(first.verdict, again.verdict, "input {raw:?}");
        }
    }

    #[test]
    fn canonical_surface_forms_round_trip() {
        for answer in Answer::ALL {
            let parsed = parse_response(answer.surface(), &strict());
            assert_eq!(parsed.verdict.as_answer(), Some(answer));
        }
    }

    #[test]
    fn scoring_matrix() {
        let yes = parse_response("Yes", &strict());
        let unknown = parse_response("I don't know", &strict());
        let invalid = parse_response("Probably", &strict());
        assert_eq!(score(&yes, Answer::Yes), Score::Correct);
        assert_eq!(score(&unknown, Answer::No), Score::Incorrect);
        assert_eq!(score(&invalid, Answer::No), Score::Invalid);
    }

    proptest! {
        // Totality: any input maps to exactly one verdict without panicking,
        // and idempotence holds on the matched line.
        #[test]
        fn parse_is_total_and_idempotent(raw in "\\PC*") {
            let parsed = parse_response(&raw, &strict());
            let again = parse_response(&parsed.matched_line, &strict());
            prop_assert_eq!(parsed.verdict, again.verdict);
        }
    }
}
