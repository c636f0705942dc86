//! Token-level scanner that rejects prompts asserting the queried agent's
//! own status. Questions ("Is your forehead muddy?") and whether/if clauses
//! are scaffolding, not assertions, and are exempt.

use super::Setting;

/// One offending sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakageHit {
    pub sentence: String,
}

/// Scans `prompt` for declarative sentences that pair a queried-agent
/// subject ("you are ...", "<name> has ...") with either status phrase.
pub fn scan_leakage(prompt: &str, queried_name: &str, setting: &Setting) -> Vec<LeakageHit> {
    let statuses =
        [setting.status_positive.to_lowercase(), setting.status_negative.to_lowercase()];
    let name = queried_name.to_lowercase();
    let markers: Vec<String> = ["are", "were", "have", "had", "is", "was", "has"]
        .iter()
        .flat_map(|verb| [format!("you {verb} "), format!("{name} {verb} ")])
        .collect();

    let mut hits = Vec::new();
    for sentence in split_sentences(prompt) {
        if sentence.trim_end().ends_with('?') {
            continue;
        }
        let lower = sentence.to_lowercase();
        for marker in &markers {
            let Some(at) = lower.find(marker.as_str()) else { continue };
            // "determine whether you are muddy" is a goal statement, not
            // an assertion.
            let prefix = &lower[..at];
            if prefix.ends_with("whether ") || prefix.ends_with("if ") {
                continue;
            }
            let tail = &lower[at + marker.len()..];
            if statuses.iter().any(|s| tail.starts_with(s.as_str()) || tail.contains(s.as_str()))
            {
                hits.push(LeakageHit { sentence: sentence.trim().to_string() });
                break;
            }
        }
    }
    hits
}

fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (idx, ch) in text.char_indices() {
        if matches!(ch, '.' | '!' | '?' | '\n') {
            let end = idx + ch.len_utf8();
            if !text[start..end].trim().is_empty() {
                out.push(&text[start..end]);
            }
            start = end;
        }
    }
    if !text[start..].trim().is_empty() {
        out.push(&text[start..]);
    }
    out
}
