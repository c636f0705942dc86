//! The pluggable responder kinds the harness can drive.

use std::path::PathBuf;

use crate::epistemic::Answer;

use super::remote::RemoteSpec;
use super::HarnessError;

/// What answers the prompts: the ground-truth oracle, a degenerate
/// constant baseline, a fixture replay, or an external chat endpoint.
#[derive(Debug, Clone)]
pub enum ResponderSpec {
    Oracle,
    Constant(Answer),
    Scripted(PathBuf),
    Remote(RemoteSpec),
}

impl ResponderSpec {
    /// Stable identifier stored in every record.
    pub fn id(&self) -> String {
        let key = |a: &Answer| match a {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        };
        match self {
            ResponderSpec::Oracle => "oracle".into(),
            ResponderSpec::Constant(a) => format!("constant:{}", key(a)),
            ResponderSpec::Scripted(path) => {
                let stem =
                    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                format!("scripted:{stem}")
            }
            ResponderSpec::Remote(spec) => format!("remote:{}", spec.model),
        }
    }

    /// Parses the CLI selector for the built-in kinds: `oracle`,
    /// `constant:<yes|no|unknown>`, `scripted:<path>`. Remote responders
    /// are looked up in the config file by name instead.
    pub fn parse_local(selector: &str) -> Result<ResponderSpec, HarnessError> {
        if selector == "oracle" {
            return Ok(ResponderSpec::Oracle);
        }
        if let Some(answer) = selector.strip_prefix("constant:") {
            let answer = match answer {
                "yes" => Answer::Yes,
                "no" => Answer::No,
                "unknown" => Answer::Unknown,
                other => {
                    return Err(HarnessError::BadSpec(format!(
                        "constant answer must be yes, no, or unknown, got \"{other}\""
                    )))
                }
            };
            return Ok(ResponderSpec::Constant(answer));
        }
        if let Some(path) = selector.strip_prefix("scripted:") {
            if path.is_empty() {
                return Err(HarnessError::BadSpec("scripted: needs a fixture path".into()));
            }
            return Ok(ResponderSpec::Scripted(PathBuf::from(path)));
        }
        Err(HarnessError::BadSpec(format!(
            "unknown responder \"{selector}\" (expected oracle, constant:<answer>, \
             scripted:<path>, or remote:<name> with a config file)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_parse() {
        assert!(matches!(ResponderSpec::parse_local("oracle"), Ok(ResponderSpec::Oracle)));
        assert!(matches!(
            ResponderSpec::parse_local("constant:no"),
            Ok(ResponderSpec::Constant(Answer::No))
        ));
        assert!(matches!(
            ResponderSpec::parse_local("scripted:replies.jsonl"),
            Ok(ResponderSpec::Scripted(_))
        ));
        assert!(ResponderSpec::parse_local("constant:maybe").is_err());
        assert!(ResponderSpec::parse_local("remote:gpt").is_err());
    }

    #[test]
    fn ids_are_stable() {
        assert_eq!(ResponderSpec::Oracle.id(), "oracle");
        assert_eq!(ResponderSpec::Constant(Answer::Unknown).id(), "constant:unknown");
        assert_eq!(
            ResponderSpec::Scripted(PathBuf::from("x/replies.jsonl")).id(),
            "scripted:replies"
        );
    }
}
