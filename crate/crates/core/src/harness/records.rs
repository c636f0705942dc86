//! One `EvalRecord` per responder interaction, plus the JSONL persistence
//! for records and raw-response fixtures.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::epistemic::Answer;
use crate::grader::{Score, Verdict};
use crate::instance::Rung;
use crate::io::{read_jsonl, write_jsonl, FileMeta, IoError};

/// Everything recorded about one responder interaction.
///
/// For deterministic responders (oracle, constant, scripted) latency is 0
/// and the timestamp is omitted so reruns are byte-identical. A record with
/// `transport_error` set was never graded: its verdict and score are
/// placeholders and metrics exclude it from accuracy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub instance_id: String,
    pub rung: Rung,
    pub responder: String,
    pub prompt: String,
    pub raw_response: String,
    pub verdict: Verdict,
    pub truth: Answer,
    pub score: Score,
    /// True when the reply parsed to Invalid (counted incorrect, tallied
    /// separately).
    pub invalid: bool,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
}

impl EvalRecord {
    pub fn is_transport_failure(&self) -> bool {
        self.transport_error.is_some()
    }
}

/// A raw reply keyed by instance id: the line format of scripted fixtures
/// and of reply files collected offline for `grade`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub id: String,
    pub response: String,
}

/// Writes records as JSONL behind the standard meta line. Refuses an empty
/// list.
pub fn write_records(path: &Path, meta: &FileMeta, records: &[EvalRecord]) -> Result<(), IoError> {
    write_jsonl(path, meta, records)
}

pub fn read_records(path: &Path) -> Result<(Option<FileMeta>, Vec<EvalRecord>), IoError> {
    read_jsonl(path)
}

pub fn write_raw_responses(
    path: &Path,
    meta: &FileMeta,
    responses: &[RawResponse],
) -> Result<(), IoError> {
    write_jsonl(path, meta, responses)
}

/// Loads a raw-response file into an id-keyed map.
pub fn read_raw_responses(path: &Path) -> Result<HashMap<String, String>, IoError> {
    let (_, responses): (_, Vec<RawResponse>) = read_jsonl(path)?;
    Ok(responses.into_iter().map(|r| (r.id, r.response)).collect())
}
