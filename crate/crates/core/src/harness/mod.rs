//! End-to-end evaluation driver: render each instance's prompt, obtain a
//! raw reply from the configured responder, grade it, and collect one
//! record per instance in input order.

mod metrics;
mod records;
mod remote;
mod responder;

pub use metrics::{
    compute_metrics, majority_baseline, render_table, to_csv, AnswerDistribution,
    MajorityBaseline, MetricsError, MetricsReport, ResponderMetrics, SliceMetrics,
};
pub use records::{
    read_raw_responses, read_records, write_raw_responses, write_records, EvalRecord, RawResponse,
};
pub use remote::{RemoteOutcome, RemoteSpec};
pub use responder::ResponderSpec;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::epistemic::Answer;
use crate::grader::{parse_response, score, GraderConfig, Verdict};
use crate::instance::LabeledInstance;
use crate::io::IoError;
use crate::narrative::{render_prompt, NarrativeContext, NarrativeError, PromptBundle};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Narrative(#[from] NarrativeError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("fixture is missing a response for instance {0}")]
    MissingFixture(String),
    #[error("responder spec: {0}")]
    BadSpec(String),
    #[error("credential environment variable {0} is not set")]
    MissingCredentials(String),
}

/// Rendering and grading knobs for one evaluation run.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub narrative: NarrativeContext,
    pub grader: GraderConfig,
}

/// Renders prompts for every labeled instance, in order.
pub fn render_all(
    labeled: &[LabeledInstance],
    options: &EvalOptions,
) -> Result<Vec<PromptBundle>, HarnessError> {
    labeled
        .iter()
        .map(|l| render_prompt(&l.instance, &l.trace, &options.narrative).map_err(Into::into))
        .collect()
}

fn grade_into_record(
    labeled: &LabeledInstance,
    prompt: &PromptBundle,
    responder_id: &str,
    raw: String,
    grader: &GraderConfig,
) -> EvalRecord {
    let parsed = parse_response(&raw, grader);
    let outcome = score(&parsed, labeled.ground_truth);
    EvalRecord {
        instance_id: labeled.instance.id.clone(),
        rung: labeled.instance.rung,
        responder: responder_id.to_string(),
        prompt: prompt.text.clone(),
        raw_response: raw,
        verdict: parsed.verdict,
        truth: labeled.ground_truth,
        score: outcome,
        invalid: parsed.verdict == Verdict::Invalid,
        latency_ms: 0,
        attempts: 1,
        timestamp_ms: None,
        transport_error: None,
    }
}

/// Grades a raw reply per instance id against rendered prompts: the shared
/// path behind scripted responders and offline grading.
pub fn grade_raw_responses(
    labeled: &[LabeledInstance],
    prompts: &[PromptBundle],
    raw_by_id: &HashMap<String, String>,
    responder_id: &str,
    grader: &GraderConfig,
) -> Result<Vec<EvalRecord>, HarnessError> {
    labeled
        .iter()
        .zip(prompts)
        .map(|(l, p)| {
            let raw = raw_by_id
                .get(&l.instance.id)
                .ok_or_else(|| HarnessError::MissingFixture(l.instance.id.clone()))?;
            Ok(grade_into_record(l, p, responder_id, raw.clone(), grader))
        })
        .collect()
}

fn unix_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Runs one responder over a labeled instance list. Records come back in
/// instance order regardless of completion order; oracle, constant, and
/// scripted runs are fully deterministic.
pub fn run_eval(
    labeled: &[LabeledInstance],
    spec: &ResponderSpec,
    options: &EvalOptions,
) -> Result<Vec<EvalRecord>, HarnessError> {
    let prompts = render_all(labeled, options)?;
    let responder_id = spec.id();
    match spec {
        ResponderSpec::Oracle => Ok(labeled
            .iter()
            .zip(&prompts)
            .map(|(l, p)| {
                let raw = l.ground_truth.surface().to_string();
                grade_into_record(l, p, &responder_id, raw, &options.grader)
            })
            .collect()),
        ResponderSpec::Constant(answer) => Ok(labeled
            .iter()
            .zip(&prompts)
            .map(|(l, p)| {
                grade_into_record(
                    l,
                    p,
                    &responder_id,
                    answer.surface().to_string(),
                    &options.grader,
                )
            })
            .collect()),
        ResponderSpec::Scripted(path) => {
            let raw_by_id = records::read_raw_responses(path)?;
            grade_raw_responses(labeled, &prompts, &raw_by_id, &responder_id, &options.grader)
        }
        ResponderSpec::Remote(remote_spec) => {
            run_remote(labeled, &prompts, remote_spec, &responder_id, &options.grader)
        }
    }
}

fn run_remote(
    labeled: &[LabeledInstance],
    prompts: &[PromptBundle],
    spec: &RemoteSpec,
    responder_id: &str,
    grader: &GraderConfig,
) -> Result<Vec<EvalRecord>, HarnessError> {
    let client = remote::RemoteClient::new(spec)?;
    let slots: Mutex<Vec<Option<EvalRecord>>> = Mutex::new(vec![None; labeled.len()]);
    let next = AtomicUsize::new(0);
    let workers = spec.max_concurrent.min(labeled.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= labeled.len() {
                    break;
                }
                let l = &labeled[idx];
                let p = &prompts[idx];
                let started_at = unix_millis();
                let outcome = client.respond(&p.text);
                let mut record = match outcome.raw {
                    Some(raw) => grade_into_record(l, p, responder_id, raw, grader),
                    None => EvalRecord {
                        instance_id: l.instance.id.clone(),
                        rung: l.instance.rung,
                        responder: responder_id.to_string(),
                        prompt: p.text.clone(),
                        raw_response: String::new(),
                        verdict: Verdict::Invalid,
                        truth: l.ground_truth,
                        score: crate::grader::Score::Invalid,
                        invalid: false,
                        latency_ms: 0,
                        attempts: 1,
                        timestamp_ms: None,
                        transport_error: outcome.error.clone(),
                    },
                };
                record.latency_ms = outcome.latency_ms;
                record.attempts = outcome.attempts;
                record.timestamp_ms = Some(started_at);
                slots.lock().unwrap()[idx] = Some(record);
            });
        }
    });

    let records: Vec<EvalRecord> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every slot is filled by a worker"))
        .collect();
    Ok(records)
}

/// Convenience for tests and the oracle-closure gate.
pub fn accuracy(records: &[EvalRecord]) -> f64 {
    let graded: Vec<&EvalRecord> =
        records.iter().filter(|r| !r.is_transport_failure()).collect();
    if graded.is_empty() {
        return 0.0;
    }
    graded.iter().filter(|r| r.score == crate::grader::Score::Correct).count() as f64
        / graded.len() as f64
}

/// The label set of a run, for baselines.
pub fn truth_labels(labeled: &[LabeledInstance]) -> Vec<Answer> {
    labeled.iter().map(|l| l.ground_truth).collect()
}
