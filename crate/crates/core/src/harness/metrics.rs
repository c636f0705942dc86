//! Rung-level metrics: accuracy, answer distributions, the majority-vote
//! baseline, and the constant-responder diagnostic.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::records::EvalRecord;
use crate::epistemic::Answer;
use crate::grader::{Score, Verdict};
use crate::instance::Rung;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no records to report on")]
    EmptyRecords,
    #[error("majority baseline needs a non-empty label list")]
    EmptyLabels,
}

/// Accuracy of always answering the most frequent label. Ties break toward
/// the earliest label in (Yes, No, Unknown) order and are flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorityBaseline {
    pub label: Answer,
    pub accuracy: f64,
    pub tied: bool,
}

pub fn majority_baseline(labels: &[Answer]) -> Result<MajorityBaseline, MetricsError> {
    if labels.is_empty() {
        return Err(MetricsError::EmptyLabels);
    }
    let count =
        |target: Answer| labels.iter().filter(|&&l| l == target).count();
    let counts: Vec<(Answer, usize)> = Answer::ALL.iter().map(|&a| (a, count(a))).collect();
    let (label, best) = counts
        .iter()
        .copied()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp_order(&a.0)))
        .expect("three candidates");
    let tied = counts.iter().filter(|(_, c)| *c == best).count() > 1;
    Ok(MajorityBaseline { label, accuracy: best as f64 / labels.len() as f64, tied })
}

impl Answer {
    /// Tie-break order for the majority baseline: Yes before No before
    /// Unknown.
    fn cmp_order(&self, other: &Answer) -> std::cmp::Ordering {
        let rank = |a: &Answer| match a {
            Answer::Yes => 0,
            Answer::No => 1,
            Answer::Unknown => 2,
        };
        rank(self).cmp(&rank(other))
    }
}

/// Shares of each verdict among graded records; sums to 1 (within 1e-9)
/// whenever any record was graded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct AnswerDistribution {
    pub yes: f64,
    pub no: f64,
    pub unknown: f64,
    pub invalid: f64,
}

impl AnswerDistribution {
    fn from_counts(yes: usize, no: usize, unknown: usize, invalid: usize) -> Self {
        let total = yes + no + unknown + invalid;
        if total == 0 {
            return Self::default();
        }
        let f = |c: usize| c as f64 / total as f64;
        Self { yes: f(yes), no: f(no), unknown: f(unknown), invalid: f(invalid) }
    }
}

/// Metrics over one slice of records (one rung, or everything).
#[derive(Debug, Clone, Serialize)]
pub struct SliceMetrics {
    pub records: usize,
    /// Records actually graded; transport failures are excluded here.
    pub scored: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub invalid_count: usize,
    pub invalid_rate: f64,
    pub transport_failures: usize,
    pub responder_distribution: AnswerDistribution,
    pub truth_distribution: AnswerDistribution,
}

fn slice_metrics(records: &[&EvalRecord]) -> SliceMetrics {
    let graded: Vec<&&EvalRecord> =
        records.iter().filter(|r| !r.is_transport_failure()).collect();
    let scored = graded.len();
    let correct = graded.iter().filter(|r| r.score == Score::Correct).count();
    let invalid_count = graded.iter().filter(|r| r.score == Score::Invalid).count();
    let verdicts = |v: Verdict| graded.iter().filter(|r| r.verdict == v).count();
    let truths = |a: Answer| graded.iter().filter(|r| r.truth == a).count();
    SliceMetrics {
        records: records.len(),
        scored,
        correct,
        accuracy: if scored == 0 { 0.0 } else { correct as f64 / scored as f64 },
        invalid_count,
        invalid_rate: if scored == 0 { 0.0 } else { invalid_count as f64 / scored as f64 },
        transport_failures: records.len() - scored,
        responder_distribution: AnswerDistribution::from_counts(
            verdicts(Verdict::Yes),
            verdicts(Verdict::No),
            verdicts(Verdict::Unknown),
            verdicts(Verdict::Invalid),
        ),
        truth_distribution: AnswerDistribution::from_counts(
            truths(Answer::Yes),
            truths(Answer::No),
            truths(Answer::Unknown),
            0,
        ),
    }
}

/// Metrics for one responder across its rungs.
#[derive(Debug, Clone, Serialize)]
pub struct ResponderMetrics {
    pub responder: String,
    pub overall: SliceMetrics,
    pub per_rung: BTreeMap<Rung, SliceMetrics>,
    /// The responder's most frequent verdict and its share of graded
    /// records; a share near 1 flags a constant responder.
    pub constant_answer: Verdict,
    pub constant_share: f64,
    /// Majority-vote accuracy over the ground-truth labels this responder
    /// was evaluated on.
    pub majority_baseline: MajorityBaseline,
}

/// The full report: one section per responder present in the records.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub responders: Vec<ResponderMetrics>,
}

pub fn compute_metrics(records: &[EvalRecord]) -> Result<MetricsReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyRecords);
    }
    let mut responder_ids: Vec<&str> = records.iter().map(|r| r.responder.as_str()).collect();
    responder_ids.sort_unstable();
    responder_ids.dedup();

    let mut responders = Vec::with_capacity(responder_ids.len());
    for id in responder_ids {
        let mine: Vec<&EvalRecord> = records.iter().filter(|r| r.responder == id).collect();
        let graded: Vec<&EvalRecord> =
            mine.iter().copied().filter(|r| !r.is_transport_failure()).collect();

        let mut per_rung = BTreeMap::new();
        for rung in [Rung::I, Rung::II, Rung::III] {
            let slice: Vec<&EvalRecord> =
                mine.iter().copied().filter(|r| r.rung == rung).collect();
            if !slice.is_empty() {
                per_rung.insert(rung, slice_metrics(&slice));
            }
        }

        let (constant_answer, constant_share) = constant_diagnostic(&graded);
        let labels: Vec<Answer> = graded.iter().map(|r| r.truth).collect();
        let majority = if labels.is_empty() {
            MajorityBaseline { label: Answer::Yes, accuracy: 0.0, tied: false }
        } else {
            majority_baseline(&labels)?
        };
        responders.push(ResponderMetrics {
            responder: id.to_string(),
            overall: slice_metrics(&mine),
            per_rung,
            constant_answer,
            constant_share,
            majority_baseline: majority,
        });
    }
    Ok(MetricsReport { responders })
}

fn constant_diagnostic(graded: &[&EvalRecord]) -> (Verdict, f64) {
    let candidates = [Verdict::Yes, Verdict::No, Verdict::Unknown, Verdict::Invalid];
    let mut best = (Verdict::Yes, 0usize);
    for v in candidates {
        let count = graded.iter().filter(|r| r.verdict == v).count();
        if count > best.1 {
            best = (v, count);
        }
    }
    let share = if graded.is_empty() { 0.0 } else { best.1 as f64 / graded.len() as f64 };
    (best.0, share)
}

/// Plain-text table, one row per responder and rung.
pub fn render_table(report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:<8} {:>7} {:>8} {:>9} {:>9} {:>10}\n",
        "responder", "rung", "records", "accuracy", "invalid", "failed", "majority"
    ));
    for r in &report.responders {
        for (rung, m) in &r.per_rung {
            out.push_str(&format!(
                "{:<24} {:<8} {:>7} {:>8.3} {:>9.3} {:>9} {:>10}\n",
                r.responder,
                rung.to_string(),
                m.records,
                m.accuracy,
                m.invalid_rate,
                m.transport_failures,
                "-"
            ));
        }
        out.push_str(&format!(
            "{:<24} {:<8} {:>7} {:>8.3} {:>9.3} {:>9} {:>10.3}\n",
            r.responder,
            "overall",
            r.overall.records,
            r.overall.accuracy,
            r.overall.invalid_rate,
            r.overall.transport_failures,
            r.majority_baseline.accuracy,
        ));
        out.push_str(&format!(
            "{:<24} constant answer {:?} in {:.1}% of graded records\n",
            r.responder,
            r.constant_answer,
            100.0 * r.constant_share
        ));
    }
    out
}

/// Accuracy matrix as CSV: rows = responders, columns = rungs. The leading
/// `#` line carries the file provenance.
pub fn to_csv(report: &MetricsReport, meta_comment: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {meta_comment}\n"));
    out.push_str("responder,rung_I,rung_II,rung_III\n");
    for r in &report.responders {
        let cell = |rung: Rung| {
            r.per_rung.get(&rung).map(|m| format!("{:.6}", m.accuracy)).unwrap_or_default()
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.responder,
            cell(Rung::I),
            cell(Rung::II),
            cell(Rung::III)
        ));
    }
    out
}
