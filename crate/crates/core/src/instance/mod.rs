//! Puzzle instances: the parameter tuple the solver consumes, its JSONL
//! wire form, validation, and ground-truth labeling.

mod grid;
mod sample;

pub use grid::{enumerate_rung_grid, GenerationGrid};
pub use sample::{sample_rung3, Rung3Grid};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epistemic::{
    self, Announcement, Answer, BoundType, EpistemicError, GroundTruth, ObservationMatrix, World,
    MAX_AGENTS,
};
use crate::narrative::NarrativeError;

/// The three benchmark variants: the classic puzzle, its recast surface,
/// and the random-observation generalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rung {
    I,
    II,
    III,
}

impl Rung {
    pub fn number(&self) -> u8 {
        match self {
            Rung::I => 1,
            Rung::II => 2,
            Rung::III => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Rung::I),
            2 => Some(Rung::II),
            3 => Some(Rung::III),
            _ => None,
        }
    }
}

impl std::fmt::Display for Rung {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rung::I => f.write_str("I"),
            Rung::II => f.write_str("II"),
            Rung::III => f.write_str("III"),
        }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance {id} is invalid: {message}")]
    Invalid { id: String, message: String },
    #[error("instance {id}: {source}")]
    Solver { id: String, source: EpistemicError },
    #[error("empty grid: {0}")]
    EmptyGrid(String),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error(
        "rejection budget exhausted after {attempts} attempts \
         ({accepted}/{requested} accepted); the grid is over-constrained"
    )]
    RejectionBudgetExhausted { attempts: usize, accepted: usize, requested: usize },
    #[error(transparent)]
    Narrative(#[from] NarrativeError),
}

/// One puzzle: the full parameter tuple plus its narrative dressing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuzzleInstance {
    pub id: String,
    pub rung: Rung,
    pub n: usize,
    /// Number of agents with status 1.
    pub k: usize,
    pub bound: Announcement,
    /// The queried round j (1-based).
    pub round: usize,
    pub obs: ObservationMatrix,
    pub statuses: World,
    /// Index of the agent being asked; generated instances always use 0.
    pub queried: usize,
    pub setting: String,
    pub names: Vec<String>,
    /// Generation seed or grid coordinates, for provenance.
    pub seed: String,
}

/// An instance paired with the solver's verdict and public history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInstance {
    pub instance: PuzzleInstance,
    pub ground_truth: Answer,
    /// Public answer vectors for rounds 1..j-1.
    pub trace: Vec<Vec<Answer>>,
}

/// The exact JSONL line shape for instance files. Unlabeled files omit the
/// last two fields; `solve` fills them in.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceRecord {
    pub id: String,
    pub rung: Rung,
    pub n: usize,
    pub k: usize,
    pub bound_type: BoundType,
    pub bound_value: u8,
    pub round: usize,
    pub observation_matrix: Vec<Vec<u8>>,
    pub statuses: Vec<u8>,
    pub queried_agent: usize,
    pub setting: String,
    pub names: Vec<String>,
    pub seed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<Answer>>>,
}

impl From<&PuzzleInstance> for InstanceRecord {
    fn from(inst: &PuzzleInstance) -> Self {
        InstanceRecord {
            id: inst.id.clone(),
            rung: inst.rung,
            n: inst.n,
            k: inst.k,
            bound_type: inst.bound.bound_type,
            bound_value: inst.bound.value,
            round: inst.round,
            observation_matrix: inst.obs.rows(),
            statuses: inst.statuses.statuses(),
            queried_agent: inst.queried,
            setting: inst.setting.clone(),
            names: inst.names.clone(),
            seed: inst.seed.clone(),
            ground_truth: None,
            trace: None,
        }
    }
}

impl From<&LabeledInstance> for InstanceRecord {
    fn from(labeled: &LabeledInstance) -> Self {
        let mut record = InstanceRecord::from(&labeled.instance);
        record.ground_truth = Some(labeled.ground_truth);
        record.trace = Some(labeled.trace.clone());
        record
    }
}

impl TryFrom<InstanceRecord> for PuzzleInstance {
    type Error = InstanceError;

    fn try_from(record: InstanceRecord) -> Result<Self, Self::Error> {
        let invalid = |message: String| InstanceError::Invalid { id: record.id.clone(), message };
        let obs = ObservationMatrix::from_rows(&record.observation_matrix)
            .map_err(|e| invalid(format!("observation_matrix: {e}")))?;
        let statuses = World::from_statuses(&record.statuses)
            .map_err(|e| invalid(format!("statuses: {e}")))?;
        let inst = PuzzleInstance {
            id: record.id,
            rung: record.rung,
            n: record.n,
            k: record.k,
            bound: Announcement { bound_type: record.bound_type, value: record.bound_value },
            round: record.round,
            obs,
            statuses,
            queried: record.queried_agent,
            setting: record.setting,
            names: record.names,
            seed: record.seed,
        };
        validate_instance(&inst)?;
        Ok(inst)
    }
}

impl TryFrom<InstanceRecord> for LabeledInstance {
    type Error = InstanceError;

    fn try_from(record: InstanceRecord) -> Result<Self, Self::Error> {
        let id = record.id.clone();
        let (ground_truth, trace) = match (record.ground_truth, record.trace.clone()) {
            (Some(g), Some(t)) => (g, t),
            _ => {
                return Err(InstanceError::Invalid {
                    id,
                    message: "not labeled: missing ground_truth/trace (run solve first)".into(),
                })
            }
        };
        let instance = PuzzleInstance::try_from(record)?;
        if trace.len() + 1 != instance.round {
            return Err(InstanceError::Invalid {
                id: instance.id.clone(),
                message: format!(
                    "trace has {} rounds but round={} needs {}",
                    trace.len(),
                    instance.round,
                    instance.round - 1
                ),
            });
        }
        Ok(LabeledInstance { instance, ground_truth, trace })
    }
}

/// Checks every instance invariant; the first violation is reported with
/// the offending field names. Inconsistent instances are rejected, never
/// repaired.
pub fn validate_instance(inst: &PuzzleInstance) -> Result<(), InstanceError> {
    let fail = |message: String| {
        Err(InstanceError::Invalid { id: inst.id.clone(), message })
    };
    if inst.id.trim().is_empty() {
        return Err(InstanceError::Invalid { id: "<blank>".into(), message: "empty id".into() });
    }
    if inst.n == 0 || inst.n > MAX_AGENTS {
        return fail(format!("n={} outside 1..={MAX_AGENTS}", inst.n));
    }
    if inst.statuses.agent_count() != inst.n {
        return fail(format!("statuses: {} entries for n={}", inst.statuses.agent_count(), inst.n));
    }
    if inst.obs.agent_count() != inst.n {
        return fail(format!(
            "observation_matrix: {0}x{0} for n={1}",
            inst.obs.agent_count(),
            inst.n
        ));
    }
    if inst.names.len() != inst.n {
        return fail(format!("names: {} entries for n={}", inst.names.len(), inst.n));
    }
    if inst.queried >= inst.n {
        return fail(format!("queried_agent={} out of range for n={}", inst.queried, inst.n));
    }
    let popcount = inst.statuses.marked_count() as usize;
    if popcount != inst.k {
        return fail(format!("k mismatch: k={} but statuses have popcount {popcount}", inst.k));
    }
    if inst.bound.value as usize > inst.n {
        return fail(format!("bound_value={} exceeds n={}", inst.bound.value, inst.n));
    }
    let truthful = match inst.bound.bound_type {
        BoundType::Lower => inst.bound.value as usize <= inst.k,
        BoundType::Upper => inst.bound.value as usize >= inst.k,
    };
    if !truthful {
        return fail(format!(
            "untruthful bound: bound_type={:?} bound_value={} against k={}",
            inst.bound.bound_type, inst.bound.value, inst.k
        ));
    }
    if inst.obs.observes(inst.queried, inst.queried) {
        return fail(format!(
            "queried agent self-observes: observation_matrix({0},{0}) must be 0",
            inst.queried
        ));
    }
    if inst.round == 0 {
        return fail("round must be at least 1".into());
    }
    if inst.setting.trim().is_empty() {
        return fail("setting: empty id".into());
    }
    Ok(())
}

/// Solves one validated instance: full possible-worlds run up to the
/// queried round. Deterministic; narrative fields are never consulted.
pub fn ground_truth(inst: &PuzzleInstance) -> Result<GroundTruth, InstanceError> {
    validate_instance(inst)?;
    epistemic::solve(&inst.obs, &inst.statuses, inst.bound, inst.queried, inst.round)
        .map_err(|source| InstanceError::Solver { id: inst.id.clone(), source })
}

/// How the ground-truth labels of a set are distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LabelDistribution {
    pub total: usize,
    pub yes: usize,
    pub no: usize,
    pub unknown: usize,
}

impl LabelDistribution {
    pub fn from_labels(labels: impl IntoIterator<Item = Answer>) -> Self {
        let mut dist = LabelDistribution { total: 0, yes: 0, no: 0, unknown: 0 };
        for label in labels {
            dist.total += 1;
            match label {
                Answer::Yes => dist.yes += 1,
                Answer::No => dist.no += 1,
                Answer::Unknown => dist.unknown += 1,
            }
        }
        dist
    }

    pub fn fraction(&self, answer: Answer) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let count = match answer {
            Answer::Yes => self.yes,
            Answer::No => self.no,
            Answer::Unknown => self.unknown,
        };
        count as f64 / self.total as f64
    }
}

impl std::fmt::Display for LabelDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} labels: yes {} ({:.1}%), no {} ({:.1}%), unknown {} ({:.1}%)",
            self.total,
            self.yes,
            100.0 * self.fraction(Answer::Yes),
            self.no,
            100.0 * self.fraction(Answer::No),
            self.unknown,
            100.0 * self.fraction(Answer::Unknown),
        )
    }
}

/// Labels every instance with the solver verdict, in input order. Solving
/// is pure, so the work fans out across threads; the label distribution
/// comes back as a side report.
pub fn attach_ground_truth(
    instances: &[PuzzleInstance],
) -> Result<(Vec<LabeledInstance>, LabelDistribution), InstanceError> {
    let labeled: Result<Vec<LabeledInstance>, InstanceError> = instances
        .par_iter()
        .map(|inst| {
            let truth = ground_truth(inst)?;
            Ok(LabeledInstance {
                instance: inst.clone(),
                ground_truth: truth.answer,
                trace: truth.trace_vectors(),
            })
        })
        .collect();
    let labeled = labeled?;
    let dist = LabelDistribution::from_labels(labeled.iter().map(|l| l.ground_truth));
    Ok((labeled, dist))
}
