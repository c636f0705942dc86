//! Exhaustive possible-worlds engine for multi-agent status puzzles.
//!
//! The model starts from all 2^n status assignments, a public bound
//! announcement prunes it, and then agents answer "Yes" / "No" /
//! "I don't know" in simultaneous public rounds, each joint answer vector
//! acting as a further announcement. Everything here is a pure function of
//! its inputs; states are immutable once built.

mod state;
mod world;

pub use state::{initial_state, EpistemicState, WorldSet};
pub use world::{Announcement, Answer, BoundType, ObservationMatrix, World, MAX_AGENTS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpistemicError {
    #[error("agent count {0} outside supported range 1..={max}", max = MAX_AGENTS)]
    AgentCountOutOfRange(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("status entries must be 0 or 1, got {0}")]
    InvalidStatus(u8),
    #[error("agent index {agent} out of range for {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("inconsistent instance: {0}")]
    InconsistentInstance(String),
    #[error("world {0} is not in the surviving set")]
    WorldNotSurviving(String),
}

/// True iff agent `i` cannot tell worlds `w` and `v` apart: they agree on
/// every coordinate the agent observes. For each agent this is an
/// equivalence relation.
pub fn indistinguishable(
    w: &World,
    v: &World,
    agent: usize,
    obs: &ObservationMatrix,
) -> Result<bool, EpistemicError> {
    let n = obs.agent_count();
    if w.agent_count() != n || v.agent_count() != n {
        return Err(EpistemicError::DimensionMismatch(format!(
            "worlds of {} and {} agents against a {n}x{n} observation matrix",
            w.agent_count(),
            v.agent_count()
        )));
    }
    if agent >= n {
        return Err(EpistemicError::AgentOutOfRange { agent, n });
    }
    Ok((w.bits() ^ v.bits()) & obs.row_mask(agent) == 0)
}

/// One completed answer round: the joint public vector and the size of the
/// model after the vector was applied as an announcement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundEntry {
    pub answers: Vec<Answer>,
    pub surviving_after: usize,
}

/// Per-round history of a solved instance, rounds 1..j-1.
pub type RoundTrace = Vec<RoundEntry>;

/// The solver's verdict for one queried agent at one round, plus the public
/// history leading up to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    /// The queried agent's correct answer at the queried round.
    pub answer: Answer,
    /// Rounds 1..j-1, in order.
    pub rounds: RoundTrace,
}

impl GroundTruth {
    /// The public history as bare answer vectors (the wire form).
    pub fn trace_vectors(&self) -> Vec<Vec<Answer>> {
        self.rounds.iter().map(|r| r.answers.clone()).collect()
    }
}

/// Runs the full protocol: build the initial model, apply the bound, play
/// `round - 1` answer rounds, then report the queried agent's answer in
/// round `round` together with the public history.
pub fn solve(
    obs: &ObservationMatrix,
    actual: &World,
    bound: Announcement,
    queried: usize,
    round: usize,
) -> Result<GroundTruth, EpistemicError> {
    let n = obs.agent_count();
    if queried >= n {
        return Err(EpistemicError::AgentOutOfRange { agent: queried, n });
    }
    if round == 0 {
        return Err(EpistemicError::InconsistentInstance(
            "queried round must be at least 1".into(),
        ));
    }
    let mut state = initial_state(n, obs.clone(), *actual)?.apply_bound(bound)?;
    let mut rounds = Vec::with_capacity(round - 1);
    for _ in 1..round {
        let (answers, next) = state.round_update();
        rounds.push(RoundEntry { answers, surviving_after: next.surviving_count() });
        state = next;
    }
    Ok(GroundTruth { answer: state.agent_answer(queried), rounds })
}

#[cfg(test)]
mod indist_tests {
    use super::*;

    #[test]
    fn observed_coordinates_decide_indistinguishability() {
        let obs = ObservationMatrix::full_except_diagonal(2).unwrap();
        let w = |s: &[u8]| World::from_statuses(s).unwrap();
        // Agent 0 does not see itself: worlds differing only at its own
        // coordinate look the same to it.
        assert!(indistinguishable(&w(&[0, 0]), &w(&[1, 0]), 0, &obs).unwrap());
        assert!(!indistinguishable(&w(&[0, 0]), &w(&[0, 1]), 0, &obs).unwrap());
        // Agent 1 sees coordinate 0: agreement there is what matters.
        assert!(indistinguishable(&w(&[0, 1]), &w(&[0, 0]), 1, &obs).unwrap());
        assert!(!indistinguishable(&w(&[0, 1]), &w(&[1, 1]), 1, &obs).unwrap());
        // Reflexivity.
        assert!(indistinguishable(&w(&[0, 1]), &w(&[0, 1]), 0, &obs).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let obs = ObservationMatrix::full_except_diagonal(2).unwrap();
        let short = World::from_statuses(&[0]).unwrap();
        let fine = World::from_statuses(&[0, 1]).unwrap();
        assert!(indistinguishable(&short, &fine, 0, &obs).is_err());
        assert!(matches!(
            indistinguishable(&fine, &fine, 5, &obs),
            Err(EpistemicError::AgentOutOfRange { agent: 5, n: 2 })
        ));
    }
}
