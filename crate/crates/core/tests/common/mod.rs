//! Test-only brute-force reference simulator, written before (and kept
//! independent of) the engine in `src/epistemic`. Worlds are plain status
//! vectors, sets are `Vec`s, and every definition is applied literally:
//! no bitmasks, no per-agent partitioning, no shared code with the engine.

#![allow(dead_code)]

use delbench_core::epistemic::Answer;

pub type BruteWorld = Vec<u8>;

/// A Kripke model carried around as explicit lists.
#[derive(Debug, Clone)]
pub struct BruteModel {
    pub n: usize,
    pub obs: Vec<Vec<u8>>,
    pub actual: BruteWorld,
    pub worlds: Vec<BruteWorld>,
}

/// All 2^n status vectors, in ascending binary order with agent 0 as the
/// least significant digit (matching the engine's enumeration order).
pub fn all_worlds(n: usize) -> Vec<BruteWorld> {
    let mut out = Vec::with_capacity(1 << n);
    for code in 0u32..(1 << n) {
        out.push((0..n).map(|i| (code >> i & 1) as u8).collect());
    }
    out
}

pub fn brute_initial(n: usize, obs: Vec<Vec<u8>>, actual: BruteWorld) -> BruteModel {
    assert_eq!(actual.len(), n);
    assert_eq!(obs.len(), n);
    BruteModel { n, obs, actual, worlds: all_worlds(n) }
}

fn marked(w: &BruteWorld) -> usize {
    w.iter().filter(|&&s| s == 1).count()
}

/// `lower = true` keeps worlds with at least `q` marked agents, otherwise at
/// most `q`.
pub fn brute_apply_bound(m: &BruteModel, lower: bool, q: usize) -> BruteModel {
    let keep = |w: &BruteWorld| if lower { marked(w) >= q } else { marked(w) <= q };
    assert!(keep(&m.actual), "bound untruthful in the actual world");
    let worlds = m.worlds.iter().filter(|w| keep(w)).cloned().collect();
    BruteModel { worlds, ..m.clone() }
}

/// Literal definition: agent `i` cannot tell `w` from `v` iff they agree on
/// every coordinate the agent observes.
pub fn brute_indist(w: &BruteWorld, v: &BruteWorld, agent: usize, obs: &[Vec<u8>]) -> bool {
    (0..w.len()).all(|j| obs[agent][j] == 0 || w[j] == v[j])
}

/// Agent `i`'s answer when the actual world is (hypothetically) `base`.
pub fn brute_answer(m: &BruteModel, base: &BruteWorld, agent: usize) -> Answer {
    let candidates: Vec<&BruteWorld> =
        m.worlds.iter().filter(|w| brute_indist(w, base, agent, &m.obs)).collect();
    assert!(!candidates.is_empty(), "candidate set may never be empty");
    if candidates.iter().all(|w| w[agent] == 1) {
        Answer::Yes
    } else if candidates.iter().all(|w| w[agent] == 0) {
        Answer::No
    } else {
        Answer::Unknown
    }
}

/// One simultaneous public round: every agent answers against the pre-round
/// model, then worlds whose hypothetical answer vector differs in any
/// coordinate are eliminated.
pub fn brute_round(m: &BruteModel) -> (Vec<Answer>, BruteModel) {
    let vector: Vec<Answer> = (0..m.n).map(|i| brute_answer(m, &m.actual, i)).collect();
    let worlds: Vec<BruteWorld> = m
        .worlds
        .iter()
        .filter(|w| (0..m.n).all(|i| brute_answer(m, w, i) == vector[i]))
        .cloned()
        .collect();
    (vector, BruteModel { worlds, ..m.clone() })
}

/// Full protocol: initial model, bound, `round - 1` rounds, then the queried
/// agent's answer. Returns the answer and the per-round (vector, size-after)
/// history.
#[allow(clippy::too_many_arguments)]
pub fn brute_solve(
    n: usize,
    obs: Vec<Vec<u8>>,
    actual: BruteWorld,
    lower: bool,
    q: usize,
    queried: usize,
    round: usize,
) -> (Answer, Vec<(Vec<Answer>, usize)>) {
    let mut m = brute_apply_bound(&brute_initial(n, obs, actual), lower, q);
    let mut trace = Vec::new();
    for _ in 1..round {
        let (vector, next) = brute_round(&m);
        trace.push((vector, next.worlds.len()));
        m = next;
    }
    (brute_answer(&m, &m.actual.clone(), queried), trace)
}

/// Full observation matrix with a zero diagonal, as nested vectors.
pub fn full_obs(n: usize) -> Vec<Vec<u8>> {
    (0..n).map(|i| (0..n).map(|j| (i != j) as u8).collect()).collect()
}

/// First round (1-based) at which `agent`'s answer over rounds `1..=max`
/// equals `target`, sticking thereafter; `None` if it never does.
#[allow(clippy::too_many_arguments)]
pub fn brute_first_round_of(
    n: usize,
    obs: Vec<Vec<u8>>,
    actual: BruteWorld,
    lower: bool,
    q: usize,
    agent: usize,
    target: Answer,
    max_round: usize,
) -> Option<usize> {
    let mut m = brute_apply_bound(&brute_initial(n, obs, actual), lower, q);
    for round in 1..=max_round {
        if brute_answer(&m, &m.actual.clone(), agent) == target {
            return Some(round);
        }
        let (_, next) = brute_round(&m);
        m = next;
    }
    None
}
