//! The evolving Kripke model: a bitset over all 2^n candidate worlds plus
//! the observation matrix and the actual world.

use std::collections::HashMap;

use super::world::{Announcement, Answer, ObservationMatrix, World, MAX_AGENTS};
use super::EpistemicError;

/// A set of worlds stored as one bit per candidate world index (the world's
/// status bits). Exact and cheap up to the `MAX_AGENTS` cap.
#[derive(Clone, PartialEq, Eq)]
pub struct WorldSet {
    blocks: Vec<u64>,
    n: u8,
}

impl WorldSet {
    /// Every one of the 2^n worlds.
    pub fn full(n: usize) -> Self {
        let bits = 1usize << n;
        let mut blocks = vec![u64::MAX; bits.div_ceil(64)];
        if !bits.is_multiple_of(64) {
            *blocks.last_mut().unwrap() = (1u64 << (bits % 64)) - 1;
        }
        Self { blocks, n: n as u8 }
    }

    pub fn contains(&self, world_bits: u32) -> bool {
        let idx = world_bits as usize;
        self.blocks[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Member worlds in ascending bit-pattern order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut rest = block;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros();
                rest &= rest - 1;
                Some(bi as u32 * 64 + tz)
            })
        })
    }

    /// New set holding the members that satisfy `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(u32) -> bool) -> Self {
        let mut out = Self { blocks: vec![0; self.blocks.len()], n: self.n };
        for w in self.iter() {
            if keep(w) {
                out.blocks[w as usize / 64] |= 1 << (w % 64);
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }
}

impl std::fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorldSet").field("n", &self.n).field("len", &self.len()).finish()
    }
}

/// Per-agent tally of surviving worlds grouped by what the agent observes.
/// Key = world bits masked to the agent's observation row; value =
/// (worlds with the agent marked, total worlds) in that class. Dense array
/// below 2^16 keys, hash map above.
enum ClassTable {
    Dense(Vec<[u32; 2]>),
    Sparse(HashMap<u32, [u32; 2]>),
}

impl ClassTable {
    fn build(set: &WorldSet, n: usize, agent: usize, mask: u32) -> Self {
        let mut table = if n <= 16 {
            ClassTable::Dense(vec![[0, 0]; 1 << n])
        } else {
            ClassTable::Sparse(HashMap::new())
        };
        for w in set.iter() {
            let marked = w >> agent & 1;
            match &mut table {
                ClassTable::Dense(v) => {
                    let slot = &mut v[(w & mask) as usize];
                    slot[0] += marked;
                    slot[1] += 1;
                }
                ClassTable::Sparse(m) => {
                    let slot = m.entry(w & mask).or_insert([0, 0]);
                    slot[0] += marked;
                    slot[1] += 1;
                }
            }
        }
        table
    }

    fn answer_for(&self, key: u32) -> Answer {
        let [marked, total] = match self {
            ClassTable::Dense(v) => v[key as usize],
            ClassTable::Sparse(m) => m[&key],
        };
        if marked == total {
            Answer::Yes
        } else if marked == 0 {
            Answer::No
        } else {
            Answer::Unknown
        }
    }
}

/// The model at some point in the protocol. The actual world is always a
/// member of the surviving set, and the set is never empty.
#[derive(Debug, Clone)]
pub struct EpistemicState {
    obs: ObservationMatrix,
    actual: World,
    surviving: WorldSet,
    round_index: u32,
}

/// The pre-announcement model: all 2^n worlds survive, round index 0.
pub fn initial_state(
    n: usize,
    obs: ObservationMatrix,
    actual: World,
) -> Result<EpistemicState, EpistemicError> {
    if n == 0 || n > MAX_AGENTS {
        return Err(EpistemicError::AgentCountOutOfRange(n));
    }
    if actual.agent_count() != n || obs.agent_count() != n {
        return Err(EpistemicError::DimensionMismatch(format!(
            "n={n}, actual has {} agents, observation matrix is {1}x{1}",
            actual.agent_count(),
            obs.agent_count()
        )));
    }
    Ok(EpistemicState { obs, actual, surviving: WorldSet::full(n), round_index: 0 })
}

impl EpistemicState {
    pub fn agent_count(&self) -> usize {
        self.obs.agent_count()
    }

    pub fn observation_matrix(&self) -> &ObservationMatrix {
        &self.obs
    }

    pub fn actual_world(&self) -> &World {
        &self.actual
    }

    pub fn round_index(&self) -> u32 {
        self.round_index
    }

    pub fn surviving_count(&self) -> usize {
        self.surviving.len()
    }

    pub fn surviving_set(&self) -> &WorldSet {
        &self.surviving
    }

    /// Surviving worlds in ascending bit-pattern order.
    pub fn surviving_worlds(&self) -> impl Iterator<Item = World> + '_ {
        let n = self.agent_count();
        self.surviving.iter().map(move |bits| World::new(bits, n).unwrap())
    }

    /// Applies a truthful public bound announcement, pruning every world
    /// that violates it. An announcement false in the actual world is
    /// rejected: it would make the instance inconsistent.
    pub fn apply_bound(&self, bound: Announcement) -> Result<EpistemicState, EpistemicError> {
        let n = self.agent_count();
        if bound.value as usize > n {
            return Err(EpistemicError::InconsistentInstance(format!(
                "bound value {} exceeds agent count {n}",
                bound.value
            )));
        }
        if !bound.holds_in(&self.actual) {
            return Err(EpistemicError::InconsistentInstance(format!(
                "announcement \"{bound}\" is false in the actual world {:?}",
                self.actual
            )));
        }
        let surviving = self.surviving.filtered(|w| {
            bound.holds_in(&World::new(w, n).expect("surviving worlds are in range"))
        });
        Ok(EpistemicState { surviving, ..self.clone() })
    }

    fn classify(&self, base_bits: u32, agent: usize) -> Answer {
        let mask = self.obs.row_mask(agent);
        let key = base_bits & mask;
        let mut marked = 0u32;
        let mut total = 0u32;
        for w in self.surviving.iter() {
            if w & mask == key {
                marked += w >> agent & 1;
                total += 1;
            }
        }
        debug_assert!(total > 0, "candidate set may never be empty");
        if marked == total {
            Answer::Yes
        } else if marked == 0 {
            Answer::No
        } else {
            Answer::Unknown
        }
    }

    /// Agent `agent`'s answer in the current model: Yes/No when every world
    /// it considers possible agrees on its own status, Unknown otherwise.
    pub fn agent_answer(&self, agent: usize) -> Answer {
        assert!(agent < self.agent_count(), "agent index out of range");
        self.classify(self.actual.bits(), agent)
    }

    /// The answer agent `agent` would give if `world` were the actual one.
    /// `world` must be a surviving candidate.
    pub fn hypothetical_answer(
        &self,
        world: &World,
        agent: usize,
    ) -> Result<Answer, EpistemicError> {
        let n = self.agent_count();
        if world.agent_count() != n {
            return Err(EpistemicError::DimensionMismatch(format!(
                "world of {} agents in a model of {n}",
                world.agent_count()
            )));
        }
        if agent >= n {
            return Err(EpistemicError::AgentOutOfRange { agent, n });
        }
        if !self.surviving.contains(world.bits()) {
            return Err(EpistemicError::WorldNotSurviving(format!("{world:?}")));
        }
        Ok(self.classify(world.bits(), agent))
    }

    /// One simultaneous public round. Every agent's answer is computed
    /// against this pre-round state; the joint vector then acts as one
    /// public announcement, eliminating every world whose hypothetical
    /// vector differs in any coordinate.
    pub fn round_update(&self) -> (Vec<Answer>, EpistemicState) {
        let n = self.agent_count();
        let tables: Vec<ClassTable> = (0..n)
            .map(|i| ClassTable::build(&self.surviving, n, i, self.obs.row_mask(i)))
            .collect();
        let vector: Vec<Answer> = (0..n)
            .map(|i| tables[i].answer_for(self.actual.bits() & self.obs.row_mask(i)))
            .collect();
        let surviving = self.surviving.filtered(|w| {
            (0..n).all(|i| tables[i].answer_for(w & self.obs.row_mask(i)) == vector[i])
        });
        debug_assert!(surviving.contains(self.actual.bits()));
        let next = EpistemicState {
            obs: self.obs.clone(),
            actual: self.actual,
            surviving,
            round_index: self.round_index + 1,
        };
        (vector, next)
    }
}
