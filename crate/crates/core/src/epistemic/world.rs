//! Domain values for the possible-worlds engine: worlds, observation
//! matrices, bound announcements, and the three-valued answer.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::EpistemicError;

/// Hard cap on the number of agents. The engine enumerates all 2^n worlds,
/// so this bounds memory at 2^24 set bits.
pub const MAX_AGENTS: usize = 24;

/// One complete assignment of hidden statuses to all `n` agents.
///
/// Bit `i` is agent `i`'s status (1 = marked: muddy / qualified).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct World {
    bits: u32,
    n: u8,
}

impl World {
    pub fn new(bits: u32, n: usize) -> Result<Self, EpistemicError> {
        if n == 0 || n > MAX_AGENTS {
            return Err(EpistemicError::AgentCountOutOfRange(n));
        }
        if n < 32 && bits >= (1u32 << n) {
            return Err(EpistemicError::DimensionMismatch(format!(
                "world bits 0x{bits:x} out of range for {n} agents"
            )));
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// Builds a world from a status vector, index `i` = agent `i`.
    pub fn from_statuses(statuses: &[u8]) -> Result<Self, EpistemicError> {
        let n = statuses.len();
        if n == 0 || n > MAX_AGENTS {
            return Err(EpistemicError::AgentCountOutOfRange(n));
        }
        let mut bits = 0u32;
        for (i, &s) in statuses.iter().enumerate() {
            match s {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(EpistemicError::InvalidStatus(s)),
            }
        }
        Ok(Self { bits, n: n as u8 })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn agent_count(&self) -> usize {
        self.n as usize
    }

    /// Status of agent `i`.
    pub fn status(&self, agent: usize) -> bool {
        debug_assert!(agent < self.n as usize);
        self.bits >> agent & 1 == 1
    }

    /// Number of agents with status 1.
    pub fn marked_count(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn statuses(&self) -> Vec<u8> {
        (0..self.agent_count()).map(|i| self.status(i) as u8).collect()
    }
}

impl fmt::Debug for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Agent 0 first, e.g. actual = 01 means agent 1 is marked.
        for i in 0..self.agent_count() {
            write!(f, "{}", self.status(i) as u8)?;
        }
        Ok(())
    }
}

impl Serialize for World {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.statuses().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for World {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let statuses = Vec::<u8>::deserialize(deserializer)?;
        World::from_statuses(&statuses).map_err(D::Error::custom)
    }
}

/// Who sees whom: entry `(i, j)` = 1 means agent `i` observes agent `j`'s
/// status. Rows are stored as bitmasks for constant-time indistinguishability.
#[derive(Clone, PartialEq, Eq)]
pub struct ObservationMatrix {
    rows: Vec<u32>,
    n: u8,
}

impl ObservationMatrix {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, EpistemicError> {
        let n = rows.len();
        if n == 0 || n > MAX_AGENTS {
            return Err(EpistemicError::AgentCountOutOfRange(n));
        }
        let mut masks = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(EpistemicError::DimensionMismatch(format!(
                    "observation matrix row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            let mut mask = 0u32;
            for (j, &e) in row.iter().enumerate() {
                match e {
                    0 => {}
                    1 => mask |= 1 << j,
                    _ => return Err(EpistemicError::InvalidStatus(e)),
                }
            }
            masks.push(mask);
        }
        Ok(Self { rows: masks, n: n as u8 })
    }

    /// The classic setup: every agent sees every other agent, nobody sees
    /// themselves.
    pub fn full_except_diagonal(n: usize) -> Result<Self, EpistemicError> {
        if n == 0 || n > MAX_AGENTS {
            return Err(EpistemicError::AgentCountOutOfRange(n));
        }
        let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let rows = (0..n).map(|i| all & !(1 << i)).collect();
        Ok(Self { rows, n: n as u8 })
    }

    pub fn agent_count(&self) -> usize {
        self.n as usize
    }

    pub fn observes(&self, observer: usize, observed: usize) -> bool {
        debug_assert!(observer < self.agent_count() && observed < self.agent_count());
        self.rows[observer] >> observed & 1 == 1
    }

    /// Bitmask of the agents observed by `observer`.
    pub fn row_mask(&self, observer: usize) -> u32 {
        self.rows[observer]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.agent_count())
            .map(|i| (0..self.agent_count()).map(|j| self.observes(i, j) as u8).collect())
            .collect()
    }

    /// Agents whose statuses `observer` sees, ascending.
    pub fn observed_agents(&self, observer: usize) -> Vec<usize> {
        (0..self.agent_count()).filter(|&j| self.observes(observer, j)).collect()
    }
}

impl fmt::Debug for ObservationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObservationMatrix({:?})", self.rows())
    }
}

impl Serialize for ObservationMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ObservationMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(deserializer)?;
        ObservationMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Direction of a public bound announcement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundType {
    Lower,
    Upper,
}

/// A public announcement: "at least q" or "at most q" agents are marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub bound_type: BoundType,
    pub value: u8,
}

impl Announcement {
    pub fn lower(value: u8) -> Self {
        Self { bound_type: BoundType::Lower, value }
    }

    pub fn upper(value: u8) -> Self {
        Self { bound_type: BoundType::Upper, value }
    }

    /// Whether the announcement is true in world `w`.
    pub fn holds_in(&self, w: &World) -> bool {
        match self.bound_type {
            BoundType::Lower => w.marked_count() >= self.value as u32,
            BoundType::Upper => w.marked_count() <= self.value as u32,
        }
    }
}

impl fmt::Display for Announcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound_type {
            BoundType::Lower => write!(f, "at least {}", self.value),
            BoundType::Upper => write!(f, "at most {}", self.value),
        }
    }
}

/// An agent's public reply about its own status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl Answer {
    /// The exact surface form agents use in prompts and replies.
    pub fn surface(&self) -> &'static str {
        match self {
            Answer::Yes => "Yes",
            Answer::No => "No",
            Answer::Unknown => "I don't know",
        }
    }

    /// All answers, in the tie-break order used by the majority baseline.
    pub const ALL: [Answer; 3] = [Answer::Yes, Answer::No, Answer::Unknown];
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.surface())
    }
}
