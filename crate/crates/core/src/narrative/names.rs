//! Agent display names: positional labels for the classic setting, and a
//! pooled assignment with the fame-conflict rule for the recast settings.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::NarrativeError;
use crate::instance::Rung;

/// Famous names go to queried agents whose correct conclusion contradicts
/// fame; everyone else draws from the generic pool.
#[derive(Debug, Clone, Deserialize)]
pub struct NamePool {
    pub famous: Vec<String>,
    pub generic: Vec<String>,
}

impl NamePool {
    pub fn builtin() -> Self {
        serde_json::from_str(include_str!("../../data/names.json"))
            .expect("builtin name pool parses")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, NarrativeError> {
        let text = std::fs::read_to_string(path).map_err(|e| NarrativeError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let pool: NamePool = serde_json::from_str(&text).map_err(|e| NarrativeError::Io {
            path: path.display().to_string(),
            message: format!("name pool does not parse: {e}"),
        })?;
        pool.validate()?;
        Ok(pool)
    }

    pub fn validate(&self) -> Result<(), NarrativeError> {
        if self.famous.is_empty() || self.generic.is_empty() {
            return Err(NarrativeError::BadPool("both pools must be non-empty".into()));
        }
        if self.famous.iter().any(|f| self.generic.contains(f)) {
            return Err(NarrativeError::BadPool(
                "famous and generic pools must be disjoint".into(),
            ));
        }
        Ok(())
    }
}

/// Deterministic per-instance RNG: the name seed and the instance id are
/// hashed together so reruns and list order changes cannot reshuffle names.
pub fn name_rng(name_seed: u64, instance_id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(name_seed.to_le_bytes());
    hasher.update(instance_id.as_bytes());
    let digest = hasher.finalize();
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().unwrap()))
}

/// Assigns display names for one instance.
///
/// Rung I keeps positional labels ("child 0".."child n-1"); the pool is not
/// consulted. Rungs II and III draw from the pool: the queried agent gets a
/// famous name exactly when its actual status is negative (so the correct
/// answer contradicts fame), and every other agent gets a distinct generic
/// name.
pub fn assign_names(
    rung: Rung,
    n: usize,
    queried: usize,
    queried_marked: bool,
    role: &str,
    pool: &NamePool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>, NarrativeError> {
    if rung == Rung::I {
        return Ok((0..n).map(|i| format!("{role} {i}")).collect());
    }
    pool.validate()?;
    let generic_needed = n - 1 + usize::from(queried_marked);
    if generic_needed > pool.generic.len() {
        return Err(NarrativeError::BadPool(format!(
            "generic pool has {} names but {generic_needed} are needed for {n} agents",
            pool.generic.len()
        )));
    }
    let queried_name = if queried_marked {
        None // drawn from the generic picks below
    } else {
        Some(pool.famous[rng.random_range(0..pool.famous.len())].clone())
    };
    let picks = sample(rng, pool.generic.len(), generic_needed);
    let mut generics = picks.iter().map(|i| pool.generic[i].clone());
    let mut names = Vec::with_capacity(n);
    for agent in 0..n {
        if agent == queried {
            match &queried_name {
                Some(famous) => names.push(famous.clone()),
                None => names.push(generics.next().expect("sized above")),
            }
        } else {
            names.push(generics.next().expect("sized above"));
        }
    }
    Ok(names)
}
