//! Exhaustive grid enumeration for the classic and recast rungs.

use serde::{Deserialize, Serialize};

use super::{validate_instance, InstanceError, PuzzleInstance, Rung};
use crate::epistemic::{Announcement, BoundType, ObservationMatrix, World, MAX_AGENTS};
use crate::narrative::{assign_names, name_rng, NamePool, SettingsTable};

/// Ranges swept by grid enumeration. Bounds are relative to each k:
/// a lower bound takes q in `lower_q_min..=k`, an upper bound takes q in
/// `k..=upper_q_max` (default n).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationGrid {
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub j_min: usize,
    pub j_max: usize,
    pub bound_types: Vec<BoundType>,
    #[serde(default)]
    pub lower_q_min: usize,
    #[serde(default)]
    pub upper_q_max: Option<usize>,
}

impl GenerationGrid {
    /// The default benchmark grid: ten agents, every k, every lower bound
    /// q <= k, rounds 1..=11, both queried statuses where consistent.
    /// Enumerates to 1,320 instances.
    pub fn paper() -> Self {
        GenerationGrid {
            n: 10,
            k_min: 0,
            k_max: 10,
            j_min: 1,
            j_max: 11,
            bound_types: vec![BoundType::Lower],
            lower_q_min: 0,
            upper_q_max: None,
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.n == 0 || self.n > MAX_AGENTS {
            return Err(InstanceError::BadGrid(format!("n={} outside 1..={MAX_AGENTS}", self.n)));
        }
        if self.k_min > self.k_max || self.k_max > self.n {
            return Err(InstanceError::BadGrid(format!(
                "k range [{}, {}] invalid for n={}",
                self.k_min, self.k_max, self.n
            )));
        }
        if self.j_min == 0 || self.j_min > self.j_max {
            return Err(InstanceError::BadGrid(format!(
                "j range [{}, {}] invalid (j starts at 1)",
                self.j_min, self.j_max
            )));
        }
        if self.bound_types.is_empty() {
            return Err(InstanceError::BadGrid("no bound types configured".into()));
        }
        if let Some(max) = self.upper_q_max {
            if max > self.n {
                return Err(InstanceError::BadGrid(format!(
                    "upper_q_max={max} exceeds n={}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// The canonical status vector for grid coordinates: agent 0 carries `s0`,
/// and the remaining k - s0 marked agents are the lowest indices from 1 up.
pub(crate) fn canonical_statuses(n: usize, k: usize, s0: u8) -> World {
    let mut statuses = vec![0u8; n];
    statuses[0] = s0;
    let mut remaining = k - s0 as usize;
    for slot in statuses.iter_mut().skip(1) {
        if remaining == 0 {
            break;
        }
        *slot = 1;
        remaining -= 1;
    }
    World::from_statuses(&statuses).expect("canonical statuses are well-formed")
}

fn queried_status_variants(n: usize, k: usize) -> &'static [u8] {
    if k == 0 {
        &[0]
    } else if k == n {
        &[1]
    } else {
        &[0, 1]
    }
}

/// Enumerates the full grid for rung I or II: deterministic, duplicate-free,
/// every instance consistent. Rung II is the same parameter sweep re-skinned
/// with the recast setting and pooled names.
pub fn enumerate_rung_grid(
    grid: &GenerationGrid,
    rung: Rung,
    settings: &SettingsTable,
    pool: &NamePool,
    name_seed: u64,
) -> Result<Vec<PuzzleInstance>, InstanceError> {
    if rung == Rung::III {
        return Err(InstanceError::BadGrid(
            "rung III instances are sampled, not enumerated; use sample_rung3".into(),
        ));
    }
    grid.validate()?;
    let setting_id = match rung {
        Rung::I => "muddy",
        _ => "olympic",
    };
    let setting = settings.get(setting_id)?;
    let obs = ObservationMatrix::full_except_diagonal(grid.n)
        .map_err(|e| InstanceError::BadGrid(e.to_string()))?;
    let seed_label = match rung {
        Rung::I => "grid".to_string(),
        _ => format!("grid+names:{name_seed}"),
    };

    let mut out = Vec::new();
    for k in grid.k_min..=grid.k_max {
        for &bound_type in &grid.bound_types {
            let (lo, hi) = match bound_type {
                BoundType::Lower => (grid.lower_q_min, k),
                BoundType::Upper => (k, grid.upper_q_max.unwrap_or(grid.n)),
            };
            for q in lo..=hi.min(grid.n) {
                for &s0 in queried_status_variants(grid.n, k) {
                    for j in grid.j_min..=grid.j_max {
                        let tag = match bound_type {
                            BoundType::Lower => 'l',
                            BoundType::Upper => 'u',
                        };
                        let id =
                            format!("r{}-n{}-k{k}-{tag}q{q}-s{s0}-j{j}", rung.number(), grid.n);
                        let statuses = canonical_statuses(grid.n, k, s0);
                        let names = assign_names(
                            rung,
                            grid.n,
                            0,
                            s0 == 1,
                            &setting.role,
                            pool,
                            &mut name_rng(name_seed, &id),
                        )?;
                        let inst = PuzzleInstance {
                            id,
                            rung,
                            n: grid.n,
                            k,
                            bound: Announcement { bound_type, value: q as u8 },
                            round: j,
                            obs: obs.clone(),
                            statuses,
                            queried: 0,
                            setting: setting_id.to_string(),
                            names,
                            seed: seed_label.clone(),
                        };
                        validate_instance(&inst)?;
                        out.push(inst);
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(InstanceError::EmptyGrid(format!("{grid:?} produced no instances")));
    }
    Ok(out)
}
