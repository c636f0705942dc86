//! Seeded random sampling of the asymmetric-observation rung.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{validate_instance, InstanceError, PuzzleInstance, Rung};
use crate::epistemic::{Announcement, ObservationMatrix, World, MAX_AGENTS};
use crate::narrative::{assign_names, name_rng, NamePool, SettingsTable};

/// Attempts allowed per requested instance before the sampler gives up.
const REJECTION_BUDGET_PER_INSTANCE: usize = 1000;

/// Sampling ranges for the random-observation rung. The bound is a fixed
/// upper bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rung3Grid {
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub j_min: usize,
    pub j_max: usize,
    pub upper_q: u8,
    /// Default instance count when the caller does not override it.
    pub count: usize,
}

impl Rung3Grid {
    /// The default configuration: ten agents, "at most 2" announcement,
    /// k in [0, 2], rounds 1..=11, 374 instances.
    pub fn paper() -> Self {
        Rung3Grid { n: 10, k_min: 0, k_max: 2, j_min: 1, j_max: 11, upper_q: 2, count: 374 }
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
        if self.upper_q as usize > self.n {
            return Err(InstanceError::BadGrid(format!(
                "upper_q={} exceeds n={}",
                self.upper_q, self.n
            )));
        }
        Ok(())
    }
}

fn draw_statuses(rng: &mut ChaCha8Rng, n: usize, k: usize) -> World {
    let s0 = if k == 0 {
        0u8
    } else if k == n {
        1
    } else {
        rng.random_bool(0.5) as u8
    };
    let mut statuses = vec![0u8; n];
    statuses[0] = s0;
    let others = k - s0 as usize;
    if others > 0 {
        for idx in rand::seq::index::sample(rng, n - 1, others) {
            statuses[idx + 1] = 1;
        }
    }
    World::from_statuses(&statuses).expect("drawn statuses are well-formed")
}

fn draw_matrix(rng: &mut ChaCha8Rng, n: usize) -> ObservationMatrix {
    let rows: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let bit = rng.random_bool(0.5) as u8;
                    // The queried agent never observes itself; the draw
                    // still happens so the stream layout stays fixed.
                    if i == 0 && j == 0 {
                        0
                    } else {
                        bit
                    }
                })
                .collect()
        })
        .collect();
    ObservationMatrix::from_rows(&rows).expect("drawn matrix is well-formed")
}

/// Draws `count` consistent instances with i.i.d. observation entries
/// (except the queried agent's own cell) under the grid's fixed upper
/// bound. Inconsistent draws are rejected and redrawn; identical
/// (count, seed, grid) inputs reproduce the identical list.
pub fn sample_rung3(
    count: usize,
    seed: u64,
    grid: &Rung3Grid,
    settings: &SettingsTable,
    pool: &NamePool,
) -> Result<Vec<PuzzleInstance>, InstanceError> {
    if count == 0 {
        return Err(InstanceError::EmptyGrid("requested count must be at least 1".into()));
    }
    grid.validate()?;
    let setting = settings.get("olympic")?;
    let budget = count.saturating_mul(REJECTION_BUDGET_PER_INSTANCE);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts >= budget {
            return Err(InstanceError::RejectionBudgetExhausted {
                attempts,
                accepted: out.len(),
                requested: count,
            });
        }
        attempts += 1;

        let k = rng.random_range(grid.k_min..=grid.k_max);
        let j = rng.random_range(grid.j_min..=grid.j_max);
        let statuses = draw_statuses(&mut rng, grid.n, k);
        let obs = draw_matrix(&mut rng, grid.n);
        let id = format!("r3-s{seed}-i{:04}", out.len());
        let names = assign_names(
            Rung::III,
            grid.n,
            0,
            statuses.status(0),
            &setting.role,
            pool,
            &mut name_rng(seed, &id),
        )?;
        let inst = PuzzleInstance {
            id,
            rung: Rung::III,
            n: grid.n,
            k,
            bound: Announcement::upper(grid.upper_q),
            round: j,
            obs,
            statuses,
            queried: 0,
            setting: "olympic".into(),
            names,
            seed: format!("seed:{seed}"),
        };
        if validate_instance(&inst).is_ok() {
            out.push(inst);
        }
    }
    Ok(out)
}
