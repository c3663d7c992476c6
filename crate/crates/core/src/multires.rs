//! Coarse-to-fine schedules: each stage starts from refined copies of the
//! previous stage's archive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::refine_solution;
use crate::optimizer::{
    run_optimization_with, GenerationStats, OptimizerConfig, Population, SolutionArchive,
};
use crate::volume::RegistrationProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stage {
    pub grid_resolution: [usize; 3],
    pub population_size: usize,
    pub generations: usize,
}

pub struct StageResult {
    pub stage: Stage,
    pub population: Population,
    pub archive: SolutionArchive,
}

/// Checks that every stage refines the previous one (`n -> 2n - 1`).
pub fn validate_schedule(schedule: &[Stage]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Schedule("schedule is empty".into()));
    }
    for s in schedule {
        if s.grid_resolution.iter().any(|&n| n < 2) {
            return Err(Error::InvalidResolution(s.grid_resolution));
        }
        if s.population_size == 0 {
            return Err(Error::Schedule("population_size must be positive".into()));
        }
    }
    for w in schedule.windows(2) {
        let want = w[0].grid_resolution.map(|n| 2 * n - 1);
        if w[1].grid_resolution != want {
            return Err(Error::Schedule(format!(
                "resolution {:?} cannot follow {:?}; expected {:?}",
                w[1].grid_resolution, w[0].grid_resolution, want
            )));
        }
    }
    Ok(())
}

/// Runs every stage in order. `base` supplies the optimizer settings other
/// than resolution, population size and generation count; stage `i` uses
/// seed `base.seed + i`. `observer` receives the stage index and the
/// statistics of every generation.
pub fn run_schedule_with(
    problem: &RegistrationProblem,
    schedule: &[Stage],
    base: &OptimizerConfig,
    observer: &mut dyn FnMut(usize, &GenerationStats),
) -> Result<Vec<StageResult>> {
    validate_schedule(schedule)?;
    let mut results: Vec<StageResult> = Vec::new();
    for (i, stage) in schedule.iter().enumerate() {
        let config = OptimizerConfig {
            grid_resolution: stage.grid_resolution,
            population_size: stage.population_size,
            generations: stage.generations,
            seed: base.seed.wrapping_add(i as u64),
            ..base.clone()
        };
        let initial = match results.last() {
            None => None,
            Some(prev) => {
                let entries = prev.archive.entries();
                if entries.is_empty() {
                    return Err(Error::Schedule("previous stage archive is empty".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_5a3b_1e00_0000);
                let picks: Vec<usize> = (0..stage.population_size)
                    .map(|_| rng.gen_range(0..entries.len()))
                    .collect();
                Some(
                    picks
                        .into_iter()
                        .map(|k| refine_solution(&entries[k].payload))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        let (population, archive) =
            run_optimization_with(problem, &config, initial, &mut |s| observer(i, s))?;
        results.push(StageResult {
            stage: *stage,
            population,
            archive,
        });
    }
    Ok(results)
}

pub fn run_schedule(
    problem: &RegistrationProblem,
    schedule: &[Stage],
    base: &OptimizerConfig,
) -> Result<Vec<StageResult>> {
    run_schedule_with(problem, schedule, base, &mut |_, _| {})
}
