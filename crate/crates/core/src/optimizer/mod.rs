//! Multi-objective GOMEA-style optimizer over dual-grid solutions.
//!
//! Each generation visits one randomly drawn tet per cube. For every visited
//! tet and every objective-space cluster a Gaussian over the tet's 24 point
//! coordinates (4 vertices, both grids) is estimated from the cluster's
//! truncation selection; each individual samples replacements for the tet's
//! points from its own cluster's model and keeps a change only when it is
//! fold-free and either dominates the old objectives or is non-dominated
//! with respect to them and enters the elitist archive.

mod archive;
pub mod cluster;
mod gaussian;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{build_topology, jittered_solution, GridSide, GridTopology, Solution};
use crate::objectives::{check_feasibility, Evaluator, ObjectiveVector, PartialEvalContext, Undo};
use crate::volume::RegistrationProblem;

pub use archive::{hypervolume, ArchiveEntry, ElitistArchive};
pub use gaussian::{cholesky_semidefinite, ElementVector, Gaussian, ELEMENT_VARS, VARIANCE_FLOOR};

/// The points of one tet, moved together in both grids.
#[derive(Clone, Debug, PartialEq)]
pub struct FosElement {
    pub tet: usize,
    pub points: [usize; 4],
    /// Flat variable indices: `grid * 3n + 3 * point + axis`.
    pub variables: [usize; ELEMENT_VARS],
    /// Tets to re-evaluate after a move (sorted).
    pub affected: Vec<usize>,
}

/// One element per tet; the six elements of cube `c` are `6c..6c+6`.
pub fn build_fos(topology: &GridTopology) -> Vec<FosElement> {
    let n = topology.point_count();
    (0..topology.tet_count())
        .map(|t| {
            let points = topology.tet(t);
            let mut variables = [0; ELEMENT_VARS];
            let mut k = 0;
            for g in 0..2 {
                for p in points {
                    for a in 0..3 {
                        variables[k] = g * 3 * n + 3 * p + a;
                        k += 1;
                    }
                }
            }
            let mut affected = BTreeSet::new();
            for p in points {
                affected.extend(topology.incident(p).iter().copied());
            }
            FosElement {
                tet: t,
                points,
                variables,
                affected: affected.into_iter().collect(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub grid_resolution: [usize; 3],
    pub population_size: usize,
    pub generations: usize,
    pub seed: u64,
    pub clusters: usize,
    pub truncation_fraction: f64,
    pub archive_cells: usize,
    /// Initial jitter as a fraction of the cell edge.
    pub init_jitter: f64,
    pub distribution_multiplier: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            grid_resolution: [6, 6, 6],
            population_size: 250,
            generations: 300,
            seed: 1,
            clusters: 5,
            truncation_fraction: 0.35,
            archive_cells: 200,
            init_jitter: 0.1,
            distribution_multiplier: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.grid_resolution.iter().any(|&n| n < 2) {
            return Err(Error::InvalidResolution(self.grid_resolution));
        }
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.clusters == 0 {
            return bad("clusters must be positive");
        }
        if !(self.truncation_fraction > 0.0 && self.truncation_fraction <= 1.0) {
            return bad("truncation_fraction must lie in (0, 1]");
        }
        if !(self.init_jitter >= 0.0 && self.init_jitter.is_finite()) {
            return bad("init_jitter must be finite and non-negative");
        }
        if !(self.distribution_multiplier > 0.0 && self.distribution_multiplier.is_finite()) {
            return bad("distribution_multiplier must be positive");
        }
        Ok(())
    }
}

/// A solution with its cached evaluation state.
#[derive(Clone, Debug)]
pub struct Individual {
    pub solution: Solution,
    pub context: PartialEvalContext,
}

impl Individual {
    pub fn evaluate(solution: Solution, evaluator: &Evaluator) -> Result<Self> {
        let context = evaluator.evaluate(&solution)?;
        Ok(Individual { solution, context })
    }

    pub fn objectives(&self) -> ObjectiveVector {
        self.context.objectives()
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation: usize,
}

pub type SolutionArchive = ElitistArchive<Solution>;

/// Per-generation summary passed to observers.
#[derive(Clone, Debug)]
pub struct GenerationStats {
    pub generation: usize,
    pub archive_size: usize,
    pub accepted_changes: usize,
    pub attempted_changes: usize,
    pub best: [f64; 3],
}

fn stream_rng(seed: u64, tag: u64, generation: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(&generation.to_le_bytes());
    key[24..].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

const TAG_INIT: u64 = 1;
const TAG_INDIVIDUAL: u64 = 2;
const TAG_GENERATION: u64 = 3;

/// Identity-plus-jitter starting population.
pub fn initial_population(
    problem: &RegistrationProblem,
    evaluator: &Evaluator,
    config: &OptimizerConfig,
) -> Result<Vec<Individual>> {
    let topology = Arc::new(build_topology(config.grid_resolution)?);
    (0..config.population_size)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, TAG_INIT, 0, i as u64);
            let sol = jittered_solution(
                topology.clone(),
                problem.dims(),
                config.init_jitter,
                &mut rng,
            );
            Individual::evaluate(sol, evaluator)
        })
        .collect()
}

fn read_element(sol: &Solution, e: &FosElement) -> ElementVector {
    let mut x = ElementVector::zeros();
    let mut k = 0;
    for g in GridSide::BOTH {
        let pts = sol.points(g);
        for &p in &e.points {
            for a in 0..3 {
                x[k] = pts[p][a];
                k += 1;
            }
        }
    }
    x
}

fn write_element(sol: &mut Solution, e: &FosElement, x: &ElementVector) {
    let mut k = 0;
    for g in GridSide::BOTH {
        for &p in &e.points {
            let v = sol.project(p, Vec3::new(x[k], x[k + 1], x[k + 2]));
            sol.points_mut(g)[p] = v;
            k += 3;
        }
    }
}

/// Cluster assignment and per-cluster selections of a population.
struct Selection {
    cluster_of: Vec<usize>,
    selected: Vec<Vec<usize>>,
}

fn select(pop: &[Individual], config: &OptimizerConfig) -> Selection {
    let objs: Vec<[f64; 3]> = pop.iter().map(|i| i.objectives().to_array()).collect();
    let n = pop.first().map(|i| i.objectives().len()).unwrap_or(2);
    let normalized = cluster::normalize(&objs, n);
    let cluster_of = cluster::balanced_kmeans(&normalized, config.clusters);
    let k = cluster_of.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let selected = (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..pop.len()).filter(|&i| cluster_of[i] == c).collect();
            cluster::truncation_select(&normalized, &members, n, config.truncation_fraction)
        })
        .collect();
    Selection {
        cluster_of,
        selected,
    }
}

fn accepts_change(
    new: &ObjectiveVector,
    old: &ObjectiveVector,
    snapshot: &SolutionArchive,
    local: &SolutionArchive,
) -> bool {
    if !new.is_valid() {
        return false;
    }
    if new.dominates(old) {
        return true;
    }
    !old.dominates(new) && snapshot.accepts(new) && local.accepts(new)
}

struct Outcome {
    local: SolutionArchive,
    accepted: usize,
    attempted: usize,
}

/// One generation of optimal mixing. Individuals are processed in
/// parallel; each proposes archive entries into a private archive, merged
/// into `archive` in individual order afterwards.
pub fn gom_generation(
    population: &mut Population,
    evaluator: &Evaluator,
    archive: &mut SolutionArchive,
    fos: &[FosElement],
    config: &OptimizerConfig,
) -> GenerationStats {
    let generation = population.generation as u64;
    let mut master = stream_rng(config.seed, TAG_GENERATION, generation, 0);
    let cubes = fos.len() / 6;
    let visited: Vec<usize> = (0..cubes).map(|c| 6 * c + master.gen_range(0..6)).collect();

    let sel = select(&population.individuals, config);
    let models: Vec<Vec<Gaussian>> = sel
        .selected
        .iter()
        .map(|members| {
            visited
                .iter()
                .map(|&e| {
                    let samples: Vec<ElementVector> = members
                        .iter()
                        .map(|&i| read_element(&population.individuals[i].solution, &fos[e]))
                        .collect();
                    Gaussian::estimate(&samples, config.distribution_multiplier)
                })
                .collect()
        })
        .collect();

    let snapshot: &SolutionArchive = archive;
    let outcomes: Vec<Outcome> = population
        .individuals
        .par_iter_mut()
        .enumerate()
        .map(|(idx, ind)| {
            let mut rng = stream_rng(config.seed, TAG_INDIVIDUAL, generation, idx as u64);
            let mut order: Vec<usize> = (0..visited.len()).collect();
            order.shuffle(&mut rng);
            let model = &models[sel.cluster_of[idx]];
            let mut local = snapshot.empty_like();
            let mut undo = Undo::default();
            let mut accepted = 0;
            let mut attempted = 0;
            for slot in order {
                let e = &fos[visited[slot]];
                let old_x = read_element(&ind.solution, e);
                let x = model[slot].sample(&mut rng);
                write_element(&mut ind.solution, e, &x);
                if read_element(&ind.solution, e) == old_x {
                    continue;
                }
                attempted += 1;
                if !check_feasibility(&ind.solution, Some(&e.points)) {
                    write_element(&mut ind.solution, e, &old_x);
                    continue;
                }
                let old = ind.context.objectives();
                let keep =
                    match evaluator.update(&ind.solution, &mut ind.context, &e.affected, &mut undo)
                    {
                        Ok(new) => accepts_change(&new, &old, snapshot, &local),
                        Err(_) => false,
                    };
                if keep {
                    accepted += 1;
                    if snapshot.accepts(&ind.context.objectives()) {
                        local.insert(ind.context.objectives(), ind.solution.clone());
                    }
                } else {
                    evaluator.revert(&mut ind.context, &undo);
                    write_element(&mut ind.solution, e, &old_x);
                }
            }
            Outcome {
                local,
                accepted,
                attempted,
            }
        })
        .collect();

    let mut accepted = 0;
    let mut attempted = 0;
    for o in outcomes {
        accepted += o.accepted;
        attempted += o.attempted;
        for entry in o.local.into_entries() {
            archive.insert(entry.objectives, entry.payload);
        }
    }
    archive.rescale();
    population.generation += 1;

    GenerationStats {
        generation: population.generation,
        archive_size: archive.len(),
        accepted_changes: accepted,
        attempted_changes: attempted,
        best: best_objectives(archive),
    }
}

fn best_objectives(archive: &SolutionArchive) -> [f64; 3] {
    let mut best = [f64::INFINITY; 3];
    for e in archive.entries() {
        let a = e.objectives.to_array();
        for i in 0..3 {
            best[i] = best[i].min(a[i]);
        }
    }
    best
}

/// Archive of the non-dominated members of a population.
pub fn archive_of(individuals: &[Individual], cells: usize) -> SolutionArchive {
    let mut archive = ElitistArchive::new(cells);
    for ind in individuals {
        archive.insert(ind.objectives(), ind.solution.clone());
    }
    archive.rescale();
    archive
}

/// Runs `config.generations` generations from `initial` (or from a fresh
/// identity-plus-jitter population), reporting each generation to
/// `observer`.
pub fn run_optimization_with(
    problem: &RegistrationProblem,
    config: &OptimizerConfig,
    initial: Option<Vec<Solution>>,
    observer: &mut dyn FnMut(&GenerationStats),
) -> Result<(Population, SolutionArchive)> {
    config.validate()?;
    let evaluator = Evaluator::new(problem);
    let individuals = match initial {
        None => initial_population(problem, &evaluator, config)?,
        Some(sols) => {
            if sols.is_empty() {
                return Err(Error::Config("initial population is empty".into()));
            }
            sols.into_par_iter()
                .map(|s| {
                    if s.topology().resolution() != config.grid_resolution {
                        return Err(Error::Config(
                            "initial solution resolution does not match the stage".into(),
                        ));
                    }
                    if !check_feasibility(&s, None) {
                        return Err(Error::Infeasible);
                    }
                    Individual::evaluate(s, &evaluator)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let topology = individuals[0].solution.topology().clone();
    let fos = build_fos(&topology);
    let mut archive = archive_of(&individuals, config.archive_cells);
    let mut population = Population {
        individuals,
        generation: 0,
    };
    for _ in 0..config.generations {
        let stats = gom_generation(&mut population, &evaluator, &mut archive, &fos, config);
        observer(&stats);
    }
    Ok((population, archive))
}

pub fn run_optimization(
    problem: &RegistrationProblem,
    config: &OptimizerConfig,
    initial: Option<Vec<Solution>>,
) -> Result<(Population, SolutionArchive)> {
    run_optimization_with(problem, config, initial, &mut |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fos_counts_and_coverage() {
        let topo = build_topology([6, 6, 6]).unwrap();
        let fos = build_fos(&topo);
        assert_eq!(fos.len(), 750);
        assert_eq!(fos.len() / 6, 125);
        let covered: BTreeSet<usize> = fos.iter().flat_map(|e| e.variables).collect();
        assert_eq!(covered.len(), 1296);
    }

    #[test]
    fn affected_tets_match_brute_force() {
        let topo = build_topology([4, 3, 5]).unwrap();
        for e in build_fos(&topo) {
            let brute: Vec<usize> = (0..topo.tet_count())
                .filter(|&t| topo.tet(t).iter().any(|p| e.points.contains(p)))
                .collect();
            assert_eq!(e.affected, brute);
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            truncation_fraction: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            grid_resolution: [1, 6, 6],
            ..OptimizerConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidResolution(_))));
    }

    #[test]
    fn acceptance_rule() {
        let v = |a, b, c| ObjectiveVector::new(a, b, Some(c));
        let empty = SolutionArchive::new(0);
        let old = v(1.0, 1.0, 1.0);
        assert!(accepts_change(&v(0.5, 1.0, 1.0), &old, &empty, &empty));
        assert!(!accepts_change(&v(2.0, 2.0, 2.0), &old, &empty, &empty));
        assert!(!accepts_change(&v(1.0, 1.0, 1.5), &old, &empty, &empty));
        assert!(!accepts_change(
            &v(f64::NAN, 0.0, 0.0),
            &old,
            &empty,
            &empty
        ));
        assert!(accepts_change(&v(0.5, 2.0, 1.0), &old, &empty, &empty));
        let mut full = SolutionArchive::new(0);
        let topo = Arc::new(build_topology([2; 3]).unwrap());
        full.insert(
            v(0.4, 1.5, 1.0),
            crate::mesh::init_identity_solution(topo, [4; 3]),
        );
        assert!(!accepts_change(&v(0.5, 2.0, 1.0), &old, &full, &empty));
        assert!(!accepts_change(&v(0.5, 2.0, 1.0), &old, &empty, &full));
        assert!(accepts_change(&v(0.5, 0.5, 1.0), &old, &full, &full));
    }
}
