mod common;

use std::sync::Arc;

use common::{jittered, rel_close, smoke_problem};
use morphreg::mesh::{build_topology, init_identity_solution, refine_solution};
use morphreg::multires::{run_schedule, Stage};
use morphreg::objectives::{check_feasibility, eval_deformation};
use morphreg::optimizer::{hypervolume, run_optimization, OptimizerConfig, SolutionArchive};

fn stage(n: usize, pop: usize, generations: usize) -> Stage {
    Stage {
        grid_resolution: [n; 3],
        population_size: pop,
        generations,
    }
}

fn base() -> OptimizerConfig {
    OptimizerConfig {
        seed: 21,
        ..Default::default()
    }
}

fn front_hv(a: &SolutionArchive) -> f64 {
    let pts: Vec<[f64; 3]> = a
        .entries()
        .iter()
        .map(|e| e.objectives.to_array())
        .collect();
    hypervolume(&pts, 3, [1.0, 50.0, 100.0])
}

#[test]
fn single_stage_schedule_equals_run_optimization() {
    let p = smoke_problem();
    let s = stage(4, 8, 2);
    let res = run_schedule(&p, &[s], &base()).unwrap();
    assert_eq!(res.len(), 1);
    let config = OptimizerConfig {
        grid_resolution: s.grid_resolution,
        population_size: s.population_size,
        generations: s.generations,
        ..base()
    };
    let (pop, archive) = run_optimization(&p, &config, None).unwrap();
    assert_eq!(res[0].archive.len(), archive.len());
    for (a, b) in res[0].archive.entries().iter().zip(archive.entries()) {
        assert_eq!(a.objectives, b.objectives);
        assert_eq!(a.payload, b.payload);
    }
    for (a, b) in res[0].population.individuals.iter().zip(&pop.individuals) {
        assert_eq!(a.solution, b.solution);
    }
}

#[test]
fn second_stage_starts_from_refined_archive_members() {
    let p = smoke_problem();
    let res = run_schedule(&p, &[stage(3, 6, 2), stage(5, 12, 0)], &base()).unwrap();
    let coarse: Vec<_> = res[0]
        .archive
        .entries()
        .iter()
        .map(|e| refine_solution(&e.payload).unwrap())
        .collect();
    assert_eq!(res[1].population.individuals.len(), 12);
    for ind in &res[1].population.individuals {
        assert_eq!(ind.solution.topology().resolution(), [5; 3]);
        assert!(check_feasibility(&ind.solution, None));
        assert!(coarse.iter().any(|c| *c == ind.solution));
    }
}

#[test]
fn second_stage_front_does_not_shrink() {
    let p = smoke_problem();
    let b = OptimizerConfig {
        archive_cells: 0,
        ..base()
    };
    let start = run_schedule(&p, &[stage(3, 6, 2), stage(5, 8, 0)], &b).unwrap();
    let end = run_schedule(&p, &[stage(3, 6, 2), stage(5, 8, 2)], &b).unwrap();
    assert!(front_hv(&end[1].archive) >= front_hv(&start[1].archive));
}

#[test]
#[ignore = "fails: squared mm length differences shrink about 2.4x when edges are halved"]
fn refinement_keeps_deformation_within_five_percent() {
    let dims = [32; 3];
    for seed in 0..5 {
        let coarse = jittered(6, dims, seed);
        let fine = refine_solution(&coarse).unwrap();
        let (a, b) = (
            eval_deformation(&coarse, [1.0; 3]),
            eval_deformation(&fine, [1.0; 3]),
        );
        assert!(rel_close(a, b, 0.05), "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn refining_six_cubed_gives_eleven_cubed() {
    let topo = Arc::new(build_topology([6; 3]).unwrap());
    assert_eq!(topo.variable_count(), 1296);
    let fine = refine_solution(&init_identity_solution(topo, [50; 3])).unwrap();
    assert_eq!(fine.topology().resolution(), [11; 3]);
    assert_eq!(fine.variable_count(), 7986);
}
