mod common;

use common::*;
use morphreg::geometry::Vec3;
use morphreg::mesh::{build_topology, init_identity_solution, GridSide, Solution};
use morphreg::objectives::{check_feasibility, eval_all, eval_deformation, Evaluator, Undo};
use morphreg::transform::Locator;
use morphreg::volume::{Correspondence, GuidanceSet, ImageVolume, RegistrationProblem};
use rand::seq::SliceRandom;
use rand::Rng;
use std::sync::Arc;

#[test]
fn incremental_feasibility_agrees_with_full_check() {
    let mut sol = jittered(5, [32; 3], 1);
    assert!(check_feasibility(&sol, None));
    let mut r = rng(2);
    let mut infeasible = 0;
    for trial in 0..1000 {
        let scale = [0.05, 0.3, 0.8][trial % 3];
        let (pts, old) = random_move(&mut sol, scale, &mut r);
        let inc = check_feasibility(&sol, Some(&pts));
        let full = check_feasibility(&sol, None);
        assert_eq!(inc, full, "trial {trial}");
        if !full {
            infeasible += 1;
            restore(&mut sol, &old);
        }
    }
    // Both outcomes must have been exercised.
    assert!(infeasible > 50 && infeasible < 950, "{infeasible}");
}

#[test]
fn partial_updates_match_full_recompute() {
    let problem = smoke_problem();
    let ev = Evaluator::new(&problem);
    let mut sol = jittered(5, problem.dims(), 3);
    let mut ctx = ev.evaluate(&sol).unwrap();
    let mut undo = Undo::default();
    let mut r = rng(4);
    let mut accepted = 0;
    for _ in 0..300 {
        let (pts, old) = random_move(&mut sol, 0.3, &mut r);
        if !check_feasibility(&sol, Some(&pts)) {
            restore(&mut sol, &old);
            continue;
        }
        let affected = affected_tets(&sol, &pts);
        let before = ctx.objectives();
        let after = ev.update(&sol, &mut ctx, &affected, &mut undo).unwrap();
        if r.gen_bool(0.5) {
            accepted += 1;
            let full = ev.evaluate(&sol).unwrap().objectives();
            assert_eq!(after, full);
            for i in 0..3 {
                assert!(rel_close(after.get(i), full.get(i), 1e-9));
            }
        } else {
            ev.revert(&mut ctx, &undo);
            restore(&mut sol, &old);
            assert_eq!(ctx.objectives(), before);
        }
    }
    assert!(accepted > 50);
    let full = ev.evaluate(&sol).unwrap();
    assert_eq!(ctx.objectives(), full.objectives());
    assert_eq!(ctx.forward_terms(), full.forward_terms());
    assert_eq!(ctx.guidance_terms(), full.guidance_terms());
}

#[test]
fn cached_term_sums_match_totals() {
    let problem = smoke_problem();
    let ev = Evaluator::new(&problem);
    let sol = jittered(6, problem.dims(), 5);
    let ctx = ev.evaluate(&sol).unwrap();
    let n = problem.source.voxel_count() as f64;
    let f: f64 = ctx.forward_terms().iter().sum::<f64>() + ctx.backward_terms().iter().sum::<f64>();
    assert!(rel_close(
        f / (2.0 * n),
        ctx.objectives().dissimilarity,
        1e-9
    ));
    let d: f64 = ctx.deformation_terms().iter().sum();
    assert!(rel_close(
        d / (10.0 * 750.0),
        ctx.objectives().deformation,
        1e-9
    ));
    assert!(ctx.objectives().is_valid());
}

fn swapped(sol: &Solution) -> Solution {
    Solution::from_points(
        sol.topology().clone(),
        sol.dims(),
        sol.points(GridSide::Target).to_vec(),
        sol.points(GridSide::Source).to_vec(),
    )
    .unwrap()
}

#[test]
fn dissimilarity_symmetric_under_swap() {
    let problem = smoke_problem();
    let swapped_problem = RegistrationProblem::new(
        problem.target.clone(),
        problem.source.clone(),
        None,
        None,
        None,
    )
    .unwrap();
    for seed in 0..3 {
        let sol = jittered(5, problem.dims(), 10 + seed);
        let a = eval_all(&sol, &problem).unwrap().dissimilarity;
        let b = eval_all(&swapped(&sol), &swapped_problem)
            .unwrap()
            .dissimilarity;
        assert!(rel_close(a, b, 1e-12), "{a} vs {b}");
    }
}

#[test]
fn dissimilarity_independent_of_image_resolution() {
    for (src, tgt) in [(0.8f32, 0.3f32), (1.0, 0.0), (0.5, 0.5)] {
        let mut values = Vec::new();
        for n in [8usize, 16] {
            let s = ImageVolume::filled([n; 3], [1.0; 3], src).unwrap();
            let t = ImageVolume::filled([n; 3], [1.0; 3], tgt).unwrap();
            let p = RegistrationProblem::new(s, t, None, None, None).unwrap();
            let sol = init_identity_solution(Arc::new(build_topology([3; 3]).unwrap()), [n; 3]);
            values.push(eval_all(&sol, &p).unwrap().dissimilarity);
        }
        assert!(rel_close(values[0], values[1], 1e-12), "{values:?}");
    }
}

#[test]
fn deformation_zero_iff_lengths_preserved() {
    let sol = jittered(4, [20; 3], 7);
    assert!(eval_deformation(&sol, [1.0; 3]) > 0.0);
    let same = Solution::from_points(
        sol.topology().clone(),
        sol.dims(),
        sol.points(GridSide::Source).to_vec(),
        sol.points(GridSide::Source).to_vec(),
    )
    .unwrap();
    assert_eq!(eval_deformation(&same, [1.0; 3]), 0.0);
}

#[test]
fn guidance_invariant_under_relabeling() {
    let problem = smoke_problem();
    let sol = jittered(5, problem.dims(), 8);
    let base = eval_all(&sol, &problem).unwrap().guidance.unwrap();
    let mut g: GuidanceSet = problem.guidance.clone().unwrap();
    g.correspondences[0].target.shuffle(&mut rng(9));
    g.correspondences[0].source.reverse();
    let relabeled = RegistrationProblem::new(
        problem.source.clone(),
        problem.target.clone(),
        Some(g),
        None,
        None,
    )
    .unwrap();
    let other = eval_all(&sol, &relabeled).unwrap().guidance.unwrap();
    assert!(rel_close(base, other, 1e-12));
}

#[test]
fn guidance_partial_matches_full_with_many_correspondences() {
    let img = ImageVolume::filled([24; 3], [1.0, 1.5, 2.0], 0.5).unwrap();
    let mut r = rng(11);
    let mut pt = || {
        Vec3::new(
            r.gen_range(0.0..23.0),
            r.gen_range(0.0..34.5),
            r.gen_range(0.0..46.0),
        )
    };
    let correspondences = (0..4)
        .map(|i| Correspondence {
            id: format!("c{i}"),
            source: (0..5).map(|_| pt()).collect(),
            target: (0..3).map(|_| pt()).collect(),
        })
        .collect();
    let g = GuidanceSet {
        label: "random".into(),
        correspondences,
    };
    let problem = RegistrationProblem::new(img.clone(), img, Some(g), None, None).unwrap();
    let ev = Evaluator::new(&problem);
    let mut sol = jittered(4, problem.dims(), 12);
    let mut ctx = ev.evaluate(&sol).unwrap();
    let mut undo = Undo::default();
    let mut r = rng(13);
    for _ in 0..200 {
        let (pts, old) = random_move(&mut sol, 0.4, &mut r);
        if !check_feasibility(&sol, Some(&pts)) {
            restore(&mut sol, &old);
            continue;
        }
        let o = ev
            .update(&sol, &mut ctx, &affected_tets(&sol, &pts), &mut undo)
            .unwrap();
        let full = ev.evaluate(&sol).unwrap().objectives();
        assert_eq!(o, full);
    }
}

#[test]
fn feasible_solutions_are_inverse_consistent() {
    let mut sol = jittered(6, [40; 3], 14);
    let mut r = rng(15);
    // Push the grids further away from identity with accepted random moves.
    for _ in 0..400 {
        let (pts, old) = random_move(&mut sol, 0.4, &mut r);
        if !check_feasibility(&sol, Some(&pts)) {
            restore(&mut sol, &old);
        }
    }
    assert!(check_feasibility(&sol, None));
    let fwd = Locator::new(&sol, GridSide::Source);
    let bwd = Locator::new(&sol, GridSide::Target);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = Vec3::new(
            r.gen_range(0.0..39.0),
            r.gen_range(0.0..39.0),
            r.gen_range(0.0..39.0),
        );
        let q = fwd.map(&p).unwrap();
        let back = bwd.map(&q).unwrap();
        worst = worst.max((back - p).norm());
    }
    assert!(worst <= 1e-6, "round-trip error {worst}");
}
