mod common;

use common::*;
use morphreg::geometry::Vec3;
use morphreg::mesh::{build_topology, init_identity_solution, refine_solution, GridSide};
use morphreg::objectives::{check_feasibility, eval_deformation};
use morphreg::transform::Locator;
use morphreg::Error;
use rand::Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

#[test]
fn refinement_preserves_map_and_feasibility() {
    let dims = [32usize; 3];
    for seed in 0..3 {
        let mut sol = jittered(4, dims, 30 + seed);
        let mut r = rng(40 + seed);
        for _ in 0..200 {
            let (pts, old) = random_move(&mut sol, 0.4, &mut r);
            if !check_feasibility(&sol, Some(&pts)) {
                restore(&mut sol, &old);
            }
        }
        let fine = refine_solution(&sol).unwrap();
        assert_eq!(fine.topology().resolution(), [7, 7, 7]);
        assert!(check_feasibility(&fine, None));

        let coarse_topo = sol.topology();
        let fine_topo = fine.topology();
        for p in 0..coarse_topo.point_count() {
            let c = coarse_topo.point_coords(p);
            let q = fine_topo.point_index(2 * c[0], 2 * c[1], 2 * c[2]);
            for g in GridSide::BOTH {
                assert_eq!(fine.points(g)[q], sol.points(g)[p]);
            }
        }

        for g in GridSide::BOTH {
            let a = Locator::new(&sol, g);
            let b = Locator::new(&fine, g);
            for _ in 0..500 {
                let p = Vec3::new(
                    r.gen_range(0.0..31.0),
                    r.gen_range(0.0..31.0),
                    r.gen_range(0.0..31.0),
                );
                let d = (a.map(&p).unwrap() - b.map(&p).unwrap()).norm();
                assert!(d < 1e-9, "{d}");
            }
        }
    }
}

#[test]
fn refining_an_infeasible_solution_fails() {
    let mut sol = init_identity_solution(Arc::new(build_topology([3, 3, 3]).unwrap()), [9; 3]);
    sol.points_mut(GridSide::Source)[4].z = 1.0;
    assert!(matches!(refine_solution(&sol), Err(Error::Infeasible)));
}

#[test]
fn identity_is_feasible_with_zero_deformation() {
    let sol = init_identity_solution(Arc::new(build_topology([6, 6, 6]).unwrap()), [50; 3]);
    assert!(check_feasibility(&sol, None));
    assert_eq!(eval_deformation(&sol, [1.0; 3]), 0.0);
}

#[test]
fn reflection_symmetry_at_benchmark_resolutions() {
    for res in [[11, 11, 11], [7, 3, 5]] {
        let topo = build_topology(res).unwrap();
        let sorted = |t: [usize; 4]| {
            let mut s = t;
            s.sort_unstable();
            s
        };
        let original: BTreeSet<[usize; 4]> = topo.tets().iter().map(|&t| sorted(t)).collect();
        for axis in 0..3 {
            let reflected: BTreeSet<[usize; 4]> = topo
                .tets()
                .iter()
                .map(|t| {
                    sorted(t.map(|p| {
                        let mut c = topo.point_coords(p);
                        c[axis] = res[axis] - 1 - c[axis];
                        topo.point_index(c[0], c[1], c[2])
                    }))
                })
                .collect();
            assert_eq!(reflected, original);
        }
    }
}

#[test]
fn even_point_counts_are_symmetric_about_even_planes() {
    // With an odd number of cubes the middle cube maps onto itself, which no
    // single-diagonal split survives; symmetry then holds about every plane
    // through an even lattice index.
    let res = [6usize, 6, 6];
    let topo = build_topology(res).unwrap();
    let sorted = |t: [usize; 4]| {
        let mut s = t;
        s.sort_unstable();
        s
    };
    let all: BTreeSet<[usize; 4]> = topo.tets().iter().map(|&t| sorted(t)).collect();
    for axis in 0..3 {
        for t in topo.tets() {
            let c: Vec<[usize; 3]> = t.iter().map(|&p| topo.point_coords(p)).collect();
            if c.iter().any(|c| c[axis] > 4) {
                continue;
            }
            let r = sorted(std::array::from_fn(|i| {
                let mut q = c[i];
                q[axis] = 4 - q[axis];
                topo.point_index(q[0], q[1], q[2])
            }));
            assert!(all.contains(&r));
        }
    }
}

#[test]
fn incident_tets_out_of_range() {
    let topo = build_topology([6, 6, 6]).unwrap();
    assert!(matches!(
        topo.incident_tets(216),
        Err(Error::PointIndex { .. })
    ));
}
