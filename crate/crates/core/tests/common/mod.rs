#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use morphreg::geometry::Vec3;
use morphreg::mesh::{build_topology, jittered_solution, GridSide, Solution};
use morphreg::volume::{generate_synthetic_pair, RegistrationProblem, SyntheticConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn smoke_problem() -> RegistrationProblem {
    generate_synthetic_pair(&SyntheticConfig::smoke()).unwrap()
}

pub fn jittered(res: usize, dims: [usize; 3], seed: u64) -> Solution {
    let topo = Arc::new(build_topology([res; 3]).unwrap());
    jittered_solution(topo, dims, 0.1, &mut rng(seed))
}

pub fn affected_tets(sol: &Solution, points: &[usize]) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for &p in points {
        set.extend(sol.topology().incident_tets(p).unwrap().iter().copied());
    }
    set.into_iter().collect()
}

/// Perturbs the four points of a random tet in both grids by `scale` cell
/// edges. Returns the moved points and their old positions.
pub fn random_move(
    sol: &mut Solution,
    scale: f64,
    r: &mut impl Rng,
) -> (Vec<usize>, Vec<(GridSide, usize, Vec3)>) {
    let topo = sol.topology().clone();
    let t = r.gen_range(0..topo.tet_count());
    let pts = topo.tet(t).to_vec();
    let cell = sol.extent()[0] / (topo.resolution()[0] - 1) as f64;
    let mut old = Vec::new();
    for g in GridSide::BOTH {
        for &p in &pts {
            let before = sol.points(g)[p];
            old.push((g, p, before));
            let d = Vec3::new(
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
            ) * (scale * cell);
            let v = sol.project(p, before + d);
            sol.points_mut(g)[p] = v;
        }
    }
    (pts, old)
}

pub fn restore(sol: &mut Solution, old: &[(GridSide, usize, Vec3)]) {
    for &(g, p, v) in old.iter().rev() {
        sol.points_mut(g)[p] = v;
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
