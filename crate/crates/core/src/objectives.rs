//! Objectives (dissimilarity, deformation, guidance) and the fold-free
//! constraint, with incremental re-evaluation of changed tets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{for_each_voxel, point_outside_border_polygon, point_outside_surface};
use crate::geometry::{tet_contains, AffineMap, Tet, Vec2, Vec3};
use crate::mesh::{edge_terms, BorderClass, EdgeTerm, GridSide, Side, Solution};
use crate::volume::{ImageVolume, RegistrationProblem, EMPTY_THRESHOLD};

const BLOCK: usize = 64;

/// Smallest admissible tet volume relative to a lattice cell.
const MIN_RELATIVE_VOLUME: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveVector {
    pub dissimilarity: f64,
    pub deformation: f64,
    /// Mean squared guidance distance in mm², absent without guidance.
    pub guidance: Option<f64>,
}

impl ObjectiveVector {
    pub fn new(dissimilarity: f64, deformation: f64, guidance: Option<f64>) -> Self {
        ObjectiveVector {
            dissimilarity,
            deformation,
            guidance,
        }
    }

    /// Number of objectives: 2 or 3.
    pub fn len(&self) -> usize {
        if self.guidance.is_some() {
            3
        } else {
            2
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> f64 {
        match i {
            0 => self.dissimilarity,
            1 => self.deformation,
            2 => self.guidance.unwrap_or(0.0),
            _ => panic!("objective index {i} out of range"),
        }
    }

    /// Guidance reads as 0 when absent.
    pub fn to_array(&self) -> [f64; 3] {
        [self.get(0), self.get(1), self.get(2)]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    /// Pareto dominance for minimization.
    pub fn dominates(&self, other: &Self) -> bool {
        let mut strict = false;
        for i in 0..self.len() {
            let (a, b) = (self.get(i), other.get(i));
            if a > b {
                return false;
            }
            if a < b {
                strict = true;
            }
        }
        strict
    }
}

/// Cached per-tet and per-guidance-point terms of one solution.
#[derive(Clone, Debug)]
pub struct PartialEvalContext {
    forward: Vec<f64>,
    backward: Vec<f64>,
    deformation: Vec<f64>,
    dissimilarity_blocks: Vec<f64>,
    deformation_blocks: Vec<f64>,
    guide_tet: Vec<usize>,
    guide_mapped: Vec<Vec3>,
    guide_term: Vec<f64>,
    objectives: ObjectiveVector,
}

impl PartialEvalContext {
    pub fn objectives(&self) -> ObjectiveVector {
        self.objectives
    }

    pub fn forward_terms(&self) -> &[f64] {
        &self.forward
    }

    pub fn backward_terms(&self) -> &[f64] {
        &self.backward
    }

    pub fn deformation_terms(&self) -> &[f64] {
        &self.deformation
    }

    pub fn guidance_terms(&self) -> &[f64] {
        &self.guide_term
    }
}

/// Everything needed to roll back one [`Evaluator::update`].
#[derive(Clone, Debug, Default)]
pub struct Undo {
    tets: Vec<(usize, f64, f64, f64)>,
    blocks: Vec<(usize, f64, f64)>,
    guide: Vec<(usize, usize, Vec3, f64)>,
    objectives: Option<ObjectiveVector>,
}

impl Undo {
    pub fn clear(&mut self) {
        self.tets.clear();
        self.blocks.clear();
        self.guide.clear();
        self.objectives = None;
    }
}

struct GuidanceEntry {
    /// Grid (and image) the point lives in.
    from: GridSide,
    voxel: Vec3,
    /// Index into `opposite`.
    set: usize,
}

fn deformation_term(sol: &Solution, spacing: &Vec3, t: usize) -> f64 {
    let s = sol.tet(GridSide::Source, t);
    let d = sol.tet(GridSide::Target, t);
    let len = |tet: &Tet, term: &EdgeTerm| -> f64 {
        let v = &tet.v;
        let diff = match *term {
            EdgeTerm::Edge(a, b) => v[b] - v[a],
            EdgeTerm::Spoke { vertex, face } => {
                (v[face[0]] + v[face[1]] + v[face[2]]) / 3.0 - v[vertex]
            }
        };
        diff.component_mul(spacing).norm()
    };
    edge_terms()
        .iter()
        .map(|term| {
            let delta = len(&s, term) - len(&d, term);
            delta * delta
        })
        .sum()
}

/// Objective evaluation bound to one registration problem.
pub struct Evaluator<'p> {
    problem: &'p RegistrationProblem,
    spacing: Vec3,
    entries: Vec<GuidanceEntry>,
    opposite: Vec<Vec<Vec3>>,
}

fn penalty(a: f64, b: f64) -> f64 {
    let empty_a = a < EMPTY_THRESHOLD;
    let empty_b = b < EMPTY_THRESHOLD;
    if empty_a != empty_b {
        1.0
    } else {
        (a - b) * (a - b)
    }
}

fn block_sum(values: &[f64], block: usize) -> f64 {
    let end = ((block + 1) * BLOCK).min(values.len());
    values[block * BLOCK..end].iter().sum()
}

fn block_sum2(a: &[f64], b: &[f64], block: usize) -> f64 {
    let end = ((block + 1) * BLOCK).min(a.len());
    (block * BLOCK..end).map(|i| a[i] + b[i]).sum()
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p RegistrationProblem) -> Self {
        let s = problem.spacing();
        let spacing = Vec3::new(s[0], s[1], s[2]);
        let mut entries = Vec::new();
        let mut opposite = Vec::new();
        if let Some(g) = &problem.guidance {
            for c in &g.correspondences {
                for (from, pts, other) in [
                    (GridSide::Source, &c.source, &c.target),
                    (GridSide::Target, &c.target, &c.source),
                ] {
                    let set = opposite.len();
                    opposite.push(other.clone());
                    for p in pts {
                        entries.push(GuidanceEntry {
                            from,
                            voxel: p.component_div(&spacing),
                            set,
                        });
                    }
                }
            }
        }
        Evaluator {
            problem,
            spacing,
            entries,
            opposite,
        }
    }

    pub fn problem(&self) -> &'p RegistrationProblem {
        self.problem
    }

    pub fn has_guidance(&self) -> bool {
        self.problem.guidance.is_some()
    }

    fn image(&self, grid: GridSide) -> &ImageVolume {
        match grid {
            GridSide::Source => &self.problem.source,
            GridSide::Target => &self.problem.target,
        }
    }

    /// Sum over the voxels owned by tet `t` of grid `from` of the penalty
    /// between its intensity and the intensity pulled from the other image.
    fn dissimilarity_term(&self, sol: &Solution, from: GridSide, t: usize) -> Result<f64> {
        let here = sol.tet(from, t);
        let there = sol.tet(from.other(), t);
        let map = AffineMap::between(&here, &there)?;
        let img = self.image(from);
        let other = self.image(from.other());
        let closed = sol.topology().boundary_faces(t);
        let mut sum = 0.0;
        for_each_voxel(&here, img.dims(), closed, |x, y, z| {
            let q = map.apply(&Vec3::new(x as f64, y as f64, z as f64));
            sum += penalty(other.trilinear(&q), img.get(x, y, z));
        });
        Ok(sum)
    }

    fn tet_terms(&self, sol: &Solution, t: usize) -> Result<(f64, f64, f64)> {
        Ok((
            self.dissimilarity_term(sol, GridSide::Target, t)?,
            self.dissimilarity_term(sol, GridSide::Source, t)?,
            deformation_term(sol, &self.spacing, t),
        ))
    }

    fn locate_in<I>(&self, sol: &Solution, grid: GridSide, p: &Vec3, candidates: I) -> Option<usize>
    where
        I: IntoIterator<Item = usize>,
    {
        let topo = sol.topology();
        candidates
            .into_iter()
            .find(|&t| tet_contains(&sol.tet(grid, t), p, topo.boundary_faces(t)))
    }

    fn guide_point(&self, sol: &Solution, i: usize, tet: usize) -> Result<(Vec3, f64)> {
        let e = &self.entries[i];
        let map = AffineMap::between(&sol.tet(e.from, tet), &sol.tet(e.from.other(), tet))?;
        let mapped = map.apply(&e.voxel).component_mul(&self.spacing);
        let best = self.opposite[e.set]
            .iter()
            .map(|q| (mapped - q).norm_squared())
            .fold(f64::INFINITY, f64::min);
        Ok((mapped, best))
    }

    fn totals(&self, ctx: &PartialEvalContext, sol: &Solution) -> ObjectiveVector {
        let n = self.problem.source.voxel_count() as f64;
        let t = sol.topology().tet_count() as f64;
        let diss: f64 = ctx.dissimilarity_blocks.iter().sum::<f64>() / (2.0 * n);
        let deform: f64 = ctx.deformation_blocks.iter().sum::<f64>() / (10.0 * t);
        let guidance = self.problem.guidance.as_ref().map(|_| {
            if ctx.guide_term.is_empty() {
                0.0
            } else {
                ctx.guide_term.iter().sum::<f64>() / ctx.guide_term.len() as f64
            }
        });
        ObjectiveVector::new(diss, deform, guidance)
    }

    /// Full evaluation, building a fresh context.
    pub fn evaluate(&self, sol: &Solution) -> Result<PartialEvalContext> {
        let topo = sol.topology();
        if sol.dims() != self.problem.dims() {
            return Err(Error::DimsMismatch(sol.dims(), self.problem.dims()));
        }
        let nt = topo.tet_count();
        let mut forward = Vec::with_capacity(nt);
        let mut backward = Vec::with_capacity(nt);
        let mut deformation = Vec::with_capacity(nt);
        for t in 0..nt {
            let (f, b, d) = self.tet_terms(sol, t)?;
            forward.push(f);
            backward.push(b);
            deformation.push(d);
        }
        let blocks = nt.div_ceil(BLOCK);
        let dissimilarity_blocks = (0..blocks)
            .map(|b| block_sum2(&forward, &backward, b))
            .collect();
        let deformation_blocks = (0..blocks).map(|b| block_sum(&deformation, b)).collect();

        let mut guide_tet = Vec::with_capacity(self.entries.len());
        let mut guide_mapped = Vec::with_capacity(self.entries.len());
        let mut guide_term = Vec::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            let tet = self
                .locate_in(sol, e.from, &e.voxel, 0..nt)
                .ok_or(Error::Uncovered(e.voxel.into()))?;
            let (mapped, term) = self.guide_point(sol, i, tet)?;
            guide_tet.push(tet);
            guide_mapped.push(mapped);
            guide_term.push(term);
        }

        let mut ctx = PartialEvalContext {
            forward,
            backward,
            deformation,
            dissimilarity_blocks,
            deformation_blocks,
            guide_tet,
            guide_mapped,
            guide_term,
            objectives: ObjectiveVector::new(0.0, 0.0, None),
        };
        ctx.objectives = self.totals(&ctx, sol);
        Ok(ctx)
    }

    /// Re-evaluates the tets in `affected` (sorted, unique) after their
    /// vertices moved. The union of `affected` must cover the same region
    /// before and after the move, which holds for the incident tets of the
    /// moved points of a feasible solution. On error the context may be
    /// partially updated; roll back with [`Evaluator::revert`].
    pub fn update(
        &self,
        sol: &Solution,
        ctx: &mut PartialEvalContext,
        affected: &[usize],
        undo: &mut Undo,
    ) -> Result<ObjectiveVector> {
        undo.clear();
        undo.objectives = Some(ctx.objectives);
        for &t in affected {
            undo.tets
                .push((t, ctx.forward[t], ctx.backward[t], ctx.deformation[t]));
        }
        let blocks: BTreeSet<usize> = affected.iter().map(|t| t / BLOCK).collect();
        for &b in &blocks {
            undo.blocks
                .push((b, ctx.dissimilarity_blocks[b], ctx.deformation_blocks[b]));
        }

        for &t in affected {
            let (f, b, d) = self.tet_terms(sol, t)?;
            ctx.forward[t] = f;
            ctx.backward[t] = b;
            ctx.deformation[t] = d;
        }
        for &b in &blocks {
            ctx.dissimilarity_blocks[b] = block_sum2(&ctx.forward, &ctx.backward, b);
            ctx.deformation_blocks[b] = block_sum(&ctx.deformation, b);
        }

        for i in 0..self.entries.len() {
            let old = ctx.guide_tet[i];
            if affected.binary_search(&old).is_err() {
                continue;
            }
            undo.guide
                .push((i, old, ctx.guide_mapped[i], ctx.guide_term[i]));
            let e = &self.entries[i];
            let nt = sol.topology().tet_count();
            let tet = self
                .locate_in(sol, e.from, &e.voxel, affected.iter().copied())
                .or_else(|| self.locate_in(sol, e.from, &e.voxel, 0..nt))
                .ok_or(Error::Uncovered(e.voxel.into()))?;
            let (mapped, term) = self.guide_point(sol, i, tet)?;
            ctx.guide_tet[i] = tet;
            ctx.guide_mapped[i] = mapped;
            ctx.guide_term[i] = term;
        }

        ctx.objectives = self.totals(ctx, sol);
        Ok(ctx.objectives)
    }

    pub fn revert(&self, ctx: &mut PartialEvalContext, undo: &Undo) {
        for &(t, f, b, d) in &undo.tets {
            ctx.forward[t] = f;
            ctx.backward[t] = b;
            ctx.deformation[t] = d;
        }
        for &(b, s, d) in &undo.blocks {
            ctx.dissimilarity_blocks[b] = s;
            ctx.deformation_blocks[b] = d;
        }
        for &(i, tet, mapped, term) in &undo.guide {
            ctx.guide_tet[i] = tet;
            ctx.guide_mapped[i] = mapped;
            ctx.guide_term[i] = term;
        }
        if let Some(o) = undo.objectives {
            ctx.objectives = o;
        }
    }
}

pub fn eval_all(sol: &Solution, problem: &RegistrationProblem) -> Result<ObjectiveVector> {
    Ok(Evaluator::new(problem).evaluate(sol)?.objectives)
}

pub fn eval_dissimilarity(sol: &Solution, problem: &RegistrationProblem) -> Result<f64> {
    Ok(eval_all(sol, problem)?.dissimilarity)
}

/// Needs no image data; works on infeasible solutions as well.
pub fn eval_deformation(sol: &Solution, spacing: [f64; 3]) -> f64 {
    let spacing = Vec3::new(spacing[0], spacing[1], spacing[2]);
    let nt = sol.topology().tet_count();
    let terms: Vec<f64> = (0..nt)
        .map(|t| deformation_term(sol, &spacing, t))
        .collect();
    let blocks: f64 = (0..nt.div_ceil(BLOCK)).map(|b| block_sum(&terms, b)).sum();
    blocks / (10.0 * nt as f64)
}

pub fn eval_guidance(sol: &Solution, problem: &RegistrationProblem) -> Result<Option<f64>> {
    Ok(eval_all(sol, problem)?.guidance)
}

fn cell_volume(sol: &Solution) -> f64 {
    let res = sol.topology().resolution();
    let ext = sol.extent();
    (0..3).map(|a| ext[a] / (res[a] - 1) as f64).product()
}

fn tet_ok(sol: &Solution, grid: GridSide, t: usize, min_volume: f64) -> bool {
    let v = sol.tet(grid, t).signed_volume();
    v.is_finite() && v > min_volume
}

fn point_ok(sol: &Solution, grid: GridSide, p: usize) -> bool {
    let topo = sol.topology();
    let pts = sol.points(grid);
    let x = pts[p];
    if !x.iter().all(|c| c.is_finite()) {
        return false;
    }
    let ext = sol.extent();
    for (a, side) in topo.fixed_axes(p).iter().enumerate() {
        let want = match side {
            Some(Side::Min) => 0.0,
            Some(Side::Max) => ext[a],
            None => continue,
        };
        if x[a] != want {
            return false;
        }
    }
    match topo.border_class(p) {
        BorderClass::Corner => true,
        BorderClass::Edge { free_axis } => {
            let (lo, hi) = topo.edge_neighbors(p, free_axis);
            pts[lo][free_axis] < x[free_axis] && x[free_axis] < pts[hi][free_axis]
        }
        BorderClass::Face { axis, .. } => {
            let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
            let flat = |q: &Vec3| Vec2::new(q[u], q[w]);
            let polygon: Vec<[Vec2; 2]> = topo
                .border_link(p)
                .iter()
                .map(|&[a, b]| [flat(&pts[a]), flat(&pts[b])])
                .collect();
            !point_outside_border_polygon(&flat(&x), &polygon)
        }
        BorderClass::Interior => {
            let faces: Vec<[Vec3; 3]> = topo
                .link_faces(p)
                .iter()
                .map(|f| f.map(|i| pts[i]))
                .collect();
            !point_outside_surface(&x, &faces)
        }
    }
}

/// Fold-free check in both grids. With `moved`, only the moved points,
/// their neighbours and their incident tets are checked.
pub fn check_feasibility(sol: &Solution, moved: Option<&[usize]>) -> bool {
    let topo = sol.topology();
    let min_volume = MIN_RELATIVE_VOLUME * cell_volume(sol);
    match moved {
        None => GridSide::BOTH.iter().all(|&g| {
            (0..topo.tet_count()).all(|t| tet_ok(sol, g, t, min_volume))
                && (0..topo.point_count()).all(|p| point_ok(sol, g, p))
        }),
        Some(moved) => {
            let mut points = BTreeSet::new();
            let mut tets = BTreeSet::new();
            for &p in moved {
                if p >= topo.point_count() {
                    return false;
                }
                points.insert(p);
                points.extend(topo.neighbors(p).iter().copied());
                tets.extend(topo.incident(p).iter().copied());
            }
            GridSide::BOTH.iter().all(|&g| {
                tets.iter().all(|&t| tet_ok(sol, g, t, min_volume))
                    && points.iter().all(|&p| point_ok(sol, g, p))
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, init_identity_solution};
    use crate::volume::{Correspondence, GuidanceSet};
    use std::sync::Arc;

    fn identity(res: usize, dims: usize) -> Solution {
        init_identity_solution(Arc::new(build_topology([res; 3]).unwrap()), [dims; 3])
    }

    fn constant_problem(dims: usize, src: f32, tgt: f32) -> RegistrationProblem {
        let s = ImageVolume::filled([dims; 3], [1.0; 3], src).unwrap();
        let t = ImageVolume::filled([dims; 3], [1.0; 3], tgt).unwrap();
        RegistrationProblem::new(s, t, None, None, None).unwrap()
    }

    #[test]
    fn identity_on_identical_images_is_zero() {
        let p = constant_problem(8, 0.5, 0.5);
        let o = eval_all(&identity(3, 8), &p).unwrap();
        assert_eq!(o, ObjectiveVector::new(0.0, 0.0, None));
    }

    #[test]
    fn maximal_mismatch_is_one() {
        let p = constant_problem(8, 1.0, 0.0);
        let o = eval_all(&identity(3, 8), &p).unwrap();
        assert_eq!(o.dissimilarity, 1.0);
    }

    #[test]
    fn every_voxel_counted_once_per_direction() {
        let p = constant_problem(9, 1.0, 0.0);
        let ctx = Evaluator::new(&p).evaluate(&identity(4, 9)).unwrap();
        let f: f64 = ctx.forward_terms().iter().sum();
        let b: f64 = ctx.backward_terms().iter().sum();
        assert_eq!(f, 729.0);
        assert_eq!(b, 729.0);
    }

    #[test]
    fn deformation_scaled_cube_matches_hand_computation() {
        let topo = Arc::new(build_topology([2, 2, 2]).unwrap());
        let mut sol = init_identity_solution(topo.clone(), [3, 3, 3]);
        // Source grid is the unit-ish cube scaled by 2 about the origin.
        for p in 0..8 {
            let c = topo.point_coords(p);
            sol.points_mut(GridSide::Source)[p] = Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64);
        }
        let d = eval_deformation(&sol, [1.0; 3]);
        // Every term (2L - L)^2 = L^2, L from the unit cube.
        let mut expected = 0.0;
        for t in topo.tets() {
            let v: Vec<Vec3> = t
                .iter()
                .map(|&p| {
                    let c = topo.point_coords(p);
                    Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)
                })
                .collect();
            for term in edge_terms() {
                let l = match term {
                    EdgeTerm::Edge(a, b) => (v[b] - v[a]).norm(),
                    EdgeTerm::Spoke { vertex, face } => {
                        ((v[face[0]] + v[face[1]] + v[face[2]]) / 3.0 - v[vertex]).norm()
                    }
                };
                expected += l * l;
            }
        }
        expected /= 60.0;
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
    }

    #[test]
    fn deformation_translation_invariant() {
        let mut sol = identity(3, 10);
        for g in GridSide::BOTH {
            for p in sol.points_mut(g) {
                *p += Vec3::new(0.3, -1.2, 2.0);
            }
        }
        assert_eq!(eval_deformation(&sol, [1.5, 1.0, 2.0]), 0.0);
    }

    fn single_point_problem(source: Vec3, target: Vec3) -> RegistrationProblem {
        let img = ImageVolume::filled([9; 3], [1.0; 3], 0.5).unwrap();
        let g = GuidanceSet {
            label: "g".into(),
            correspondences: vec![Correspondence {
                id: "a".into(),
                source: vec![source],
                target: vec![target],
            }],
        };
        RegistrationProblem::new(img.clone(), img, Some(g), None, None).unwrap()
    }

    #[test]
    fn guidance_two_mm_gives_four() {
        let p = single_point_problem(Vec3::new(4.0, 4.0, 4.0), Vec3::new(6.0, 4.0, 4.0));
        let o = eval_all(&identity(3, 9), &p).unwrap();
        assert_eq!(o.guidance, Some(4.0));
        let p = single_point_problem(Vec3::new(4.0, 4.0, 4.0), Vec3::new(4.0, 4.0, 4.0));
        assert_eq!(eval_all(&identity(3, 9), &p).unwrap().guidance, Some(0.0));
    }

    #[test]
    fn feasibility_of_identity_and_fold() {
        let mut sol = identity(5, 9);
        assert!(check_feasibility(&sol, None));
        // Push the center point beyond the opposite faces of its star.
        sol.points_mut(GridSide::Target)[62] = Vec3::new(6.5, 4.0, 4.0);
        assert!(!check_feasibility(&sol, None));
        assert!(!check_feasibility(&sol, Some(&[62])));
        sol.points_mut(GridSide::Target)[62] = Vec3::new(5.0, 4.5, 3.5);
        assert!(check_feasibility(&sol, Some(&[62])));
    }

    #[test]
    fn border_point_leaving_plane_is_infeasible() {
        let mut sol = identity(3, 9);
        // Point 4 is the center of the z = 0 face.
        sol.points_mut(GridSide::Source)[4].z = 0.5;
        assert!(!check_feasibility(&sol, Some(&[4])));
        sol.points_mut(GridSide::Source)[4] = Vec3::new(4.5, 3.0, 0.0);
        assert!(check_feasibility(&sol, Some(&[4])));
        sol.points_mut(GridSide::Source)[4] = Vec3::new(9.5, 3.0, 0.0);
        assert!(!check_feasibility(&sol, Some(&[4])));
    }

    #[test]
    fn edge_and_corner_points() {
        let mut sol = identity(3, 9);
        sol.points_mut(GridSide::Target)[1].x = 6.0;
        assert!(check_feasibility(&sol, Some(&[1])));
        sol.points_mut(GridSide::Target)[1].x = 8.0;
        assert!(!check_feasibility(&sol, Some(&[1])));
        let mut sol = identity(3, 9);
        sol.points_mut(GridSide::Target)[0].x = 0.1;
        assert!(!check_feasibility(&sol, None));
    }

    #[test]
    fn nan_point_is_infeasible() {
        let mut sol = identity(3, 9);
        sol.points_mut(GridSide::Source)[13].y = f64::NAN;
        assert!(!check_feasibility(&sol, Some(&[13])));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = constant_problem(8, 0.5, 0.5);
        assert!(eval_all(&identity(3, 9), &p).is_err());
    }
}
