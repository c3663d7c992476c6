//! Tetrahedral grid topology and the dual-grid solution representation.
//!
//! Each cube of the point lattice is split into the 6 tetrahedra around one
//! of its main diagonals. Cube `(i, j, k)` uses the canonical split mirrored
//! along every axis whose index is odd, so every 2×2×2 group of cubes is
//! symmetric about its center planes and neighbouring cubes agree on the
//! diagonal of their shared face.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{FaceMask, Tet, Vec3, FACES};

/// Cube corners are labelled `bx + 2 by + 4 bz`; all six tets share the
/// diagonal 0–7.
pub const CANONICAL_TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 3, 2, 7],
    [0, 2, 6, 7],
    [0, 6, 4, 7],
    [0, 4, 5, 7],
    [0, 5, 1, 7],
];

/// Local vertex pairs of the 6 tet edges.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Min,
    Max,
}

/// Where a grid point sits relative to the image border.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BorderClass {
    Interior,
    /// On one border plane, free to slide within it.
    Face {
        axis: usize,
        side: Side,
    },
    /// On a border edge, free to slide along `free_axis`.
    Edge {
        free_axis: usize,
    },
    Corner,
}

/// One of the 10 length terms of a tet, in local vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeTerm {
    Edge(usize, usize),
    /// From `vertex` to the centroid of the opposite `face`.
    Spoke {
        vertex: usize,
        face: [usize; 3],
    },
}

pub fn edge_terms() -> [EdgeTerm; 10] {
    let mut out = [EdgeTerm::Edge(0, 0); 10];
    for (slot, [a, b]) in out.iter_mut().zip(TET_EDGES) {
        *slot = EdgeTerm::Edge(a, b);
    }
    for v in 0..4 {
        out[6 + v] = EdgeTerm::Spoke {
            vertex: v,
            face: FACES[v],
        };
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridSide {
    Source,
    Target,
}

impl GridSide {
    pub const BOTH: [GridSide; 2] = [GridSide::Source, GridSide::Target];

    pub fn other(self) -> Self {
        match self {
            GridSide::Source => GridSide::Target,
            GridSide::Target => GridSide::Source,
        }
    }
}

#[derive(Debug)]
pub struct GridTopology {
    resolution: [usize; 3],
    tets: Vec<[usize; 4]>,
    cube_of_tet: Vec<usize>,
    tets_of_point: Vec<Vec<usize>>,
    fixed: Vec<[Option<Side>; 3]>,
    boundary_faces: Vec<FaceMask>,
    link_faces: Vec<Vec<[usize; 3]>>,
    border_links: Vec<Vec<[usize; 2]>>,
    neighbors: Vec<Vec<usize>>,
}

impl GridTopology {
    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    pub fn point_count(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn cube_count(&self) -> usize {
        self.resolution.iter().map(|n| n - 1).product()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    /// Decision variables of a dual-grid solution: 3 coordinates per point,
    /// two grids.
    pub fn variable_count(&self) -> usize {
        2 * 3 * self.point_count()
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn tet(&self, t: usize) -> [usize; 4] {
        self.tets[t]
    }

    pub fn cube_of_tet(&self, t: usize) -> usize {
        self.cube_of_tet[t]
    }

    /// The six tets of a cube are stored contiguously.
    pub fn tets_of_cube(&self, cube: usize) -> std::ops::Range<usize> {
        6 * cube..6 * cube + 6
    }

    pub fn point_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }

    pub fn point_coords(&self, p: usize) -> [usize; 3] {
        let [nx, ny, _] = self.resolution;
        [p % nx, (p / nx) % ny, p / (nx * ny)]
    }

    /// Tets that have `p` as a vertex: the ones to re-evaluate when `p`
    /// moves.
    pub fn incident_tets(&self, p: usize) -> Result<&[usize]> {
        self.tets_of_point
            .get(p)
            .map(|v| v.as_slice())
            .ok_or(Error::PointIndex {
                index: p,
                count: self.point_count(),
            })
    }

    pub(crate) fn incident(&self, p: usize) -> &[usize] {
        &self.tets_of_point[p]
    }

    pub fn border_class(&self, p: usize) -> BorderClass {
        let f = self.fixed[p];
        let n = f.iter().filter(|s| s.is_some()).count();
        match n {
            0 => BorderClass::Interior,
            1 => {
                let axis = f.iter().position(|s| s.is_some()).unwrap();
                BorderClass::Face {
                    axis,
                    side: f[axis].unwrap(),
                }
            }
            2 => BorderClass::Edge {
                free_axis: f.iter().position(|s| s.is_none()).unwrap(),
            },
            _ => BorderClass::Corner,
        }
    }

    /// Per axis: the border the point is pinned to, if any.
    pub fn fixed_axes(&self, p: usize) -> [Option<Side>; 3] {
        self.fixed[p]
    }

    /// Faces of tet `t` that lie on the image border.
    pub fn boundary_faces(&self, t: usize) -> FaceMask {
        self.boundary_faces[t]
    }

    /// Opposite faces of all tets incident to `p` (global point indices).
    pub fn link_faces(&self, p: usize) -> &[[usize; 3]] {
        &self.link_faces[p]
    }

    /// For a face-border point: the polygon around it on its border plane.
    pub fn border_link(&self, p: usize) -> &[[usize; 2]] {
        &self.border_links[p]
    }

    /// Points sharing at least one tet with `p`.
    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.neighbors[p]
    }

    /// Neighbouring points along the free axis of a border-edge point.
    pub fn edge_neighbors(&self, p: usize, axis: usize) -> (usize, usize) {
        let stride = [
            1,
            self.resolution[0],
            self.resolution[0] * self.resolution[1],
        ][axis];
        (p - stride, p + stride)
    }
}

pub fn build_topology(resolution: [usize; 3]) -> Result<GridTopology> {
    if resolution.iter().any(|&n| n < 2) {
        return Err(Error::InvalidResolution(resolution));
    }
    let [nx, ny, nz] = resolution;
    let n_points = nx * ny * nz;
    let point = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);

    let mut tets = Vec::with_capacity(6 * (nx - 1) * (ny - 1) * (nz - 1));
    let mut cube_of_tet = Vec::with_capacity(tets.capacity());
    for ck in 0..nz - 1 {
        for cj in 0..ny - 1 {
            for ci in 0..nx - 1 {
                let cube = ci + (nx - 1) * (cj + (ny - 1) * ck);
                let mirror = (ci % 2) | ((cj % 2) << 1) | ((ck % 2) << 2);
                let corner = |label: usize| {
                    let b = label ^ mirror;
                    point(ci + (b & 1), cj + ((b >> 1) & 1), ck + ((b >> 2) & 1))
                };
                let lattice = |p: usize| {
                    let c = [p % nx, (p / nx) % ny, p / (nx * ny)];
                    Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)
                };
                for local in CANONICAL_TETS {
                    let mut t = local.map(corner);
                    let shape =
                        Tet::new(lattice(t[0]), lattice(t[1]), lattice(t[2]), lattice(t[3]));
                    if shape.signed_volume() < 0.0 {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                    cube_of_tet.push(cube);
                }
            }
        }
    }

    let mut tets_of_point = vec![Vec::new(); n_points];
    for (ti, t) in tets.iter().enumerate() {
        for &p in t {
            tets_of_point[p].push(ti);
        }
    }

    let fixed: Vec<[Option<Side>; 3]> = (0..n_points)
        .map(|p| {
            let c = [p % nx, (p / nx) % ny, p / (nx * ny)];
            let mut f = [None; 3];
            for a in 0..3 {
                if c[a] == 0 {
                    f[a] = Some(Side::Min);
                } else if c[a] == resolution[a] - 1 {
                    f[a] = Some(Side::Max);
                }
            }
            f
        })
        .collect();

    let shared_plane = |verts: [usize; 3]| -> bool {
        (0..3).any(|a| {
            let s = fixed[verts[0]][a];
            s.is_some() && verts.iter().all(|&v| fixed[v][a] == s)
        })
    };
    let boundary_faces: Vec<FaceMask> = tets
        .iter()
        .map(|t| {
            let mut m = FaceMask::NONE;
            for (f, idx) in FACES.iter().enumerate() {
                if shared_plane(idx.map(|i| t[i])) {
                    m = m.with(f);
                }
            }
            m
        })
        .collect();

    let mut link_faces = vec![Vec::new(); n_points];
    let mut border_links = vec![Vec::new(); n_points];
    let mut neighbors = vec![Vec::new(); n_points];
    for p in 0..n_points {
        let mut ns = BTreeSet::new();
        for &ti in &tets_of_point[p] {
            let t = tets[ti];
            let local = t.iter().position(|&v| v == p).unwrap();
            link_faces[p].push(FACES[local].map(|i| t[i]));
            for &v in &t {
                if v != p {
                    ns.insert(v);
                }
            }
            let mask = boundary_faces[ti];
            for (f, idx) in FACES.iter().enumerate() {
                if f != local && mask.contains(f) {
                    let face = idx.map(|i| t[i]);
                    let others: Vec<usize> = face.iter().copied().filter(|&v| v != p).collect();
                    border_links[p].push([others[0], others[1]]);
                }
            }
        }
        neighbors[p] = ns.into_iter().collect();
    }

    Ok(GridTopology {
        resolution,
        tets,
        cube_of_tet,
        tets_of_point,
        fixed,
        boundary_faces,
        link_faces,
        border_links,
        neighbors,
    })
}

/// A dual-grid registration: one point array per grid over a shared
/// topology, in continuous voxel coordinates.
#[derive(Clone, Debug)]
pub struct Solution {
    topology: Arc<GridTopology>,
    extent: [f64; 3],
    source: Vec<Vec3>,
    target: Vec<Vec3>,
}

impl PartialEq for Solution {
    fn eq(&self, other: &Self) -> bool {
        self.topology.resolution == other.topology.resolution
            && self.extent == other.extent
            && self.source == other.source
            && self.target == other.target
    }
}

impl Solution {
    pub fn from_points(
        topology: Arc<GridTopology>,
        dims: [usize; 3],
        source: Vec<Vec3>,
        target: Vec<Vec3>,
    ) -> Result<Self> {
        let n = topology.point_count();
        if source.len() != n || target.len() != n {
            return Err(Error::Config(format!(
                "expected {n} points per grid, got {} and {}",
                source.len(),
                target.len()
            )));
        }
        Ok(Solution {
            topology,
            extent: dims.map(|d| (d - 1) as f64),
            source,
            target,
        })
    }

    pub fn topology(&self) -> &Arc<GridTopology> {
        &self.topology
    }

    /// Upper coordinate of the image domain per axis (`dims - 1`).
    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn dims(&self) -> [usize; 3] {
        self.extent.map(|e| e as usize + 1)
    }

    pub fn points(&self, grid: GridSide) -> &[Vec3] {
        match grid {
            GridSide::Source => &self.source,
            GridSide::Target => &self.target,
        }
    }

    pub fn points_mut(&mut self, grid: GridSide) -> &mut [Vec3] {
        match grid {
            GridSide::Source => &mut self.source,
            GridSide::Target => &mut self.target,
        }
    }

    pub fn tet(&self, grid: GridSide, t: usize) -> Tet {
        let pts = self.points(grid);
        let [a, b, c, d] = self.topology.tets[t];
        Tet::new(pts[a], pts[b], pts[c], pts[d])
    }

    /// The reference lattice position of point `p` over this domain.
    pub fn lattice_position(&self, p: usize) -> Vec3 {
        lattice_position(&self.topology, self.extent, p)
    }

    /// Pins the border-constrained coordinates of `p` to their plane.
    pub fn project(&self, p: usize, mut v: Vec3) -> Vec3 {
        for (a, side) in self.topology.fixed[p].iter().enumerate() {
            match side {
                Some(Side::Min) => v[a] = 0.0,
                Some(Side::Max) => v[a] = self.extent[a],
                None => {}
            }
        }
        v
    }

    pub fn variable_count(&self) -> usize {
        self.topology.variable_count()
    }

    /// Little-endian record: resolution as three `u64`, then source and
    /// target points as `f64` triples.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 48 * self.source.len());
        for n in self.topology.resolution {
            out.extend((n as u64).to_le_bytes());
        }
        for p in self.source.iter().chain(&self.target) {
            for c in p.iter() {
                out.extend(c.to_le_bytes());
            }
        }
        out
    }

    /// Decodes a record written by [`Solution::encode`]. `topology` is
    /// reused when its resolution matches the record.
    pub fn decode(
        bytes: &[u8],
        dims: [usize; 3],
        topology: Option<&Arc<GridTopology>>,
    ) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("malformed solution record: {m}"));
        if bytes.len() < 24 {
            return Err(bad("truncated header"));
        }
        let mut res = [0usize; 3];
        for (a, chunk) in bytes[..24].chunks_exact(8).enumerate() {
            res[a] = u64::from_le_bytes(chunk.try_into().unwrap()) as usize;
        }
        let topology = match topology {
            Some(t) if t.resolution == res => Arc::clone(t),
            _ => Arc::new(build_topology(res)?),
        };
        let n = topology.point_count();
        if bytes.len() != 24 + 48 * n {
            return Err(bad("length does not match resolution"));
        }
        let vals: Vec<f64> = bytes[24..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let pts: Vec<Vec3> = vals
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect();
        let (s, t) = pts.split_at(n);
        Solution::from_points(topology, dims, s.to_vec(), t.to_vec())
    }
}

fn lattice_position(topology: &GridTopology, extent: [f64; 3], p: usize) -> Vec3 {
    let c = topology.point_coords(p);
    let mut v = Vec3::zeros();
    for a in 0..3 {
        let n = topology.resolution[a] - 1;
        v[a] = (c[a] as f64 * extent[a]) / n as f64;
    }
    v
}

/// Both grids on the same regular lattice spanning the image domain.
pub fn init_identity_solution(topology: Arc<GridTopology>, dims: [usize; 3]) -> Solution {
    let extent = dims.map(|d| (d - 1) as f64);
    let pts: Vec<Vec3> = (0..topology.point_count())
        .map(|p| lattice_position(&topology, extent, p))
        .collect();
    Solution {
        topology,
        extent,
        source: pts.clone(),
        target: pts,
    }
}

/// Identity plus Gaussian jitter of every free coordinate, with standard
/// deviation `fraction` of the cell edge along each axis. Each point is
/// redrawn until the solution stays fold-free; after `MAX_JITTER_TRIES`
/// failures it keeps its lattice position.
pub fn jittered_solution<R: Rng + ?Sized>(
    topology: Arc<GridTopology>,
    dims: [usize; 3],
    fraction: f64,
    rng: &mut R,
) -> Solution {
    let mut sol = init_identity_solution(topology, dims);
    let res = sol.topology.resolution;
    let sigma: [f64; 3] = std::array::from_fn(|a| fraction * sol.extent[a] / (res[a] - 1) as f64);
    let normal = StandardNormal;
    for grid in GridSide::BOTH {
        for p in 0..sol.topology.point_count() {
            let home = sol.points(grid)[p];
            for _ in 0..MAX_JITTER_TRIES {
                let mut v = home;
                for a in 0..3 {
                    let z: f64 = normal.sample(rng);
                    v[a] += sigma[a] * z;
                }
                sol.points_mut(grid)[p] = sol.project(p, v);
                if crate::objectives::check_feasibility(&sol, Some(&[p])) {
                    break;
                }
                sol.points_mut(grid)[p] = home;
            }
        }
    }
    sol
}

const MAX_JITTER_TRIES: usize = 100;

/// Splits every cube into 8 (27 points). New points are placed at the
/// midpoints of mesh edges: cube edges, face diagonals and the cube
/// diagonal, so both grids keep exactly the same piecewise-linear shape and
/// the result stays fold-free.
pub fn refine_solution(coarse: &Solution) -> Result<Solution> {
    if !crate::objectives::check_feasibility(coarse, None) {
        return Err(Error::Infeasible);
    }
    let cr = coarse.topology.resolution;
    let fine_res = cr.map(|n| 2 * n - 1);
    let topology = Arc::new(build_topology(fine_res)?);
    let n = topology.point_count();
    let mut source = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for p in 0..n {
        let f = topology.point_coords(p);
        let mut a = [0usize; 3];
        let mut b = [0usize; 3];
        for ax in 0..3 {
            if f[ax] % 2 == 0 {
                a[ax] = f[ax] / 2;
                b[ax] = f[ax] / 2;
            } else {
                let c = (f[ax] - 1) / 2;
                let m = c % 2;
                a[ax] = c + m;
                b[ax] = c + 1 - m;
            }
        }
        let pa = coarse.topology.point_index(a[0], a[1], a[2]);
        let pb = coarse.topology.point_index(b[0], b[1], b[2]);
        if pa == pb {
            source.push(coarse.source[pa]);
            target.push(coarse.target[pa]);
        } else {
            source.push((coarse.source[pa] + coarse.source[pb]) * 0.5);
            target.push((coarse.target[pa] + coarse.target[pb]) * 0.5);
        }
    }
    Ok(Solution {
        topology,
        extent: coarse.extent,
        source,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn face_counts(topo: &GridTopology) -> HashMap<[usize; 3], usize> {
        let mut counts = HashMap::new();
        for t in topo.tets() {
            for f in FACES {
                let mut key = f.map(|i| t[i]);
                key.sort_unstable();
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        counts
    }

    fn on_border(topo: &GridTopology, face: [usize; 3]) -> bool {
        (0..3).any(|a| {
            let s = topo.fixed_axes(face[0])[a];
            s.is_some() && face.iter().all(|&v| topo.fixed_axes(v)[a] == s)
        })
    }

    #[test]
    fn counts_match_lattice() {
        let t = build_topology([2, 2, 2]).unwrap();
        assert_eq!(t.tet_count(), 6);
        assert_eq!(t.point_count(), 8);
        let t = build_topology([6, 6, 6]).unwrap();
        assert_eq!(t.tet_count(), 750);
        assert_eq!(t.point_count(), 216);
        assert_eq!(t.variable_count(), 1296);
        let t = build_topology([11, 11, 11]).unwrap();
        assert_eq!(t.tet_count(), 6000);
        assert_eq!(t.variable_count(), 7986);
        assert!(matches!(
            build_topology([1, 4, 4]),
            Err(Error::InvalidResolution(_))
        ));
    }

    #[test]
    fn faces_are_conforming() {
        for res in [[2, 2, 2], [3, 3, 3], [4, 3, 5], [6, 6, 6]] {
            let topo = build_topology(res).unwrap();
            for (face, count) in face_counts(&topo) {
                if on_border(&topo, face) {
                    assert_eq!(count, 1, "border face {face:?} in {res:?}");
                } else {
                    assert_eq!(count, 2, "interior face {face:?} in {res:?}");
                }
            }
        }
    }

    #[test]
    fn cube_tets_partition_the_cube() {
        // Positive volumes summing to the cube volume, with conforming faces,
        // means the six tets tile the cube.
        let topo = build_topology([3, 3, 3]).unwrap();
        let sol = init_identity_solution(Arc::new(build_topology([3, 3, 3]).unwrap()), [3, 3, 3]);
        for cube in 0..topo.cube_count() {
            let mut vol = 0.0;
            for t in topo.tets_of_cube(cube) {
                let v = sol.tet(GridSide::Source, t).signed_volume();
                assert!(v > 0.0);
                vol += v;
            }
            assert!((vol - 1.0).abs() < 1e-12);
        }
    }

    fn reflected_tet_set(topo: &GridTopology, axis: usize) -> BTreeSet<[usize; 4]> {
        topo.tets()
            .iter()
            .map(|t| {
                let mut r = t.map(|p| {
                    let mut c = topo.point_coords(p);
                    c[axis] = topo.resolution()[axis] - 1 - c[axis];
                    topo.point_index(c[0], c[1], c[2])
                });
                r.sort_unstable();
                r
            })
            .collect()
    }

    #[test]
    fn reflection_symmetric_for_even_cube_counts() {
        for res in [[3, 3, 3], [5, 5, 5], [11, 11, 11], [3, 5, 7]] {
            let topo = build_topology(res).unwrap();
            let original: BTreeSet<[usize; 4]> = topo
                .tets()
                .iter()
                .map(|t| {
                    let mut s = *t;
                    s.sort_unstable();
                    s
                })
                .collect();
            for axis in 0..3 {
                assert_eq!(
                    reflected_tet_set(&topo, axis),
                    original,
                    "{res:?} axis {axis}"
                );
            }
        }
    }

    #[test]
    fn incident_tets_of_diagonal_corner() {
        let topo = build_topology([2, 2, 2]).unwrap();
        assert_eq!(topo.incident_tets(0).unwrap().len(), 6);
        assert_eq!(topo.incident_tets(7).unwrap().len(), 6);
        assert!(topo.incident_tets(8).is_err());
    }

    #[test]
    fn incident_tets_cover_and_contain() {
        let topo = build_topology([4, 5, 3]).unwrap();
        let mut seen = vec![false; topo.tet_count()];
        for p in 0..topo.point_count() {
            for &t in topo.incident_tets(p).unwrap() {
                assert!(topo.tet(t).contains(&p));
                seen[t] = true;
            }
            let brute: Vec<usize> = (0..topo.tet_count())
                .filter(|&t| topo.tet(t).contains(&p))
                .collect();
            assert_eq!(brute, topo.incident_tets(p).unwrap());
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn border_classes() {
        let topo = build_topology([3, 3, 3]).unwrap();
        assert_eq!(topo.border_class(13), BorderClass::Interior);
        assert_eq!(topo.border_class(0), BorderClass::Corner);
        assert_eq!(topo.border_class(1), BorderClass::Edge { free_axis: 0 });
        assert_eq!(
            topo.border_class(4),
            BorderClass::Face {
                axis: 2,
                side: Side::Min
            }
        );
        // A face point is surrounded by a closed polygon on its plane.
        assert!(topo.border_link(4).len() >= 4);
    }

    #[test]
    fn identity_lattice_step() {
        let topo = Arc::new(build_topology([6, 6, 6]).unwrap());
        let s = init_identity_solution(topo, [50, 50, 50]);
        let step = s.points(GridSide::Source)[1].x - s.points(GridSide::Source)[0].x;
        assert!((step - 49.0 / 5.0).abs() < 1e-12);
        assert_eq!(s.points(GridSide::Source)[5].x, 49.0);
        assert_eq!(s.points(GridSide::Source), s.points(GridSide::Target));
    }

    #[test]
    fn refinement_keeps_coarse_points() {
        let topo = Arc::new(build_topology([2, 2, 2]).unwrap());
        let coarse = init_identity_solution(topo, [9, 9, 9]);
        let fine = refine_solution(&coarse).unwrap();
        assert_eq!(fine.topology().resolution(), [3, 3, 3]);
        assert_eq!(fine.topology().point_count(), 27);
        assert_eq!(fine.points(GridSide::Source)[13], Vec3::new(4.0, 4.0, 4.0));
        let fine_topo = fine.topology().clone();
        for p in 0..8 {
            let c = coarse.topology().point_coords(p);
            let q = fine_topo.point_index(2 * c[0], 2 * c[1], 2 * c[2]);
            assert_eq!(
                fine.points(GridSide::Target)[q],
                coarse.points(GridSide::Target)[p]
            );
        }

        let topo6 = Arc::new(build_topology([6, 6, 6]).unwrap());
        let fine = refine_solution(&init_identity_solution(topo6, [50, 50, 50])).unwrap();
        assert_eq!(fine.topology().resolution(), [11, 11, 11]);
        assert_eq!(fine.variable_count(), 7986);
    }

    #[test]
    fn encode_decode_round_trip() {
        let topo = Arc::new(build_topology([3, 4, 2]).unwrap());
        let mut s = init_identity_solution(topo, [10, 12, 9]);
        s.points_mut(GridSide::Target)[7] += Vec3::new(0.1, -0.2, 0.05);
        let bytes = s.encode();
        let back = Solution::decode(&bytes, [10, 12, 9], None).unwrap();
        assert_eq!(back, s);
        assert!(Solution::decode(&bytes[..bytes.len() - 1], [10, 12, 9], None).is_err());
    }
}
