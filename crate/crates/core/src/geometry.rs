//! Tetrahedron geometry: exact voxel rasterization, barycentric mapping and
//! the ray-parity predicates behind the fold constraints.
//!
//! Voxel centers sit at integer coordinates. Membership of a voxel center in
//! a tetrahedron is decided with exact orientation predicates; a center lying
//! exactly on a face is resolved by symbolically nudging it by
//! `(ε, ε², ε³)`. In every axial slice this is the top-left rule (x-nudge
//! decides left/right edges, y-nudge decides horizontal top/bottom edges,
//! rows grow downwards), and a face lying in the slice plane belongs to the
//! tetrahedron above it. Faces marked closed in a [`FaceMask`] keep the
//! points lying on them; the grids use this for faces on the image border so
//! the border voxels are covered.

use nalgebra::{Matrix3, Vector2, Vector3};
use robust::{Coord, Coord3D};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Face opposite each vertex, ordered so that `orient(a, b, c, p) > 0` when
/// `p` is on the same side as that vertex in a positively oriented tet.
pub(crate) const FACES: [[usize; 3]; 4] = [[1, 3, 2], [3, 0, 2], [1, 0, 3], [0, 1, 2]];

/// Fixed ray direction for parity tests; further attempts perturb it.
const RAY_BASE: [f64; 3] = [1.0, std::f64::consts::FRAC_PI_8, 0.7];
const RAY_ATTEMPTS: usize = 12;
const RAY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tet {
    pub v: [Vec3; 4],
}

impl Tet {
    pub fn new(v0: Vec3, v1: Vec3, v2: Vec3, v3: Vec3) -> Self {
        Tet {
            v: [v0, v1, v2, v3],
        }
    }

    pub fn signed_volume(&self) -> f64 {
        self.edge_matrix().determinant() / 6.0
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v[0] + self.v[1] + self.v[2] + self.v[3]) / 4.0
    }

    fn edge_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[
            self.v[1] - self.v[0],
            self.v[2] - self.v[0],
            self.v[3] - self.v[0],
        ])
    }

    fn max_edge_len(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                m = m.max((self.v[i] - self.v[j]).norm());
            }
        }
        m
    }

    /// Exact orientation sign: positive, negative or zero.
    pub fn orientation(&self) -> f64 {
        orient(&self.v[0], &self.v[1], &self.v[2], &self.v[3])
    }
}

/// Set of tet faces (indexed by the opposite vertex) that own the points
/// lying exactly on them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FaceMask(u8);

impl FaceMask {
    pub const NONE: FaceMask = FaceMask(0);
    pub const ALL: FaceMask = FaceMask(0b1111);

    pub fn with(self, face: usize) -> Self {
        FaceMask(self.0 | (1 << face))
    }

    pub fn contains(self, face: usize) -> bool {
        self.0 & (1 << face) != 0
    }

    fn swap01(self) -> Self {
        let b0 = self.0 & 1;
        let b1 = (self.0 >> 1) & 1;
        FaceMask((self.0 & !0b11) | (b0 << 1) | b1)
    }
}

fn c3(p: &Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

fn c2(x: f64, y: f64) -> Coord<f64> {
    Coord { x, y }
}

/// Exact sign of `det[b - a, c - a, d - a]` (magnitude is not meaningful).
pub fn orient(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    -robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}

/// Sign of `n · (ε, ε², ε³)` for `n = (b - a) × (c - a)`, computed exactly.
fn tie_sign(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let nx = robust::orient2d(c2(a.y, a.z), c2(b.y, b.z), c2(c.y, c.z));
    if nx != 0.0 {
        return nx;
    }
    let ny = robust::orient2d(c2(a.z, a.x), c2(b.z, b.x), c2(c.z, c.x));
    if ny != 0.0 {
        return ny;
    }
    robust::orient2d(c2(a.x, a.y), c2(b.x, b.y), c2(c.x, c.y))
}

/// Positively oriented copy of the tet (and its face mask), or `None` when
/// the vertices are coplanar.
fn oriented(tet: &Tet, closed: FaceMask) -> Option<(Tet, FaceMask)> {
    let o = tet.orientation();
    if o > 0.0 {
        Some((*tet, closed))
    } else if o < 0.0 {
        Some((
            Tet::new(tet.v[1], tet.v[0], tet.v[2], tet.v[3]),
            closed.swap01(),
        ))
    } else {
        None
    }
}

/// Exact sign of the `axis` component of `(b - a) × (c - a)`.
fn normal_sign(a: &Vec3, b: &Vec3, c: &Vec3, axis: usize) -> f64 {
    let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
    robust::orient2d(c2(a[u], a[w]), c2(b[u], b[w]), c2(c[u], c[w]))
}

/// Axis along which all three vertices share one coordinate, if any.
fn aligned_axis(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<usize> {
    (0..3).find(|&k| a[k] == b[k] && a[k] == c[k])
}

/// Exact ownership of `p` with respect to face `i` of a positively
/// oriented tet: strictly inside, or on the face and owned by tie rule or
/// closure.
fn face_owns(v: &[Vec3; 4], i: usize, p: &Vec3, closed: FaceMask) -> bool {
    let [a, b, c] = FACES[i];
    let (a, b, c) = (&v[a], &v[b], &v[c]);
    let s = match aligned_axis(a, b, c) {
        Some(k) => {
            let d = p[k] - a[k];
            if d == 0.0 {
                0.0
            } else {
                d.signum() * normal_sign(a, b, c, k)
            }
        }
        None => orient(a, b, c, p),
    };
    if s > 0.0 {
        true
    } else if s < 0.0 {
        false
    } else {
        closed.contains(i) || tie_sign(a, b, c) > 0.0
    }
}

fn contains_oriented(v: &[Vec3; 4], p: &Vec3, closed: FaceMask) -> bool {
    (0..4).all(|i| face_owns(v, i, p, closed))
}

/// Exact containment under the tie rule described in the module docs.
/// Degenerate tets contain nothing.
pub fn tet_contains(tet: &Tet, p: &Vec3, closed: FaceMask) -> bool {
    match oriented(tet, closed) {
        Some((t, m)) => contains_oriented(&t.v, p, m),
        None => false,
    }
}

struct Plane {
    n: Vec3,
    d: f64,
    tol: f64,
}

/// Visits every voxel center owned by the tet, slice by slice (z), row by
/// row (y), left to right (x). Voxels outside `dims` are clipped.
pub fn for_each_voxel<F>(tet: &Tet, dims: [usize; 3], closed: FaceMask, mut visit: F)
where
    F: FnMut(usize, usize, usize),
{
    let Some((tet, closed)) = oriented(tet, closed) else {
        return;
    };
    if dims.contains(&0) {
        return;
    }
    let v = &tet.v;

    let mut scale: f64 = dims.iter().copied().max().unwrap_or(0) as f64;
    for p in v {
        scale = scale.max(p.amax());
    }
    scale += 1.0;

    let planes: [Plane; 4] = FACES.map(|[a, b, c]| {
        let n = (v[b] - v[a]).cross(&(v[c] - v[a]));
        let d = -n.dot(&v[a]);
        let tol = 1e-11 * (n.x.abs() + n.y.abs() + n.z.abs()) * scale;
        Plane { n, d, tol }
    });

    let zmin = v.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let zmax = v.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max);
    let z_lo = zmin.ceil().max(0.0);
    let z_hi = zmax.floor().min((dims[2] - 1) as f64);
    if z_lo > z_hi {
        return;
    }
    let margin = 1e-9 * scale;

    for z in z_lo as usize..=z_hi as usize {
        let zf = z as f64;
        // y extent of the slice cross-section.
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for i in 0..4 {
            if v[i].z == zf {
                ymin = ymin.min(v[i].y);
                ymax = ymax.max(v[i].y);
            }
            for j in i + 1..4 {
                let (za, zb) = (v[i].z, v[j].z);
                if (za - zf) * (zb - zf) < 0.0 {
                    let t = (zf - za) / (zb - za);
                    let y = v[i].y + t * (v[j].y - v[i].y);
                    ymin = ymin.min(y);
                    ymax = ymax.max(y);
                }
            }
        }
        if ymin > ymax {
            continue;
        }
        let y_lo = (ymin - margin).ceil().max(0.0);
        let y_hi = (ymax + margin).floor().min((dims[1] - 1) as f64);
        if y_lo > y_hi {
            continue;
        }
        for y in y_lo as usize..=y_hi as usize {
            let yf = y as f64;
            let mut x_lo = 0.0f64;
            let mut x_hi = (dims[0] - 1) as f64;
            let mut sure_lo = f64::NEG_INFINITY;
            let mut sure_hi = f64::INFINITY;
            let mut empty = false;
            for pl in &planes {
                let rest = pl.n.y * yf + pl.n.z * zf + pl.d;
                if pl.n.x > 0.0 {
                    x_lo = x_lo.max((-pl.tol - rest) / pl.n.x);
                    sure_lo = sure_lo.max((pl.tol - rest) / pl.n.x);
                } else if pl.n.x < 0.0 {
                    x_hi = x_hi.min((-pl.tol - rest) / pl.n.x);
                    sure_hi = sure_hi.min((pl.tol - rest) / pl.n.x);
                } else if rest < -pl.tol {
                    empty = true;
                    break;
                } else if rest <= pl.tol {
                    sure_hi = f64::NEG_INFINITY;
                }
            }
            if empty {
                continue;
            }
            let x_lo = (x_lo - margin).ceil().max(0.0);
            let x_hi = (x_hi + margin).floor();
            if x_lo > x_hi {
                continue;
            }
            // Voxels strictly inside [sure_lo, sure_hi] clear every plane by
            // more than its tolerance.
            let sure_lo = sure_lo + margin;
            let sure_hi = sure_hi - margin;
            for x in x_lo as usize..=x_hi as usize {
                let xf = x as f64;
                if xf > sure_lo && xf < sure_hi {
                    visit(x, y, z);
                    continue;
                }
                let p = Vec3::new(xf, yf, zf);
                let mut unsure = [false; 4];
                let mut out = false;
                for (i, pl) in planes.iter().enumerate() {
                    let val = pl.n.dot(&p) + pl.d;
                    if val < -pl.tol {
                        out = true;
                        break;
                    }
                    unsure[i] = val <= pl.tol;
                }
                if out {
                    continue;
                }
                if (0..4).all(|i| !unsure[i] || face_owns(v, i, &p, closed)) {
                    visit(x, y, z);
                }
            }
        }
    }
}

/// Linear voxel indices (x fastest) of the voxel centers owned by the tet.
pub fn rasterize_tet(tet: &Tet, dims: [usize; 3]) -> Vec<usize> {
    rasterize_tet_with(tet, dims, FaceMask::NONE)
}

pub fn rasterize_tet_with(tet: &Tet, dims: [usize; 3], closed: FaceMask) -> Vec<usize> {
    let mut out = Vec::new();
    for_each_voxel(tet, dims, closed, |x, y, z| {
        out.push(x + dims[0] * (y + dims[1] * z))
    });
    out
}

fn check_degenerate(tet: &Tet) -> Result<Matrix3<f64>> {
    let m = tet.edge_matrix();
    let s = tet.max_edge_len();
    if !(m.determinant().abs() > 1e-12 * s * s * s) {
        return Err(Error::DegenerateTet);
    }
    Ok(m)
}

pub fn barycentric(tet: &Tet, p: &Vec3) -> Result<[f64; 4]> {
    let m = check_degenerate(tet)?;
    let w = m.lu().solve(&(p - tet.v[0])).ok_or(Error::DegenerateTet)?;
    Ok([1.0 - w.x - w.y - w.z, w.x, w.y, w.z])
}

pub fn map_point(src: &Tet, dst: &Tet, p: &Vec3) -> Result<Vec3> {
    let w = barycentric(src, p)?;
    Ok(dst.v[0] * w[0] + dst.v[1] * w[1] + dst.v[2] * w[2] + dst.v[3] * w[3])
}

/// The affine map carrying `src` onto `dst` vertex by vertex.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub linear: Matrix3<f64>,
    pub offset: Vec3,
}

impl AffineMap {
    pub fn between(src: &Tet, dst: &Tet) -> Result<Self> {
        let s = check_degenerate(src)?;
        let s_inv = s.try_inverse().ok_or(Error::DegenerateTet)?;
        let linear = dst.edge_matrix() * s_inv;
        let offset = dst.v[0] - linear * src.v[0];
        Ok(AffineMap { linear, offset })
    }

    #[inline]
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.linear * p + self.offset
    }
}

/// Closed triangle surface around a grid point: the faces opposite the
/// point in each of its incident tets.
#[derive(Clone, Debug)]
pub struct StarPolyhedron {
    pub center: Vec3,
    pub faces: Vec<[Vec3; 3]>,
}

enum Crossing {
    Miss,
    Hit,
    Ambiguous,
    OnSurface,
}

fn ray_direction(attempt: usize) -> Vec3 {
    if attempt == 0 {
        return Vec3::new(RAY_BASE[0], RAY_BASE[1], RAY_BASE[2]).normalize();
    }
    let k = attempt as f64;
    let frac = |x: f64| x - x.floor();
    Vec3::new(
        2.0 * frac(0.754_877_666_246_692_7 * k + 0.1) - 1.0,
        2.0 * frac(0.569_840_290_998_053_2 * k + RAY_BASE[1]) - 1.0,
        2.0 * frac(std::f64::consts::SQRT_2 * k + 0.7) - 1.0,
    )
    .normalize()
}

fn ray_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Crossing {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let size = e1.norm().max(e2.norm());
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    let tvec = origin - tri[0];
    if det.abs() <= RAY_EPS * e1.norm() * e2.norm() {
        let normal = e1.cross(&e2);
        let dist = normal.dot(&tvec).abs();
        return if dist <= RAY_EPS * normal.norm() * size.max(1.0) {
            Crossing::Ambiguous
        } else {
            Crossing::Miss
        };
    }
    let inv = 1.0 / det;
    let u = tvec.dot(&pvec) * inv;
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if u < -RAY_EPS || v < -RAY_EPS || u + v > 1.0 + RAY_EPS {
        return Crossing::Miss;
    }
    let t = e2.dot(&qvec) * inv;
    let t_eps = RAY_EPS * size.max(1.0);
    if t < -t_eps {
        return Crossing::Miss;
    }
    if t <= t_eps {
        return Crossing::OnSurface;
    }
    if u < RAY_EPS || v < RAY_EPS || u + v > 1.0 - RAY_EPS {
        return Crossing::Ambiguous;
    }
    Crossing::Hit
}

/// Ray-parity test: `true` when `point` is outside the closed surface (or on
/// it), i.e. a constraint violation.
pub fn point_outside_star(point: &Vec3, star: &StarPolyhedron) -> bool {
    point_outside_surface(point, &star.faces)
}

pub(crate) fn point_outside_surface(point: &Vec3, faces: &[[Vec3; 3]]) -> bool {
    'attempt: for attempt in 0..RAY_ATTEMPTS {
        let dir = ray_direction(attempt);
        let mut hits = 0usize;
        for tri in faces {
            match ray_triangle(point, &dir, tri) {
                Crossing::Miss => {}
                Crossing::Hit => hits += 1,
                Crossing::OnSurface => return true,
                Crossing::Ambiguous => continue 'attempt,
            }
        }
        return hits % 2 == 0;
    }
    true
}

fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn ray_segment(origin: &Vec2, dir: &Vec2, seg: &[Vec2; 2]) -> Crossing {
    let e = seg[1] - seg[0];
    let len = e.norm();
    let denom = cross2(dir, &e);
    let ap = seg[0] - origin;
    if denom.abs() <= RAY_EPS * len {
        return if cross2(&ap, &e).abs() <= RAY_EPS * len * len.max(1.0) {
            Crossing::Ambiguous
        } else {
            Crossing::Miss
        };
    }
    let t = cross2(&ap, &e) / denom;
    let s = cross2(&ap, dir) / denom;
    if s < -RAY_EPS || s > 1.0 + RAY_EPS {
        return Crossing::Miss;
    }
    let t_eps = RAY_EPS * len.max(1.0);
    if t < -t_eps {
        return Crossing::Miss;
    }
    if t <= t_eps {
        return Crossing::OnSurface;
    }
    if s < RAY_EPS || s > 1.0 - RAY_EPS {
        return Crossing::Ambiguous;
    }
    Crossing::Hit
}

/// 2D ray-parity test against a closed polygon given as segments; `true`
/// when the point is outside (or on) the polygon.
pub fn point_outside_border_polygon(point: &Vec2, polygon: &[[Vec2; 2]]) -> bool {
    'attempt: for attempt in 0..RAY_ATTEMPTS {
        let d3 = ray_direction(attempt);
        let dir = Vec2::new(d3.x, d3.y).normalize();
        let mut hits = 0usize;
        for seg in polygon {
            match ray_segment(point, &dir, seg) {
                Crossing::Miss => {}
                Crossing::Hit => hits += 1,
                Crossing::OnSurface => return true,
                Crossing::Ambiguous => continue 'attempt,
            }
        }
        return hits % 2 == 0;
    }
    true
}
