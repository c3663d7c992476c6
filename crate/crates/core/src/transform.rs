//! Applying a dual-grid solution: point mapping between the two images,
//! dense pull-back fields and warped volumes.

use crate::error::{Error, Result};
use crate::geometry::{for_each_voxel, tet_contains, AffineMap, Vec3};
use crate::mesh::{GridSide, Solution};
use crate::volume::{BinaryMask, ImageVolume};

/// Bucketed point location over the tets of one grid.
pub struct Locator<'s> {
    sol: &'s Solution,
    grid: GridSide,
    cells: [usize; 3],
    size: Vec3,
    buckets: Vec<Vec<usize>>,
}

impl<'s> Locator<'s> {
    pub fn new(sol: &'s Solution, grid: GridSide) -> Self {
        let res = sol.topology().resolution();
        let ext = sol.extent();
        let cells = res.map(|n| n - 1);
        let size = Vec3::new(
            ext[0] / cells[0] as f64,
            ext[1] / cells[1] as f64,
            ext[2] / cells[2] as f64,
        );
        let mut buckets = vec![Vec::new(); cells.iter().product()];
        for t in 0..sol.topology().tet_count() {
            let tet = sol.tet(grid, t);
            let mut lo = tet.v[0];
            let mut hi = tet.v[0];
            for v in &tet.v[1..] {
                lo = lo.inf(v);
                hi = hi.sup(v);
            }
            let a = bucket_coords(&lo, &size, cells);
            let b = bucket_coords(&hi, &size, cells);
            for k in a[2]..=b[2] {
                for j in a[1]..=b[1] {
                    for i in a[0]..=b[0] {
                        buckets[i + cells[0] * (j + cells[1] * k)].push(t);
                    }
                }
            }
        }
        Locator {
            sol,
            grid,
            cells,
            size,
            buckets,
        }
    }

    /// The unique tet owning `p`, if `p` lies in the domain.
    pub fn locate(&self, p: &Vec3) -> Option<usize> {
        let ext = self.sol.extent();
        if (0..3).any(|a| !(p[a] >= 0.0 && p[a] <= ext[a])) {
            return None;
        }
        let c = bucket_coords(p, &self.size, self.cells);
        let topo = self.sol.topology();
        self.buckets[c[0] + self.cells[0] * (c[1] + self.cells[1] * c[2])]
            .iter()
            .copied()
            .find(|&t| tet_contains(&self.sol.tet(self.grid, t), p, topo.boundary_faces(t)))
    }

    /// Maps a voxel-space point of this grid's image into the other image.
    pub fn map(&self, p: &Vec3) -> Result<Vec3> {
        let t = self.locate(p).ok_or(Error::Uncovered([p.x, p.y, p.z]))?;
        let map = AffineMap::between(
            &self.sol.tet(self.grid, t),
            &self.sol.tet(self.grid.other(), t),
        )?;
        Ok(map.apply(p))
    }
}

fn bucket_coords(p: &Vec3, size: &Vec3, cells: [usize; 3]) -> [usize; 3] {
    let mut c = [0; 3];
    for a in 0..3 {
        let f = (p[a] / size[a]).floor();
        c[a] = if f.is_finite() && f > 0.0 {
            (f as usize).min(cells[a] - 1)
        } else {
            0
        };
    }
    c
}

/// For every voxel of the image belonging to grid `from`, its position in
/// the other image, in voxel coordinates.
pub fn pull_back_field(sol: &Solution, from: GridSide) -> Result<Vec<Vec3>> {
    let dims = sol.dims();
    let mut out = vec![Vec3::repeat(f64::NAN); dims.iter().product()];
    let topo = sol.topology();
    for t in 0..topo.tet_count() {
        let here = sol.tet(from, t);
        let map = AffineMap::between(&here, &sol.tet(from.other(), t))?;
        for_each_voxel(&here, dims, topo.boundary_faces(t), |x, y, z| {
            out[x + dims[0] * (y + dims[1] * z)] =
                map.apply(&Vec3::new(x as f64, y as f64, z as f64));
        });
    }
    if let Some(i) = out.iter().position(|v| v.x.is_nan()) {
        let x = i % dims[0];
        let y = (i / dims[0]) % dims[1];
        let z = i / (dims[0] * dims[1]);
        return Err(Error::Uncovered([x as f64, y as f64, z as f64]));
    }
    Ok(out)
}

/// Displacement in mm at every voxel of the target image towards its
/// corresponding source position.
pub fn displacement_field(sol: &Solution, spacing: [f64; 3]) -> Result<Vec<Vec3>> {
    let s = Vec3::new(spacing[0], spacing[1], spacing[2]);
    let dims = sol.dims();
    let field = pull_back_field(sol, GridSide::Target)?;
    Ok(field
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let p = Vec3::new(
                (i % dims[0]) as f64,
                ((i / dims[0]) % dims[1]) as f64,
                (i / (dims[0] * dims[1])) as f64,
            );
            (q - p).component_mul(&s)
        })
        .collect())
}

/// Resamples `image` (living in grid `from`'s image space) into the other
/// image's space with trilinear interpolation.
pub fn warp_volume(sol: &Solution, image: &ImageVolume, from: GridSide) -> Result<ImageVolume> {
    let field = pull_back_field(sol, from.other())?;
    let data = field.iter().map(|q| image.trilinear(q) as f32).collect();
    ImageVolume::new(image.dims(), image.spacing(), data)
}

/// Warps a mask like [`warp_volume`], thresholding at 0.5.
pub fn warp_mask(sol: &Solution, mask: &BinaryMask, from: GridSide) -> Result<BinaryMask> {
    let warped = warp_volume(sol, &mask.to_volume(), from)?;
    Ok(BinaryMask::from_volume(&warped))
}
