//! Image volumes, guidance point sets, segmentation masks and the
//! registration problem that bundles them.

mod metaimage;
mod synthetic;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub use metaimage::{load_volume, save_mask, save_volume, save_volume_channels, ElementType};
pub use synthetic::{generate_synthetic_pair, SyntheticConfig};

/// Intensities below this count as empty (8-bit black after normalization).
pub const EMPTY_THRESHOLD: f64 = 1.0 / 255.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    #[default]
    Trilinear,
    Nearest,
}

/// Dense scalar volume, x fastest, intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageVolume {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<f32>,
}

impl ImageVolume {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f32>) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidVolume(format!(
                "every dimension must be at least 2, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidVolume(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::InvalidVolume(format!(
                "expected {n} intensities, got {}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidVolume(format!(
                "intensity {bad} outside [0, 1]"
            )));
        }
        Ok(ImageVolume {
            dims,
            spacing,
            data,
        })
    }

    pub fn filled(dims: [usize; 3], spacing: [f64; 3], value: f32) -> Result<Self> {
        Self::new(dims, spacing, vec![value; dims[0] * dims[1] * dims[2]])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn voxel_count(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.index(x, y, z)] as f64
    }

    pub fn sample(&self, p: &Vec3, interpolation: Interpolation) -> f64 {
        match interpolation {
            Interpolation::Trilinear => self.trilinear(p),
            Interpolation::Nearest => self.nearest(p),
        }
    }

    /// Trilinear interpolation between the 8 surrounding voxel centers.
    /// Points outside the volume are clamped to its boundary.
    #[inline]
    pub fn trilinear(&self, p: &Vec3) -> f64 {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let hi = (self.dims[a] - 1) as f64;
            let c = p[a].clamp(0.0, hi);
            let i = (c as usize).min(self.dims[a] - 2);
            base[a] = i;
            frac[a] = c - i as f64;
        }
        let [x, y, z] = base;
        let [fx, fy, fz] = frac;
        let sx = 1;
        let sy = self.dims[0];
        let sz = self.dims[0] * self.dims[1];
        let i0 = self.index(x, y, z);
        let d = &self.data;
        let v = |i: usize| d[i] as f64;
        let c00 = v(i0) * (1.0 - fx) + v(i0 + sx) * fx;
        let c10 = v(i0 + sy) * (1.0 - fx) + v(i0 + sy + sx) * fx;
        let c01 = v(i0 + sz) * (1.0 - fx) + v(i0 + sz + sx) * fx;
        let c11 = v(i0 + sz + sy) * (1.0 - fx) + v(i0 + sz + sy + sx) * fx;
        let c0 = c00 * (1.0 - fy) + c10 * fy;
        let c1 = c01 * (1.0 - fy) + c11 * fy;
        c0 * (1.0 - fz) + c1 * fz
    }

    pub fn nearest(&self, p: &Vec3) -> f64 {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let hi = (self.dims[a] - 1) as f64;
            idx[a] = p[a].clamp(0.0, hi).round() as usize;
        }
        self.get(idx[0], idx[1], idx[2])
    }

    /// Voxel coordinates of a world point given in mm (origin at voxel 0).
    pub fn to_voxel(&self, mm: &Vec3) -> Vec3 {
        Vec3::new(
            mm.x / self.spacing[0],
            mm.y / self.spacing[1],
            mm.z / self.spacing[2],
        )
    }

    pub fn to_mm(&self, voxel: &Vec3) -> Vec3 {
        Vec3::new(
            voxel.x * self.spacing[0],
            voxel.y * self.spacing[1],
            voxel.z * self.spacing[2],
        )
    }

    pub fn contains_voxel_point(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= 0.0 && p[a] <= (self.dims[a] - 1) as f64)
    }

    /// Axial slice `z` as rows of intensities (y rows, x columns).
    pub fn axial_slice(&self, z: usize) -> Option<Vec<Vec<f32>>> {
        if z >= self.dims[2] {
            return None;
        }
        Some(
            (0..self.dims[1])
                .map(|y| {
                    let start = self.index(0, y, z);
                    self.data[start..start + self.dims[0]].to_vec()
                })
                .collect(),
        )
    }
}

/// Binary segmentation on the voxel lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMask {
    dims: [usize; 3],
    spacing: [f64; 3],
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::InvalidVolume("mask size does not match dims".into()));
        }
        Ok(BinaryMask {
            dims,
            spacing,
            bits,
        })
    }

    /// Voxels with intensity ≥ 0.5.
    pub fn from_volume(volume: &ImageVolume) -> Self {
        BinaryMask {
            dims: volume.dims,
            spacing: volume.spacing,
            bits: volume.data.iter().map(|&v| v >= 0.5).collect(),
        }
    }

    pub fn to_volume(&self) -> ImageVolume {
        ImageVolume {
            dims: self.dims,
            spacing: self.spacing,
            data: self
                .bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Dice overlap `2|A∩B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::DimsMismatch(a.dims, b.dims));
    }
    let mut both = 0usize;
    let mut total = 0usize;
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        both += (x && y) as usize;
        total += x as usize + y as usize;
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / total as f64)
}

/// One pair of corresponding point sets (contour or landmarks), in mm.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    pub id: String,
    pub source: Vec<Vec3>,
    pub target: Vec<Vec3>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuidanceSet {
    pub label: String,
    pub correspondences: Vec<Correspondence>,
}

impl GuidanceSet {
    pub fn point_count(&self) -> usize {
        self.correspondences
            .iter()
            .map(|c| c.source.len() + c.target.len())
            .sum()
    }

    /// Parses `<correspondence-id> <S|T> <x> <y> <z>` lines; `#` starts a
    /// comment.
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let mut correspondences: Vec<Correspondence> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| Error::Guidance {
                line: n + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(err("expected 5 fields"));
            }
            let mut xyz = [0.0f64; 3];
            for (slot, f) in xyz.iter_mut().zip(&fields[2..]) {
                *slot = f.parse().map_err(|_| err("coordinate is not a number"))?;
                if !slot.is_finite() {
                    return Err(err("coordinate is not finite"));
                }
            }
            let p = Vec3::from(xyz);
            let id = fields[0];
            let pos = match correspondences.iter().position(|c| c.id == id) {
                Some(i) => i,
                None => {
                    correspondences.push(Correspondence {
                        id: id.to_string(),
                        source: Vec::new(),
                        target: Vec::new(),
                    });
                    correspondences.len() - 1
                }
            };
            match fields[1] {
                "S" | "s" => correspondences[pos].source.push(p),
                "T" | "t" => correspondences[pos].target.push(p),
                _ => return Err(err("side must be S or T")),
            }
        }
        let set = GuidanceSet {
            label: label.to_string(),
            correspondences,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.correspondences.is_empty() {
            return Err(Error::Guidance {
                line: 0,
                reason: "no correspondences".into(),
            });
        }
        for c in &self.correspondences {
            if c.source.is_empty() || c.target.is_empty() {
                return Err(Error::Guidance {
                    line: 0,
                    reason: format!("correspondence {} has an empty side", c.id),
                });
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.correspondences {
            for (side, pts) in [("S", &c.source), ("T", &c.target)] {
                for p in pts.iter() {
                    out.push_str(&format!(
                        "{} {} {:?} {:?} {:?}\n",
                        c.id, side, p.x, p.y, p.z
                    ));
                }
            }
        }
        out
    }
}

pub fn load_guidance(path: &Path) -> Result<GuidanceSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    GuidanceSet::parse(&text, &label)
}

pub fn save_guidance(guidance: &GuidanceSet, path: &Path) -> Result<()> {
    fs::write(path, guidance.to_text()).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug)]
pub struct RegistrationProblem {
    pub source: ImageVolume,
    pub target: ImageVolume,
    pub guidance: Option<GuidanceSet>,
    pub source_mask: Option<BinaryMask>,
    pub target_mask: Option<BinaryMask>,
}

impl RegistrationProblem {
    pub fn new(
        source: ImageVolume,
        target: ImageVolume,
        guidance: Option<GuidanceSet>,
        source_mask: Option<BinaryMask>,
        target_mask: Option<BinaryMask>,
    ) -> Result<Self> {
        if source.dims != target.dims {
            return Err(Error::DimsMismatch(source.dims, target.dims));
        }
        if source.spacing != target.spacing {
            return Err(Error::InvalidVolume(format!(
                "spacing mismatch: {:?} vs {:?}",
                source.spacing, target.spacing
            )));
        }
        for m in source_mask.iter().chain(target_mask.iter()) {
            if m.dims != source.dims {
                return Err(Error::DimsMismatch(m.dims, source.dims));
            }
        }
        if let Some(g) = &guidance {
            g.validate()?;
            for c in &g.correspondences {
                for p in c.source.iter().chain(&c.target) {
                    if !source.contains_voxel_point(&source.to_voxel(p)) {
                        return Err(Error::Guidance {
                            line: 0,
                            reason: format!("point {p:?} lies outside the image domain"),
                        });
                    }
                }
            }
        }
        Ok(RegistrationProblem {
            source,
            target,
            guidance,
            source_mask,
            target_mask,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.source.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.source.spacing
    }
}
