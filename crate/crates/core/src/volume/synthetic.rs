//! Synthetic registration problem: a bright cube with a darker sphere in
//! the center. In the target, every cube face is pushed inwards by a
//! paraboloid and the sphere shrinks.

use super::{BinaryMask, Correspondence, GuidanceSet, ImageVolume, RegistrationProblem};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    /// Voxels per axis (cubic volume).
    pub size: usize,
    pub spacing: [f64; 3],
    /// Cube side length in voxels, centered in the volume.
    pub cube_side: f64,
    pub source_radius: f64,
    pub target_radius: f64,
    /// Peak inward displacement of each cube face in the target.
    pub parabola_depth: f64,
    pub sphere_intensity: f32,
    pub cube_intensity: f32,
    pub background: f32,
    pub guidance_points: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            size: 50,
            spacing: [1.0; 3],
            cube_side: 40.0,
            source_radius: 10.0,
            target_radius: 5.0,
            parabola_depth: 6.0,
            sphere_intensity: 0.4,
            cube_intensity: 0.8,
            background: 0.0,
            guidance_points: 128,
        }
    }
}

impl SyntheticConfig {
    /// Reduced 32³ problem for quick runs.
    pub fn smoke() -> Self {
        SyntheticConfig {
            size: 32,
            cube_side: 26.0,
            source_radius: 6.0,
            target_radius: 3.0,
            parabola_depth: 4.0,
            ..Self::default()
        }
    }

    pub fn center(&self) -> Vec3 {
        let c = (self.size - 1) as f64 / 2.0;
        Vec3::new(c, c, c)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::SyntheticConfig(msg.to_string()));
        if self.size < 32 {
            return bad("volume must be at least 32 voxels per axis");
        }
        let half = self.cube_side / 2.0;
        if !(half > 0.0) || half > (self.size - 1) as f64 / 2.0 {
            return bad("cube does not fit inside the volume");
        }
        if !(self.parabola_depth >= 0.0) || self.parabola_depth >= half {
            return bad("parabola depth must be in [0, cube_side / 2)");
        }
        if !(self.target_radius > 0.0) || self.target_radius > self.source_radius {
            return bad("sphere radii must satisfy 0 < target <= source");
        }
        if self.source_radius >= half - self.parabola_depth {
            return bad("sphere intersects the intruding faces");
        }
        if self.guidance_points == 0 {
            return bad("at least one guidance point is required");
        }
        for v in [self.sphere_intensity, self.cube_intensity, self.background] {
            if !(0.0..=1.0).contains(&v) {
                return bad("intensities must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

fn falloff(t: f64, half: f64) -> f64 {
    (1.0 - (t / half).powi(2)).max(0.0)
}

fn inside_deformed_cube(u: &Vec3, half: f64, depth: f64) -> bool {
    for a in 0..3 {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        let limit = half - depth * falloff(u[b], half) * falloff(u[c], half);
        if u[a].abs() > limit {
            return false;
        }
    }
    true
}

/// Fibonacci lattice on the unit sphere.
fn sphere_directions(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let theta = golden * i as f64;
            Vec3::new(r * theta.cos(), r * theta.sin(), z)
        })
        .collect()
}

pub fn generate_synthetic_pair(config: &SyntheticConfig) -> Result<RegistrationProblem> {
    config.validate()?;
    let n = config.size;
    let dims = [n, n, n];
    let center = config.center();
    let half = config.cube_side / 2.0;

    let mut source = Vec::with_capacity(n * n * n);
    let mut target = Vec::with_capacity(n * n * n);
    let mut source_mask = Vec::with_capacity(n * n * n);
    let mut target_mask = Vec::with_capacity(n * n * n);
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let u = Vec3::new(x as f64, y as f64, z as f64) - center;
                let r = u.norm();
                let in_cube = u.amax() <= half;

                let s_sphere = r <= config.source_radius;
                source_mask.push(s_sphere);
                source.push(if s_sphere {
                    config.sphere_intensity
                } else if in_cube {
                    config.cube_intensity
                } else {
                    config.background
                });

                let t_sphere = r <= config.target_radius;
                target_mask.push(t_sphere);
                target.push(if t_sphere {
                    config.sphere_intensity
                } else if in_cube && inside_deformed_cube(&u, half, config.parabola_depth) {
                    config.cube_intensity
                } else {
                    config.background
                });
            }
        }
    }

    let to_mm = |p: Vec3| {
        Vec3::new(
            p.x * config.spacing[0],
            p.y * config.spacing[1],
            p.z * config.spacing[2],
        )
    };
    let dirs = sphere_directions(config.guidance_points);
    let guidance = GuidanceSet {
        label: "sphere".into(),
        correspondences: vec![Correspondence {
            id: "sphere".into(),
            source: dirs
                .iter()
                .map(|d| to_mm(center + d * config.source_radius))
                .collect(),
            target: dirs
                .iter()
                .map(|d| to_mm(center + d * config.target_radius))
                .collect(),
        }],
    };

    RegistrationProblem::new(
        ImageVolume::new(dims, config.spacing, source)?,
        ImageVolume::new(dims, config.spacing, target)?,
        Some(guidance),
        Some(BinaryMask::new(dims, config.spacing, source_mask)?),
        Some(BinaryMask::new(dims, config.spacing, target_mask)?),
    )
}
