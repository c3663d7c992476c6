//! Warped volumes, displacement fields and slice extraction.

use std::path::Path;

use morphreg::geometry::Vec3;
use morphreg::mesh::{GridSide, Solution};
use morphreg::objectives::check_feasibility;
use morphreg::transform::{displacement_field, warp_volume};
use morphreg::volume::RegistrationProblem;
use morphreg::volume::{save_volume, save_volume_channels, ElementType, ImageVolume};

use crate::error::{CliError, Result};

pub const TRANSFORMED_SOURCE: &str = "transformed_source.mhd";
pub const TRANSFORMED_TARGET: &str = "transformed_target.mhd";
pub const DVF: &str = "dvf.mhd";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceKind {
    Source,
    Target,
    Transformed,
}

impl SliceKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "source" => Some(SliceKind::Source),
            "target" => Some(SliceKind::Target),
            "transformed" => Some(SliceKind::Transformed),
            _ => None,
        }
    }
}

/// A solution applied to its problem.
#[derive(Clone, Debug)]
pub struct Rendered {
    /// Source intensities pulled into the target domain.
    pub transformed_source: ImageVolume,
    /// Target intensities pulled into the source domain.
    pub transformed_target: ImageVolume,
    /// Per target voxel, displacement towards its source position in mm.
    pub dvf: Vec<Vec3>,
}

pub fn render_solution(sol: &Solution, problem: &RegistrationProblem) -> Result<Rendered> {
    if sol.dims() != problem.dims() {
        return Err(CliError::Config(
            "solution and problem dimensions differ".into(),
        ));
    }
    if !check_feasibility(sol, None) {
        return Err(morphreg::Error::Infeasible.into());
    }
    Ok(Rendered {
        transformed_source: warp_volume(sol, &problem.source, GridSide::Source)?,
        transformed_target: warp_volume(sol, &problem.target, GridSide::Target)?,
        dvf: displacement_field(sol, problem.spacing())?,
    })
}

/// Writes the two warped volumes (`MET_FLOAT`) and the 3-channel DVF.
pub fn write_rendered(dir: &Path, rendered: &Rendered) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let v = &rendered.transformed_source;
    save_volume(v, &dir.join(TRANSFORMED_SOURCE), ElementType::Float)?;
    save_volume(
        &rendered.transformed_target,
        &dir.join(TRANSFORMED_TARGET),
        ElementType::Float,
    )?;
    let flat: Vec<f32> = rendered
        .dvf
        .iter()
        .flat_map(|d| [d.x as f32, d.y as f32, d.z as f32])
        .collect();
    save_volume_channels(v.dims(), v.spacing(), 3, &flat, &dir.join(DVF))?;
    Ok(())
}

fn check_z(dims: [usize; 3], z: usize) -> Result<()> {
    if z >= dims[2] {
        return Err(CliError::BadRequest(format!(
            "z = {z} outside 0..{}",
            dims[2]
        )));
    }
    Ok(())
}

/// Axial slice as 8-bit grayscale PNG, window [0, 1], first row y = 0.
pub fn slice_png(volume: &ImageVolume, z: usize) -> Result<Vec<u8>> {
    let dims = volume.dims();
    check_z(dims, z)?;
    let start = dims[0] * dims[1] * z;
    let pixels: Vec<u8> = volume.data()[start..start + dims[0] * dims[1]]
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, dims[0] as u32, dims[1] as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header()?;
        w.write_image_data(&pixels)?;
    }
    Ok(out)
}

/// Displacements of one axial slice as rows (y) of columns (x).
pub fn dvf_slice(dvf: &[Vec3], dims: [usize; 3], z: usize) -> Result<Vec<Vec<[f64; 3]>>> {
    check_z(dims, z)?;
    Ok((0..dims[1])
        .map(|y| {
            (0..dims[0])
                .map(|x| {
                    let d = dvf[x + dims[0] * (y + dims[1] * z)];
                    [d.x, d.y, d.z]
                })
                .collect()
        })
        .collect())
}
