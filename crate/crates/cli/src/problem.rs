//! Problem directories: the files `morphreg synth` writes and `register`
//! reads.

use std::fs;
use std::path::Path;

use morphreg::volume::{
    load_guidance, load_volume, save_guidance, save_mask, save_volume, BinaryMask, ElementType,
    RegistrationProblem,
};

use crate::error::{CliError, Result};

pub const SOURCE: &str = "source.mhd";
pub const TARGET: &str = "target.mhd";
pub const GUIDANCE: &str = "guidance.txt";
pub const SOURCE_MASK: &str = "source_mask.mhd";
pub const TARGET_MASK: &str = "target_mask.mhd";

/// Writes the volumes as `MET_FLOAT`, masks as `MET_UCHAR`.
pub fn write_problem(dir: &Path, problem: &RegistrationProblem) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    save_volume(&problem.source, &dir.join(SOURCE), ElementType::Float)?;
    save_volume(&problem.target, &dir.join(TARGET), ElementType::Float)?;
    if let Some(g) = &problem.guidance {
        save_guidance(g, &dir.join(GUIDANCE))?;
    }
    if let Some(m) = &problem.source_mask {
        save_mask(m, &dir.join(SOURCE_MASK))?;
    }
    if let Some(m) = &problem.target_mask {
        save_mask(m, &dir.join(TARGET_MASK))?;
    }
    Ok(())
}

/// Source and target are required; guidance and masks are read when
/// present.
pub fn load_problem(dir: &Path) -> Result<RegistrationProblem> {
    let source = load_volume(&dir.join(SOURCE))?;
    let target = load_volume(&dir.join(TARGET))?;
    let optional = |name: &str| {
        let p = dir.join(name);
        p.exists().then_some(p)
    };
    let guidance = optional(GUIDANCE).map(|p| load_guidance(&p)).transpose()?;
    let mask = |name: &str| -> Result<Option<BinaryMask>> {
        Ok(match optional(name) {
            Some(p) => Some(BinaryMask::from_volume(&load_volume(&p)?)),
            None => None,
        })
    };
    Ok(RegistrationProblem::new(
        source,
        target,
        guidance,
        mask(SOURCE_MASK)?,
        mask(TARGET_MASK)?,
    )?)
}
