//! Multi-objective deformable registration of 3D images with dual
//! tetrahedral grids.

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod multires;
pub mod objectives;
pub mod optimizer;
pub mod transform;
pub mod volume;

pub use error::{Error, Result};
