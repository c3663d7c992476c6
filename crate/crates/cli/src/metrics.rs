//! Per-solution quality report: objectives, guidance error and Dice.

use morphreg::mesh::{GridSide, Solution};
use morphreg::objectives::eval_all;
use morphreg::transform::warp_mask;
use morphreg::volume::{dice, RegistrationProblem};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub id: String,
    pub dissimilarity: f64,
    pub deformation: f64,
    /// Guidance objective: mean squared closest-point distance, mm².
    pub guidance: Option<f64>,
    /// Square root of `guidance`, mm.
    pub guidance_rms_mm: Option<f64>,
    /// Overlap of the source mask carried into the target domain with the
    /// target mask.
    pub dice: Option<f64>,
}

pub fn compute_metrics(id: &str, sol: &Solution, problem: &RegistrationProblem) -> Result<Metrics> {
    let o = eval_all(sol, problem)?;
    let dice = match (&problem.source_mask, &problem.target_mask) {
        (Some(s), Some(t)) => Some(dice(&warp_mask(sol, s, GridSide::Source)?, t)?),
        _ => None,
    };
    Ok(Metrics {
        id: id.to_string(),
        dissimilarity: o.dissimilarity,
        deformation: o.deformation,
        guidance: o.guidance,
        guidance_rms_mm: o.guidance.map(f64::sqrt),
        dice,
    })
}

impl Metrics {
    /// Human-readable report, one `key: value` per line.
    pub fn report(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into());
        format!(
            "id: {}\ndissimilarity: {:.6}\ndeformation: {:.6}\nguidance_mm2: {}\nguidance_rms_mm: {}\ndice: {}\n",
            self.id,
            self.dissimilarity,
            self.deformation,
            opt(self.guidance),
            opt(self.guidance_rms_mm),
            opt(self.dice)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphreg::mesh::{build_topology, init_identity_solution};
    use morphreg::volume::{generate_synthetic_pair, SyntheticConfig};
    use std::sync::Arc;

    #[test]
    fn identity_on_identical_images() {
        let cfg = SyntheticConfig {
            parabola_depth: 0.0,
            target_radius: SyntheticConfig::smoke().source_radius,
            ..SyntheticConfig::smoke()
        };
        let p = generate_synthetic_pair(&cfg).unwrap();
        let sol = init_identity_solution(Arc::new(build_topology([4; 3]).unwrap()), p.dims());
        let m = compute_metrics("identity", &sol, &p).unwrap();
        assert_eq!(m.dice, Some(1.0));
        assert!(m.guidance.unwrap() < 1e-20);
        assert!(m.dissimilarity < 1e-12);
        assert!(m.report().contains("dice: 1.000000"));
    }
}
