//! Multivariate normal model over the 24 variables of one FOS element.

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const ELEMENT_VARS: usize = 24;

pub type ElementVector = SVector<f64, ELEMENT_VARS>;

/// Lower bound on the variance of variables that vary at all.
pub const VARIANCE_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Gaussian {
    pub mean: ElementVector,
    /// Lower-triangular factor; columns of dependent directions are zero.
    pub factor: SMatrix<f64, ELEMENT_VARS, ELEMENT_VARS>,
}

impl Gaussian {
    /// Maximum-likelihood estimate scaled by `multiplier`.
    pub fn estimate(samples: &[ElementVector], multiplier: f64) -> Self {
        let m = samples.len().max(1) as f64;
        let mut mean = ElementVector::zeros();
        for s in samples {
            mean += s;
        }
        mean /= m;
        let mut cov = SMatrix::<f64, ELEMENT_VARS, ELEMENT_VARS>::zeros();
        for s in samples {
            let d = s - mean;
            cov += d * d.transpose();
        }
        cov *= multiplier / m;
        for i in 0..ELEMENT_VARS {
            if cov[(i, i)] > 0.0 && cov[(i, i)] < VARIANCE_FLOOR {
                cov[(i, i)] = VARIANCE_FLOOR;
            }
        }
        Gaussian {
            mean,
            factor: cholesky_semidefinite(&cov),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ElementVector {
        let z = ElementVector::from_fn(|_, _| StandardNormal.sample(rng));
        self.mean + self.factor * z
    }
}

/// Cholesky factor of a positive semi-definite matrix: pivots that are not
/// clearly positive zero their column instead of failing.
pub fn cholesky_semidefinite(
    a: &SMatrix<f64, ELEMENT_VARS, ELEMENT_VARS>,
) -> SMatrix<f64, ELEMENT_VARS, ELEMENT_VARS> {
    let n = ELEMENT_VARS;
    let scale = (0..n).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let mut l = SMatrix::<f64, ELEMENT_VARS, ELEMENT_VARS>::zeros();
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            continue;
        }
        let piv = d.sqrt();
        l[(j, j)] = piv;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / piv;
        }
    }
    l
}
