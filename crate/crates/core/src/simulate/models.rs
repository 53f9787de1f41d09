use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Covariance structures used in the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CovModel {
    /// `σ_ij = ρ^|i−j|`
    Ar1 { rho: f64 },
    /// Unit diagonal, `σ_ij = ρ|i−j|^{−(α+1)}` off the diagonal.
    PolyDecay { rho: f64, alpha: f64 },
    /// AR(1) with the variables shuffled by a fresh permutation per draw.
    PermutedAr1 { rho: f64 },
}

impl CovModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CovModel::Ar1 { rho } | CovModel::PermutedAr1 { rho } if !(rho.abs() < 1.0) => {
                Err(Error::InvalidArgument(format!("AR(1) needs |rho| < 1, got {rho}")))
            }
            CovModel::PolyDecay { rho, alpha } if !(rho.is_finite() && alpha > -1.0) => {
                Err(Error::InvalidArgument(format!("bad decay model rho = {rho}, alpha = {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// The unpermuted covariance.
    pub fn build(&self, p: usize) -> DMatrix<f64> {
        match *self {
            CovModel::Ar1 { rho } | CovModel::PermutedAr1 { rho } => {
                let powers: Vec<f64> = (0..p).map(|d| rho.powi(d as i32)).collect();
                DMatrix::from_fn(p, p, |i, j| powers[i.abs_diff(j)])
            }
            CovModel::PolyDecay { rho, alpha } => DMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    1.0
                } else {
                    rho * (i.abs_diff(j) as f64).powf(-(alpha + 1.0))
                }
            }),
        }
    }

    /// One draw of the covariance for a trial.
    pub fn draw<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> DMatrix<f64> {
        let sigma = self.build(p);
        match self {
            CovModel::PermutedAr1 { .. } => {
                let mut perm: Vec<usize> = (0..p).collect();
                perm.shuffle(rng);
                DMatrix::from_fn(p, p, |i, j| sigma[(perm[i], perm[j])])
            }
            _ => sigma,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, CovModel::PermutedAr1 { .. })
    }
}
