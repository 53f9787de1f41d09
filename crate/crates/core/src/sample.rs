use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Scalar;

/// Sampling regime. Determines the fourth-moment constants used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    RealUnknownMean,
    RealKnownMean,
    ComplexUnknownMean,
    /// Constants for this regime are obtained by analogy and not separately
    /// derived; results in this regime are flagged as heuristic.
    ComplexKnownMean,
}

impl Regime {
    pub fn of<T: Scalar>(mean_known: bool) -> Self {
        match (T::IS_COMPLEX, mean_known) {
            (false, false) => Regime::RealUnknownMean,
            (false, true) => Regime::RealKnownMean,
            (true, false) => Regime::ComplexUnknownMean,
            (true, true) => Regime::ComplexKnownMean,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Regime::ComplexUnknownMean | Regime::ComplexKnownMean)
    }

    pub fn mean_known(self) -> bool {
        matches!(self, Regime::RealKnownMean | Regime::ComplexKnownMean)
    }

    pub fn is_heuristic(self) -> bool {
        self == Regime::ComplexKnownMean
    }

    /// Theoretical lower bound of the elliptical kurtosis.
    pub fn kurtosis_lower_bound(self, p: usize) -> f64 {
        if self.is_complex() {
            -1.0 / (p as f64 + 1.0)
        } else {
            -2.0 / (p as f64 + 2.0)
        }
    }

    /// `(τ₁, τ₂)` such that
    /// `cov(vec S) = τ₁ (I + K)(Σ ⊗ Σ) + τ₂ vec(Σ)vec(Σ)ᵀ` (real) or
    /// `τ₁ (Σ* ⊗ Σ) + τ₂ vec(Σ)vec(Σ)ᴴ` (complex).
    pub fn taus(self, n: usize, kappa: f64) -> (f64, f64) {
        let n = n as f64;
        let tau2 = kappa / n;
        let tau1 = if self.mean_known() {
            (1.0 + kappa) / n
        } else {
            1.0 / (n - 1.0) + kappa / n
        };
        (tau1, tau2)
    }

    /// Multiplicity of the `Σ ⊗ Σ` term in `E[s_ii s_jj]`: 2 for real data
    /// (the commutation matrix doubles it), 1 for circular complex data.
    pub fn diag_multiplicity(self) -> f64 {
        if self.is_complex() {
            1.0
        } else {
            2.0
        }
    }
}

/// `n` observations of dimension `p`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T: Scalar> {
    data: DMatrix<T>,
    mean_known: bool,
}

impl<T: Scalar> SampleSet<T> {
    /// With `mean_known = true` the mean is taken to be zero.
    pub fn new(data: DMatrix<T>, mean_known: bool) -> Result<Self> {
        let (n, p) = data.shape();
        if p < 2 {
            return Err(Error::InvalidArgument(format!("dimension p = {p} must be at least 2")));
        }
        let required = if mean_known { 1 } else { 2 };
        if n < required {
            return Err(Error::InsufficientSamples { required, found: n });
        }
        if data.iter().any(|x| !x.re().is_finite() || !x.im().is_finite()) {
            return Err(Error::InvalidArgument("data contains non-finite values".into()));
        }
        Ok(Self { data, mean_known })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<T> {
        self.data
    }

    pub fn mean_known(&self) -> bool {
        self.mean_known
    }

    pub fn regime(&self) -> Regime {
        Regime::of::<T>(self.mean_known)
    }

    /// Same observations with every variable multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.map(|x| x.mul_re(c)),
            mean_known: self.mean_known,
        }
    }

    /// Reorders the variables: column `j` of the result is column `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p() {
            return Err(Error::DimensionMismatch {
                context: "permutation",
                expected: self.p(),
                found: perm.len(),
            });
        }
        let data = DMatrix::from_fn(self.n(), self.p(), |i, j| self.data[(i, perm[j])]);
        Ok(Self {
            data,
            mean_known: self.mean_known,
        })
    }
}
