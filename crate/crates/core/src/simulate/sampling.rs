use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Scalar;
use crate::sample::SampleSet;
use crate::Complex64;

/// Independent generator for one Monte-Carlo trial. Streams are addressed by
/// `(seed, stream, trial)` so results do not depend on scheduling.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 40) ^ trial);
    rng
}

/// Elliptical sampling distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Mvn,
    /// Multivariate t with `nu > 2` degrees of freedom, scaled so that the
    /// covariance equals the scatter matrix.
    Mvt { nu: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Mvt { nu } if !(nu > 2.0) => {
                Err(Error::InvalidArgument(format!("t distribution needs nu > 2 for finite covariance, got {nu}")))
            }
            _ => Ok(()),
        }
    }

    /// Elliptical kurtosis parameter `κ`.
    pub fn kappa(&self) -> f64 {
        match *self {
            Distribution::Mvn => 0.0,
            Distribution::Mvt { nu } if nu > 4.0 => 2.0 / (nu - 4.0),
            Distribution::Mvt { .. } => f64::INFINITY,
        }
    }
}

/// Location of the generated samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MeanSpec {
    #[default]
    Zero,
    /// `μ ~ N(center · 1, I)`, drawn afresh for every trial.
    RandomGaussian { center: f64 },
}

/// A scalar field that can draw standard (circular) normal variates.
pub trait NormalDraw: Scalar {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl NormalDraw for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl NormalDraw for Complex64 {
    /// Circular: `(a + ib)/√2` with unit variance `E|z|² = 1`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Draws samples with a fixed covariance via its Cholesky factor.
#[derive(Debug, Clone)]
pub struct Sampler<T: Scalar> {
    /// Transposed lower Cholesky factor, so rows are `zᵀ Lᵀ`.
    lt: DMatrix<T>,
}

impl<T: NormalDraw> Sampler<T> {
    pub fn new(sigma: &DMatrix<T>) -> Result<Self> {
        let chol = crate::kernels::cholesky(sigma)?;
        Ok(Self { lt: chol.l().transpose() })
    }

    pub fn p(&self) -> usize {
        self.lt.nrows()
    }

    /// `n × p` matrix of zero-mean draws.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, dist: Distribution) -> Result<DMatrix<T>> {
        dist.validate()?;
        let p = self.p();
        let z = DMatrix::from_fn(n, p, |_, _| T::standard_normal(rng));
        let mut x = z * &self.lt;
        if let Distribution::Mvt { nu } = dist {
            let chi = ChiSquared::new(nu).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            for mut row in x.row_iter_mut() {
                let s: f64 = chi.sample(rng);
                let factor = ((nu - 2.0) / s).sqrt();
                row.apply(|v| *v = v.mul_re(factor));
            }
        }
        Ok(x)
    }

    /// Draws a sample set, adding the location if requested.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        dist: Distribution,
        mean: MeanSpec,
        mean_known: bool,
    ) -> Result<SampleSet<T>> {
        let mut x = self.draw(rng, n, dist)?;
        if let MeanSpec::RandomGaussian { center } = mean {
            if mean_known {
                return Err(Error::InvalidArgument("a random location is incompatible with a known zero mean".into()));
            }
            for mut col in x.column_iter_mut() {
                let m = T::from_re(center) + T::standard_normal(rng);
                col.add_scalar_mut(m);
            }
        }
        SampleSet::new(x, mean_known)
    }
}
