//! Synthetic space-time adaptive processing (STAP): steering vectors,
//! clutter-ridge interference, and ACE detection maps computed with a
//! plug-in covariance estimate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::make_hermitian;
use crate::moments::scm;
use crate::sample::SampleSet;
use crate::shrinkage::{tabasco, TabascoOptions};
use crate::simulate::sampling::{trial_rng, Distribution, MeanSpec, NormalDraw, Sampler};
use crate::templates::{stap_null_widths, TemplateFamily};
use crate::Complex64;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarConfig {
    /// Number of array elements `Q`.
    pub sensors: usize,
    /// Number of pulses `P`.
    pub pulses: usize,
    /// Carrier frequency (Hz).
    pub f0: f64,
    /// Bandwidth (Hz).
    pub bandwidth: f64,
    /// Platform speed (m/s).
    pub platform_speed: f64,
    /// Element spacing (m).
    pub spacing: f64,
    /// Pulse repetition frequency (Hz).
    pub prf: f64,
    /// Clutter-to-noise ratio (dB).
    pub cnr_db: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            sensors: 4,
            pulses: 64,
            f0: 10e9,
            bandwidth: 5e6,
            platform_speed: 100.0,
            spacing: 0.3,
            prf: 1e3,
            cnr_db: 20.0,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.f0, self.bandwidth, self.platform_speed, self.spacing, self.prf];
        if self.sensors == 0 || self.pulses == 0 || positive.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("radar parameters must be positive".into()));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.sensors * self.pulses
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f0
    }

    /// Largest `|sin θ|` before spatial aliasing, `λ/(2d)` (capped at 1).
    pub fn max_sin_theta(&self) -> f64 {
        (self.wavelength() / (2.0 * self.spacing)).min(1.0)
    }

    /// Largest unambiguous radial speed, `λ f_r / 4`.
    pub fn max_velocity(&self) -> f64 {
        self.wavelength() * self.prf / 4.0
    }

    /// Unit-norm space-time steering vector `b(v) ⊗ a(θ)`.
    pub fn steering_vector(&self, theta: f64, v: f64) -> DVector<Complex64> {
        let lambda = self.wavelength();
        let fs = self.spacing / lambda * theta.sin();
        let fd = 2.0 * v / (lambda * self.prf);
        let q = self.sensors;
        let norm = 1.0 / (self.p() as f64).sqrt();
        DVector::from_fn(self.p(), |i, _| {
            let (m, s) = ((i / q) as f64, (i % q) as f64);
            Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * (fd * m + fs * s))
        })
    }

    /// Clutter covariance from `patches` equal-power scatterers spread over
    /// the visible angular range, each at the Doppler of its angle
    /// (`v = V sin θ`). Scaled so that `tr(Σ_c) = 10^{CNR/10} p`.
    pub fn clutter_covariance(&self, patches: usize) -> DMatrix<Complex64> {
        let p = self.p();
        let mut sigma = DMatrix::zeros(p, p);
        if patches == 0 {
            return sigma;
        }
        let power = 10f64.powf(self.cnr_db / 10.0) * p as f64 / patches as f64;
        let smax = self.max_sin_theta();
        for c in 0..patches {
            let s = -smax + 2.0 * smax * (c as f64 + 0.5) / patches as f64;
            let a = self.steering_vector(s.asin(), self.platform_speed * s);
            sigma += (&a * a.adjoint()) * Complex64::from(power);
        }
        make_hermitian(&mut sigma);
        sigma
    }

    /// Interference-plus-noise covariance `Σ_c + I`.
    pub fn interference_covariance(&self, patches: usize) -> DMatrix<Complex64> {
        self.clutter_covariance(patches) + DMatrix::identity(self.p(), self.p())
    }
}

/// Circular Gaussian snapshots with covariance `Σ_c + I`.
pub fn synth_clutter<R: Rng + ?Sized>(
    config: &RadarConfig,
    n: usize,
    patches: usize,
    mean_known: bool,
    rng: &mut R,
) -> Result<SampleSet<Complex64>> {
    config.validate()?;
    let sampler = Sampler::new(&config.interference_covariance(patches))?;
    sampler.sample(rng, n, Distribution::Mvn, MeanSpec::Zero, mean_known)
}

/// A positive definite covariance estimate factored for whitening.
pub struct Whitener {
    chol: Cholesky<Complex64, Dyn>,
}

impl Whitener {
    pub fn new(sigma_hat: &DMatrix<Complex64>) -> Result<Self> {
        let chol = crate::kernels::cholesky(sigma_hat)?;
        Ok(Self { chol })
    }

    /// `L⁻¹ x` where `Σ̂ = L Lᴴ`.
    pub fn whiten(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(x)
            .expect("Cholesky factor has a nonzero diagonal")
    }
}

fn ace_whitened(p: &DVector<Complex64>, x: &DVector<Complex64>) -> f64 {
    let num = p.dotc(x).norm_sqr();
    let den = p.norm_squared() * x.norm_squared();
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Adaptive coherence estimator `|pᴴΣ̂⁻¹x|² / ((pᴴΣ̂⁻¹p)(xᴴΣ̂⁻¹x))`.
pub fn ace_statistic(sigma_hat: &DMatrix<Complex64>, p: &DVector<Complex64>, x0: &DVector<Complex64>) -> Result<f64> {
    let w = Whitener::new(sigma_hat)?;
    Ok(ace_whitened(&w.whiten(p), &w.whiten(x0)))
}

/// Angle/velocity grid of the detection map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StapGrid {
    pub thetas: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl StapGrid {
    /// `n_theta` angles uniform in `sin θ` over the visible range and
    /// `n_velocity` speeds over `[−λf_r/4, λf_r/4)`.
    pub fn uniform(config: &RadarConfig, n_theta: usize, n_velocity: usize) -> Self {
        let smax = config.max_sin_theta();
        let vmax = config.max_velocity();
        let thetas = (0..n_theta)
            .map(|i| (-smax + 2.0 * smax * i as f64 / n_theta as f64).asin())
            .collect();
        let velocities = (0..n_velocity)
            .map(|j| -vmax + 2.0 * vmax * j as f64 / n_velocity as f64)
            .collect();
        Self { thetas, velocities }
    }

    pub fn len(&self) -> usize {
        self.thetas.len() * self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of cell `(i_theta, j_velocity)`.
    pub fn cell(&self, i: usize, j: usize) -> usize {
        i * self.velocities.len() + j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionMap {
    pub label: String,
    pub grid: StapGrid,
    /// Statistic per cell, theta-major.
    pub statistic: Vec<f64>,
}

impl DetectionMap {
    pub fn max(&self) -> f64 {
        self.statistic.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of cells with a strictly larger statistic than `cell`.
    pub fn rank_of(&self, cell: usize) -> usize {
        let v = self.statistic[cell];
        self.statistic.iter().filter(|&&s| s > v).count()
    }

    /// Whether `cell` is among the top `fraction` of cells.
    pub fn in_top_fraction(&self, cell: usize, fraction: f64) -> bool {
        let allowed = ((self.statistic.len() as f64 * fraction).ceil() as usize).max(1);
        self.rank_of(cell) < allowed
    }

    /// `(theta, velocity, statistic)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid.thetas.iter().enumerate().flat_map(move |(i, &th)| {
            self.grid
                .velocities
                .iter()
                .enumerate()
                .map(move |(j, &v)| (th, v, self.statistic[self.grid.cell(i, j)]))
        })
    }
}

pub fn detection_map(
    config: &RadarConfig,
    label: &str,
    sigma_hat: &DMatrix<Complex64>,
    grid: &StapGrid,
    x0: &DVector<Complex64>,
) -> Result<DetectionMap> {
    let w = Whitener::new(sigma_hat).map_err(|_| {
        Error::DegenerateData(format!("{label}: covariance estimate is not positive definite"))
    })?;
    let xw = w.whiten(x0);
    let mut statistic = Vec::with_capacity(grid.len());
    for &th in &grid.thetas {
        for &v in &grid.velocities {
            statistic.push(ace_whitened(&w.whiten(&config.steering_vector(th, v)), &xw));
        }
    }
    Ok(DetectionMap {
        label: label.to_string(),
        grid: grid.clone(),
        statistic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StapEstimator {
    Tabasco,
    Scm,
}

impl std::str::FromStr for StapEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabasco" => Ok(Self::Tabasco),
            "scm" => Ok(Self::Scm),
            other => Err(Error::Parse(format!("unknown STAP estimator `{other}`"))),
        }
    }
}

/// One synthetic detection scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StapScenario {
    pub radar: RadarConfig,
    /// Training snapshots.
    pub n: usize,
    pub patches: usize,
    /// Signal-to-clutter ratio of the injected target (dB); `None` for no target.
    pub scr_db: Option<f64>,
    /// Target cell as (theta index, velocity index) on the grid.
    pub target_cell: (usize, usize),
    pub grid_thetas: usize,
    pub grid_velocities: usize,
    pub mean_known: bool,
    pub null_widths: Vec<f64>,
}

impl Default for StapScenario {
    fn default() -> Self {
        Self {
            radar: RadarConfig {
                sensors: 2,
                pulses: 8,
                ..RadarConfig::default()
            },
            n: 40,
            patches: 64,
            scr_db: Some(-5.0),
            // Broadside, at a Doppler outside the band occupied by the clutter ridge.
            target_cell: (8, 56),
            grid_thetas: 16,
            grid_velocities: 64,
            mean_known: false,
            null_widths: stap_null_widths(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StapOutcome {
    pub map: DetectionMap,
    pub target_cell: usize,
    pub beta: Option<f64>,
    pub k: Option<f64>,
}

impl StapScenario {
    pub fn grid(&self) -> StapGrid {
        StapGrid::uniform(&self.radar, self.grid_thetas, self.grid_velocities)
    }

    /// Draws training data and a test snapshot, estimates the covariance and
    /// builds the detection map. Deterministic in `(seed, run)`.
    pub fn run(&self, estimator: StapEstimator, seed: u64, run: u64) -> Result<StapOutcome> {
        self.radar.validate()?;
        let grid = self.grid();
        let (ti, tv) = self.target_cell;
        if ti >= grid.thetas.len() || tv >= grid.velocities.len() {
            return Err(Error::InvalidArgument("target cell outside the grid".into()));
        }
        let p = self.radar.p();
        let mut rng = trial_rng(seed, 0, run);
        let sampler = Sampler::new(&self.radar.interference_covariance(self.patches))?;
        let train = sampler.sample(&mut rng, self.n, Distribution::Mvn, MeanSpec::Zero, self.mean_known)?;
        let noise = sampler.draw(&mut rng, 1, Distribution::Mvn)?;
        let mut x0 = noise.row(0).transpose();
        if let Some(scr) = self.scr_db {
            let amp = (10f64.powf((scr + self.radar.cnr_db) / 10.0) * p as f64).sqrt();
            let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let target = self.radar.steering_vector(grid.thetas[ti], grid.velocities[tv]);
            x0 += target * Complex64::from_polar(amp, phase);
        }
        let (sigma_hat, beta, k, label) = match estimator {
            StapEstimator::Tabasco => {
                let family = TemplateFamily::stap(self.radar.pulses, self.radar.sensors, &self.null_widths)?;
                let est = tabasco(&train, &family, &TabascoOptions::default())?;
                (est.sigma_hat, Some(est.selection.beta_hat), Some(est.selection.chosen_value), "tabasco")
            }
            StapEstimator::Scm => (scm(&train), None, None, "scm"),
        };
        let map = detection_map(&self.radar, label, &sigma_hat, &grid, &x0)?;
        Ok(StapOutcome {
            map,
            target_cell: grid.cell(ti, tv),
            beta,
            k,
        })
    }
}

/// Empirical area under the ROC curve: `P(h1 > h0) + P(h1 = h0)/2`.
pub fn empirical_auc(h1: &[f64], h0: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &a in h1 {
        for &b in h0 {
            wins += if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (h1.len() * h0.len()) as f64
}

/// Standard circular normal vector (used for pure-noise test snapshots).
pub fn white_snapshot<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(p, |_, _| Complex64::standard_normal(rng))
}
