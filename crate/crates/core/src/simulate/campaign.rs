//! Monte-Carlo NMSE campaigns.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{frob_norm_sq, taper};
use crate::moments::scm;
use crate::sample::SampleSet;
use crate::shrinkage::{rscm, tabasco, TabascoOptions};
use crate::templates::{FamilySpec, TaperTemplate, TemplateFamily};

use super::baselines::{lw_estimator, mnmx_taper_estimator};
use super::models::CovModel;
use super::sampling::{trial_rng, Distribution, MeanSpec, Sampler};

/// Estimators available to a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EstimatorSpec {
    Tabasco {
        #[serde(default)]
        family: FamilySpec,
        #[serde(default)]
        options: TabascoOptions,
    },
    Rscm {
        #[serde(default)]
        options: TabascoOptions,
    },
    Lwe,
    Mnmx {
        alpha: f64,
    },
    Scm,
    /// Fixed template applied to the SCM without shrinkage.
    TaperedScm {
        family: FamilySpec,
    },
}

impl EstimatorSpec {
    pub fn default_label(&self) -> &'static str {
        match self {
            EstimatorSpec::Tabasco { .. } => "tabasco",
            EstimatorSpec::Rscm { .. } => "rscm",
            EstimatorSpec::Lwe => "lwe",
            EstimatorSpec::Mnmx { .. } => "mnmx",
            EstimatorSpec::Scm => "scm",
            EstimatorSpec::TaperedScm { .. } => "tapered-scm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEstimator {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub spec: EstimatorSpec,
}

impl NamedEstimator {
    pub fn new(spec: EstimatorSpec) -> Self {
        Self { label: None, spec }
    }

    pub fn labeled(label: impl Into<String>, spec: EstimatorSpec) -> Self {
        Self { label: Some(label.into()), spec }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or_else(|| self.spec.default_label())
    }
}

fn default_trials() -> usize {
    1000
}

/// Full description of a simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub model: CovModel,
    pub p: usize,
    pub ns: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default)]
    pub mean: MeanSpec,
    #[serde(default)]
    pub mean_known: bool,
    pub estimators: Vec<NamedEstimator>,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.distribution.validate()?;
        if self.p < 2 {
            return Err(Error::InvalidArgument("p must be at least 2".into()));
        }
        if self.ns.is_empty() || self.trials == 0 || self.estimators.is_empty() {
            return Err(Error::InvalidArgument("campaign needs sample sizes, trials and estimators".into()));
        }
        if self.mean_known && self.mean != MeanSpec::Zero {
            return Err(Error::InvalidArgument("known-mean campaigns must use a zero mean".into()));
        }
        Ok(())
    }
}

/// Aggregated results of one estimator at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmseRow {
    pub estimator: String,
    pub n: usize,
    pub nmse_mean: f64,
    pub nmse_se: f64,
    pub beta_mean: Option<f64>,
    pub k_mode: Option<f64>,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub rows: Vec<NmseRow>,
}

impl CampaignReport {
    pub fn get(&self, estimator: &str, n: usize) -> Option<&NmseRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }
}

/// Families are resolved once per campaign.
enum Prepared {
    Tabasco(TemplateFamily, TabascoOptions),
    Rscm(TabascoOptions),
    Lwe,
    Mnmx(f64),
    Scm,
    TaperedScm(TaperTemplate),
}

impl Prepared {
    fn new(spec: &EstimatorSpec, p: usize) -> Result<Self> {
        Ok(match spec {
            EstimatorSpec::Tabasco { family, options } => Prepared::Tabasco(family.build(p)?, *options),
            EstimatorSpec::Rscm { options } => Prepared::Rscm(*options),
            EstimatorSpec::Lwe => Prepared::Lwe,
            EstimatorSpec::Mnmx { alpha } => Prepared::Mnmx(*alpha),
            EstimatorSpec::Scm => Prepared::Scm,
            EstimatorSpec::TaperedScm { family } => {
                let fam = family.build(p)?;
                if fam.len() != 1 {
                    return Err(Error::InvalidArgument("tapered-scm needs exactly one template".into()));
                }
                Prepared::TaperedScm(fam.templates()[0].clone())
            }
        })
    }

    /// Estimate with its shrinkage intensity and template index, if any.
    fn run(&self, x: &SampleSet<f64>) -> Result<(DMatrix<f64>, Option<f64>, Option<f64>)> {
        Ok(match self {
            Prepared::Tabasco(family, opts) => {
                let est = tabasco(x, family, opts)?;
                (est.sigma_hat, Some(est.selection.beta_hat), Some(est.selection.chosen_value))
            }
            Prepared::Rscm(opts) => {
                let est = rscm(x, opts)?;
                (est.sigma_hat, Some(est.selection.beta_hat), None)
            }
            Prepared::Lwe => {
                let est = lw_estimator(x);
                (est.sigma_hat, Some(est.beta), None)
            }
            Prepared::Mnmx(alpha) => {
                let (s, k) = mnmx_taper_estimator(x, *alpha)?;
                (s, None, Some(k as f64))
            }
            Prepared::Scm => (scm(x), None, None),
            Prepared::TaperedScm(t) => (taper(t.w(), &scm(x))?, None, Some(t.index_value())),
        })
    }
}

type Outcome = Result<(f64, Option<f64>, Option<f64>)>;

fn run_trial(cfg: &CampaignConfig, prepared: &[Prepared], n: usize, stream: u64, trial: u64) -> Vec<Outcome> {
    let mut rng = trial_rng(cfg.seed, stream, trial);
    let sigma = cfg.model.draw(cfg.p, &mut rng);
    let norm = frob_norm_sq(&sigma);
    let sample = Sampler::new(&sigma).and_then(|s| s.sample(&mut rng, n, cfg.distribution, cfg.mean, cfg.mean_known));
    let x = match sample {
        Ok(x) => x,
        Err(e) => return prepared.iter().map(|_| Err(e.clone())).collect(),
    };
    prepared
        .iter()
        .map(|est| {
            let (s, beta, k) = est.run(&x)?;
            Ok((frob_norm_sq(&(s - &sigma)) / norm, beta, k))
        })
        .collect()
}

fn summarize(label: &str, n: usize, outcomes: impl Iterator<Item = Outcome>) -> NmseRow {
    let (mut sum, mut sum_sq, mut count, mut failures) = (0.0, 0.0, 0usize, 0usize);
    let (mut beta_sum, mut beta_count) = (0.0, 0usize);
    let mut k_counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    let mut first_error = None;
    for o in outcomes {
        match o {
            Ok((nmse, beta, k)) => {
                sum += nmse;
                sum_sq += nmse * nmse;
                count += 1;
                if let Some(b) = beta {
                    beta_sum += b;
                    beta_count += 1;
                }
                if let Some(k) = k {
                    k_counts.entry(k.to_bits()).or_insert((k, 0)).1 += 1;
                }
            }
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        log::warn!("{label} at n = {n}: {failures} failed trials (first: {e})");
    }
    let mean = if count > 0 { sum / count as f64 } else { f64::NAN };
    let se = if count > 1 {
        let var = (sum_sq - count as f64 * mean * mean) / (count - 1) as f64;
        (var.max(0.0) / count as f64).sqrt()
    } else {
        f64::NAN
    };
    // Most frequent index; ties go to the smallest index.
    let k_mode = k_counts
        .values()
        .copied()
        .fold(None, |best: Option<(f64, usize)>, (k, c)| match best {
            Some((bk, bc)) if bc > c || (bc == c && bk <= k) => Some((bk, bc)),
            _ => Some((k, c)),
        })
        .map(|(k, _)| k);
    NmseRow {
        estimator: label.to_string(),
        n,
        nmse_mean: mean,
        nmse_se: se,
        beta_mean: (beta_count > 0).then(|| beta_sum / beta_count as f64),
        k_mode,
        trials: count,
        failures,
    }
}

/// Runs every estimator on `trials` independent draws for each sample size.
///
/// Trials run in parallel but are reduced in trial order, so the report is
/// identical for a given seed regardless of the thread count.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let prepared: Vec<Prepared> = cfg.estimators.iter().map(|e| Prepared::new(&e.spec, cfg.p)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (stream, &n) in cfg.ns.iter().enumerate() {
        let outcomes: Vec<Vec<Outcome>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(cfg, &prepared, n, stream as u64, t))
            .collect();
        for (j, est) in cfg.estimators.iter().enumerate() {
            rows.push(summarize(est.label(), n, outcomes.iter().map(|o| o[j].clone())));
        }
    }
    Ok(CampaignReport { rows })
}
