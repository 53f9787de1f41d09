//! Monte-Carlo machinery: covariance models, elliptical samplers, competing
//! estimators and the NMSE campaign harness.

pub mod baselines;
pub mod campaign;
pub mod models;
pub mod sampling;

pub use baselines::{lw_estimator, mnmx_bandwidth, mnmx_taper_estimator, LwEstimate};
pub use campaign::{run_campaign, CampaignConfig, CampaignReport, EstimatorSpec, NamedEstimator, NmseRow};
pub use models::CovModel;
pub use sampling::{trial_rng, Distribution, MeanSpec, Sampler};
