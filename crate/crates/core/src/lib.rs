//! Regularized tapered sample covariance estimation.
//!
//! The estimator shrinks a tapered (or banded) sample covariance matrix
//! `W ∘ S` towards the scaled identity `(tr(S)/p) I`:
//!
//! ```text
//! Σ̂ = β (W(k) ∘ S) + (1 − β) (tr(S)/p) I
//! ```
//!
//! Both the shrinkage intensity `β` and the template index `k` are picked from
//! the data by minimizing a closed-form MSE criterion that holds for any
//! (real or circular complex) elliptically symmetric distribution with finite
//! fourth moments.
//!
//! Module map:
//!
//! * [`kernels`]: Hadamard products, Frobenius statistics, scalar abstraction.
//! * [`templates`]: admissible taper templates and template families.
//! * [`moments`]: SCM, spatial median, spatial sign covariance, kurtosis.
//! * [`sphericity`]: Ell1 / Ell2 sphericity estimators of tapered matrices.
//! * [`shrinkage`]: plug-in shrinkage, template selection, the full pipeline.
//! * [`oracle`]: population-level formulas used as ground truth.
//! * [`simulate`]: covariance models, samplers, baselines and the Monte-Carlo harness.
//! * [`stap`]: synthetic space-time adaptive processing demo.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod moments;
pub mod oracle;
pub mod sample;
pub mod shrinkage;
pub mod simulate;
pub mod sphericity;
pub mod stap;
pub mod templates;

pub use error::{Error, Result};
pub use kernels::Scalar;
pub use num_complex::Complex64;
pub use sample::{Regime, SampleSet};
pub use shrinkage::{rscm, tabasco, TabascoEstimate, TabascoOptions};
pub use sphericity::SphericityMethod;
pub use templates::{FamilySpec, TaperTemplate, TemplateFamily};
