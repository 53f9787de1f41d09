//! Sphericity estimates `γ̂_W = γ(W ∘ Σ) = p‖W∘Σ‖² / tr(Σ)²`.
//!
//! Two estimators are provided:
//!
//! * [`SphericityMethod::Ell1`] works on the spatial sign covariance and is
//!   robust to heavy tails.
//! * [`SphericityMethod::Ell2`] works on the SCM through the unbiased estimate
//!   of `‖W∘Σ‖²/p` and needs the kurtosis `κ̂`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Scalar;
use crate::moments::{sscm, MedianOptions};
use crate::sample::{Regime, SampleSet};
use crate::templates::{HermitianSummary, TaperTemplate, TemplateFamily, TemplateMoments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SphericityMethod {
    #[default]
    Ell1,
    Ell2,
}

impl std::str::FromStr for SphericityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ell1" => Ok(Self::Ell1),
            "ell2" => Ok(Self::Ell2),
            other => Err(Error::Parse(format!("unknown sphericity method `{other}` (expected ell1 or ell2)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericityEstimate {
    /// Clamped to `[1, p]`.
    pub gamma_hat: f64,
    pub method: SphericityMethod,
    pub template_label: String,
    /// Value before clamping.
    pub raw_value: f64,
}

pub fn clamp_sphericity(raw: f64, p: usize) -> f64 {
    if raw.is_nan() {
        return 1.0;
    }
    raw.clamp(1.0, p as f64)
}

/// Constants `(a_n, b_n)` of the unbiased estimator
/// `ϑ̂_W = b_n (‖W∘S‖²/p − a_n tr((D_S W)²)/p)` of `‖W∘Σ‖²/p`.
///
/// Obtained by inverting the 2×2 linear system linking `E‖W∘S‖²` and
/// `E tr((D_S W)²)` to their population counterparts.
pub fn an_bn(regime: Regime, n: usize, kappa: f64) -> Result<(f64, f64)> {
    if regime == Regime::ComplexKnownMean {
        return Err(Error::Regime(
            "Ell2 sphericity has no unbiased constants for complex data with known mean; use Ell1".into(),
        ));
    }
    if !regime.mean_known() && n < 3 {
        return Err(Error::InsufficientSamples { required: 3, found: n });
    }
    let (t1, t2) = regime.taus(n, kappa);
    let c = regime.diag_multiplicity();
    let a = t1 / (1.0 + t2);
    let denom = 1.0 + t2 + (c - 1.0) * t1 - a * c * t1;
    if !(denom > 0.0) || !(1.0 + t2 > 0.0) {
        return Err(Error::Regime(format!(
            "kurtosis {kappa} too extreme for n = {n}; Ell2 constants undefined, use more samples"
        )));
    }
    Ok((a, 1.0 / denom))
}

/// Everything an estimator needs besides the per-template quadratic statistics.
#[derive(Debug, Clone, Copy)]
enum Context {
    Ell1 { n_used: usize, p: usize },
    Ell2 { p: usize, trace: f64, a: f64, b: f64 },
}

impl Context {
    fn raw(&self, frob: f64, diag: f64) -> f64 {
        match *self {
            Context::Ell1 { n_used, p } => {
                let (n, p) = (n_used as f64, p as f64);
                n / (n - 1.0) * (frob / p - diag / (n * p))
            }
            Context::Ell2 { p, trace, a, b } => p as f64 * b * (frob - a * diag) / (trace * trace),
        }
    }
}

/// Prepared statistics for evaluating a sphericity estimator on many templates.
#[derive(Debug, Clone)]
pub struct SphericityEngine {
    method: SphericityMethod,
    context: Context,
    summary: HermitianSummary,
}

impl SphericityEngine {
    /// Ell1 engine from data (computes the SSCM).
    pub fn ell1<T: Scalar>(x: &SampleSet<T>, median: MedianOptions) -> Result<Self> {
        let s = sscm(x, median)?;
        Ok(Self::ell1_from_sscm(&s.lambda, s.n_used))
    }

    pub fn ell1_from_sscm<T: Scalar>(lambda: &DMatrix<T>, n_used: usize) -> Self {
        Self {
            method: SphericityMethod::Ell1,
            context: Context::Ell1 { n_used, p: lambda.nrows() },
            summary: HermitianSummary::new(lambda),
        }
    }

    /// Ell2 engine from a precomputed SCM summary.
    pub fn ell2(scm: &HermitianSummary, regime: Regime, n: usize, kappa: f64) -> Result<Self> {
        let trace = scm.trace();
        if !(trace > 0.0) {
            return Err(Error::DegenerateData("tr(S) = 0".into()));
        }
        let (a, b) = an_bn(regime, n, kappa)?;
        Ok(Self {
            method: SphericityMethod::Ell2,
            context: Context::Ell2 { p: scm.p(), trace, a, b },
            summary: scm.clone(),
        })
    }

    pub fn method(&self) -> SphericityMethod {
        self.method
    }

    pub fn p(&self) -> usize {
        self.summary.p()
    }

    /// Raw (unclamped) value from precomputed template statistics.
    fn raw_pair(&self, m: &TemplateMoments) -> (f64, f64) {
        (self.context.raw(m.frob_w, m.diag_w), self.context.raw(m.frob_v, m.diag_v))
    }

    /// `(γ̂_W, γ̂_V)` raw values for one template. For 0/1 templates the V
    /// value is the W value.
    pub fn raw_wv(&self, t: &TaperTemplate) -> (f64, f64) {
        let m = t.moments(&self.summary);
        let (w, v) = self.raw_pair(&m);
        if t.is_binary() {
            (w, w)
        } else {
            (w, v)
        }
    }

    /// Unclamped sphericity of the untapered matrix.
    pub fn raw_untapered(&self) -> f64 {
        // With W = 11ᵀ the diagonal statistic is tr(A)².
        let tr = self.summary.trace();
        self.context.raw(self.summary.frob(), tr * tr)
    }

    pub fn estimate(&self, t: &TaperTemplate) -> SphericityEstimate {
        let (raw, _) = self.raw_wv(t);
        SphericityEstimate {
            gamma_hat: clamp_sphericity(raw, self.p()),
            method: self.method,
            template_label: t.label().to_string(),
            raw_value: raw,
        }
    }
}

/// Per-template sphericities for a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericityBundle {
    /// Sphericity of the untapered matrix (clamped).
    pub gamma_hat: f64,
    pub gamma_w: Vec<f64>,
    pub gamma_v: Vec<f64>,
}

pub fn sphericity_bundle(engine: &SphericityEngine, family: &TemplateFamily) -> SphericityBundle {
    let p = engine.p();
    let (gamma_w, gamma_v) = family
        .iter()
        .map(|t| {
            let (w, v) = engine.raw_wv(t);
            (clamp_sphericity(w, p), clamp_sphericity(v, p))
        })
        .unzip();
    SphericityBundle {
        gamma_hat: clamp_sphericity(engine.raw_untapered(), p),
        gamma_w,
        gamma_v,
    }
}

/// Ell1 sphericity of `W ∘ Σ` from data.
pub fn ell1_sphericity<T: Scalar>(x: &SampleSet<T>, t: &TaperTemplate) -> Result<SphericityEstimate> {
    Ok(SphericityEngine::ell1(x, MedianOptions::default())?.estimate(t))
}

/// Ell2 sphericity of `W ∘ Σ` from data with kurtosis `kappa`.
pub fn ell2_sphericity<T: Scalar>(x: &SampleSet<T>, t: &TaperTemplate, kappa: f64) -> Result<SphericityEstimate> {
    let s = crate::moments::scm(x);
    let engine = SphericityEngine::ell2(&HermitianSummary::new(&s), x.regime(), x.n(), kappa)?;
    Ok(engine.estimate(t))
}
