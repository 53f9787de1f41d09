//! Plug-in shrinkage intensity, template-index selection and the full
//! regularized tapered SCM estimator
//! `Σ̂ = β̂ (W(k̂) ∘ S) + (1 − β̂) η̂ I`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{shrink_to_identity, taper, Scalar};
use crate::moments::{kurtosis, scm, MedianOptions};
use crate::sample::{Regime, SampleSet};
use crate::sphericity::{clamp_sphericity, SphericityEngine, SphericityMethod};
use crate::templates::{HermitianSummary, TaperTemplate, TemplateFamily};

/// Plug-in statistics of one family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub index_value: f64,
    /// `d_Sᵀ (W∘W) d_S / p`
    pub theta_hat_w: f64,
    pub gamma_hat_w: f64,
    pub gamma_hat_v: f64,
}

/// Scalar statistics feeding the shrinkage formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticalSummary {
    pub eta_hat: f64,
    pub kappa_hat: f64,
    pub gamma_hat: f64,
    pub records: Vec<TemplateRecord>,
    pub n: usize,
    pub p: usize,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaPlugin {
    /// Clamped to `[0, 1]`.
    pub beta: f64,
    /// Formula value before clamping (NaN if the denominator was not positive).
    pub raw: f64,
    /// Set when the denominator was not positive and `beta` was forced to 0.
    pub degenerate: bool,
}

/// Shrinkage intensity minimizing the MSE for given (true or estimated)
/// sphericities, `r = θ_W/η²` and kurtosis.
///
/// With `(τ₁, τ₂)` from the regime and `c` = 2 (real) or 1 (complex):
/// `β = (γ_V − 1) / ((1+τ₂)(γ_W − 1) + τ₁((c−1)γ_W + r − cγ/p))`.
#[allow(clippy::too_many_arguments)]
pub fn beta_formula(
    regime: Regime,
    n: usize,
    p: usize,
    kappa: f64,
    gamma: f64,
    r: f64,
    gamma_w: f64,
    gamma_v: f64,
) -> BetaPlugin {
    let (t1, t2) = regime.taus(n, kappa);
    let c = regime.diag_multiplicity();
    let num = gamma_v - 1.0;
    let den = (1.0 + t2) * (gamma_w - 1.0) + t1 * ((c - 1.0) * gamma_w + r - c * gamma / p as f64);
    if !(den > 0.0) {
        if num != 0.0 {
            log::warn!("nonpositive shrinkage denominator ({den}); using beta = 0");
        }
        return BetaPlugin {
            beta: 0.0,
            raw: f64::NAN,
            degenerate: num != 0.0,
        };
    }
    let raw = num / den;
    BetaPlugin {
        beta: raw.clamp(0.0, 1.0),
        raw,
        degenerate: false,
    }
}

impl EllipticalSummary {
    pub fn beta_plugin(&self, position: usize) -> Result<BetaPlugin> {
        let rec = self.records.get(position).ok_or_else(|| {
            Error::InvalidArgument(format!("no template record at position {position} (have {})", self.records.len()))
        })?;
        let r = rec.theta_hat_w / (self.eta_hat * self.eta_hat);
        Ok(beta_formula(
            self.regime,
            self.n,
            self.p,
            self.kappa_hat,
            self.gamma_hat,
            r,
            rec.gamma_hat_w,
            rec.gamma_hat_v,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkageSelection {
    /// Position of the chosen template in the family.
    pub chosen_index: usize,
    pub chosen_value: f64,
    pub beta_hat: f64,
    /// `β̂(k)(1 − γ̂_V(k))` per member.
    pub objective: Vec<f64>,
    pub per_k_beta: Vec<f64>,
    /// Number of members whose plug-in denominator was not positive.
    pub degenerate_count: usize,
}

/// Picks the member minimizing `β̂(k)(1 − γ̂_V(k))`; ties go to the earliest
/// (most structured) member.
pub fn select_k(summary: &EllipticalSummary) -> Result<ShrinkageSelection> {
    if summary.records.is_empty() {
        return Err(Error::InvalidArgument("summary has no template records".into()));
    }
    let mut per_k_beta = Vec::with_capacity(summary.records.len());
    let mut objective = Vec::with_capacity(summary.records.len());
    let mut degenerate_count = 0;
    for (i, rec) in summary.records.iter().enumerate() {
        let b = summary.beta_plugin(i)?;
        degenerate_count += usize::from(b.degenerate);
        per_k_beta.push(b.beta);
        objective.push(b.beta * (1.0 - rec.gamma_hat_v));
    }
    let mut chosen = 0;
    for (i, &o) in objective.iter().enumerate() {
        if o < objective[chosen] {
            chosen = i;
        }
    }
    Ok(ShrinkageSelection {
        chosen_index: chosen,
        chosen_value: summary.records[chosen].index_value,
        beta_hat: per_k_beta[chosen],
        objective,
        per_k_beta,
        degenerate_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TabascoOptions {
    pub sphericity: SphericityMethod,
    /// Force `κ̂ = 0`.
    pub gaussian: bool,
    pub beta_override: Option<f64>,
    /// Index value (not position) of the template to use instead of selecting.
    pub index_override: Option<f64>,
    pub median: MedianOptions,
}

impl Default for TabascoOptions {
    fn default() -> Self {
        Self {
            sphericity: SphericityMethod::Ell1,
            gaussian: false,
            beta_override: None,
            index_override: None,
            median: MedianOptions::default(),
        }
    }
}

/// The SCM and the summary statistics of a sample for a family.
#[derive(Debug, Clone)]
pub struct Prepared<T: Scalar> {
    pub scm: DMatrix<T>,
    pub summary: EllipticalSummary,
}

/// Computes `S`, `η̂`, `κ̂`, `γ̂` and the per-template records.
pub fn summarize<T: Scalar>(x: &SampleSet<T>, family: &TemplateFamily, opts: &TabascoOptions) -> Result<Prepared<T>> {
    let p = x.p();
    if family.p() != p {
        return Err(Error::DimensionMismatch {
            context: "template family vs data",
            expected: p,
            found: family.p(),
        });
    }
    let s = scm(x);
    let s_summary = HermitianSummary::new(&s);
    let trace = s_summary.trace();
    if !(trace > 0.0) {
        return Err(Error::DegenerateData("tr(S) = 0: all samples equal the center".into()));
    }
    let eta_hat = trace / p as f64;
    let kappa_hat = if opts.gaussian { 0.0 } else { kurtosis(x)? };
    let engine = match opts.sphericity {
        SphericityMethod::Ell1 => SphericityEngine::ell1(x, opts.median)?,
        SphericityMethod::Ell2 => SphericityEngine::ell2(&s_summary, x.regime(), x.n(), kappa_hat)?,
    };
    let gamma_hat = clamp_sphericity(engine.raw_untapered(), p);
    let records = family
        .iter()
        .map(|t| {
            let (w, v) = engine.raw_wv(t);
            TemplateRecord {
                index_value: t.index_value(),
                theta_hat_w: t.moments(&s_summary).diag_w / p as f64,
                gamma_hat_w: clamp_sphericity(w, p),
                gamma_hat_v: clamp_sphericity(v, p),
            }
        })
        .collect();
    Ok(Prepared {
        scm: s,
        summary: EllipticalSummary {
            eta_hat,
            kappa_hat,
            gamma_hat,
            records,
            n: x.n(),
            p,
            regime: x.regime(),
        },
    })
}

#[derive(Debug, Clone)]
pub struct TabascoEstimate<T: Scalar> {
    pub sigma_hat: DMatrix<T>,
    pub selection: ShrinkageSelection,
    pub template: TaperTemplate,
    pub eta_hat: f64,
    pub summary: EllipticalSummary,
    /// True in the complex known-mean regime, whose constants are extrapolated.
    pub heuristic: bool,
}

/// Regularized tapered SCM with data-driven `β̂` and template index.
pub fn tabasco<T: Scalar>(x: &SampleSet<T>, family: &TemplateFamily, opts: &TabascoOptions) -> Result<TabascoEstimate<T>> {
    if let Some(b) = opts.beta_override {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!("beta override {b} outside [0, 1]")));
        }
    }
    let prepared = summarize(x, family, opts)?;
    let mut selection = select_k(&prepared.summary)?;
    if let Some(k) = opts.index_override {
        let pos = family
            .position_of(k)
            .ok_or_else(|| Error::InvalidArgument(format!("template index {k} is not in the family")))?;
        selection.chosen_index = pos;
        selection.chosen_value = k;
        selection.beta_hat = selection.per_k_beta[pos];
    }
    if let Some(b) = opts.beta_override {
        selection.beta_hat = b;
    }
    let template = family.templates()[selection.chosen_index].clone();
    let tapered = taper(template.w(), &prepared.scm)?;
    let eta_hat = prepared.summary.eta_hat;
    let sigma_hat = shrink_to_identity(&tapered, selection.beta_hat, eta_hat);
    Ok(TabascoEstimate {
        sigma_hat,
        selection,
        template,
        eta_hat,
        heuristic: x.regime().is_heuristic(),
        summary: prepared.summary,
    })
}

/// Regularized SCM: the estimator restricted to the untapered template.
pub fn rscm<T: Scalar>(x: &SampleSet<T>, opts: &TabascoOptions) -> Result<TabascoEstimate<T>> {
    tabasco(x, &TemplateFamily::singleton(TaperTemplate::all_ones(x.p())), opts)
}
