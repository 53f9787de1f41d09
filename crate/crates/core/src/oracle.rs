//! Population-level quantities for a known covariance `Σ`, kurtosis `κ` and
//! sample size `n`: expected statistics of the (tapered) SCM, the optimal
//! shrinkage intensity, the MSE curve in `β` and the optimal template.
//!
//! These are the ground truth the plug-in estimator is tested against.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{is_hermitian, Scalar};
use crate::sample::Regime;
use crate::shrinkage::{EllipticalSummary, TemplateRecord};
use crate::templates::{HermitianSummary, TaperTemplate, TemplateFamily, TemplateMoments};

/// Relative tolerance for the agreement of the closed forms of `β₀`.
pub const AGREEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OracleInputs<T: Scalar> {
    sigma: DMatrix<T>,
    summary: HermitianSummary,
    kappa: f64,
    n: usize,
    regime: Regime,
}

impl<T: Scalar> OracleInputs<T> {
    pub fn new(sigma: DMatrix<T>, kappa: f64, n: usize, mean_known: bool) -> Result<Self> {
        let p = sigma.nrows();
        if !sigma.is_square() || p < 2 {
            return Err(Error::DimensionMismatch {
                context: "oracle covariance (square, p >= 2)",
                expected: p,
                found: sigma.ncols(),
            });
        }
        if !is_hermitian(&sigma) {
            return Err(Error::InvalidArgument("oracle covariance must be exactly Hermitian".into()));
        }
        crate::kernels::cholesky(&sigma)?;
        let regime = Regime::of::<T>(mean_known);
        let bound = regime.kurtosis_lower_bound(p);
        if !(kappa > bound) || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa {kappa} not above the lower bound {bound}")));
        }
        let min_n = if mean_known { 1 } else { 2 };
        if n < min_n {
            return Err(Error::InsufficientSamples { required: min_n, found: n });
        }
        Ok(Self {
            summary: HermitianSummary::new(&sigma),
            sigma,
            kappa,
            n,
            regime,
        })
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    pub fn p(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn taus(&self) -> (f64, f64) {
        self.regime.taus(self.n, self.kappa)
    }

    pub fn trace(&self) -> f64 {
        self.summary.trace()
    }

    /// `η = tr(Σ)/p`
    pub fn eta(&self) -> f64 {
        self.trace() / self.p() as f64
    }

    /// `‖Σ‖_F²`
    pub fn frob(&self) -> f64 {
        self.summary.frob()
    }

    /// `γ = p‖Σ‖²/tr(Σ)²`
    pub fn gamma(&self) -> f64 {
        let tr = self.trace();
        self.p() as f64 * self.frob() / (tr * tr)
    }

    /// `‖W∘Σ‖²`, `tr((D_Σ W)²)` and the `V` counterparts.
    pub fn template_moments(&self, t: &TaperTemplate) -> Result<TemplateMoments> {
        check_dim(t, self.p())?;
        Ok(t.moments(&self.summary))
    }
}

fn check_dim(t: &TaperTemplate, p: usize) -> Result<()> {
    if t.p() != p {
        return Err(Error::DimensionMismatch {
            context: "template vs covariance",
            expected: p,
            found: t.p(),
        });
    }
    Ok(())
}

/// Expected statistics of the tapered SCM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaperedScmMoments {
    /// `E‖W∘S‖²`
    pub e_frob: f64,
    /// `E tr((D_S W)²)`
    pub e_diag: f64,
    /// `E tr(S)²`
    pub e_trace_sq: f64,
}

/// With `c` = 2 for real and 1 for complex data:
///
/// * `E‖W∘S‖² = (1 + τ₂ + (c−1)τ₁)‖W∘Σ‖² + τ₁ tr((D_Σ W)²)`
/// * `E tr((D_S W)²) = cτ₁‖W∘Σ‖² + (1 + τ₂) tr((D_Σ W)²)`
/// * `E tr(S)² = cτ₁‖Σ‖² + (1 + τ₂) tr(Σ)²`
pub fn tapered_scm_moments<T: Scalar>(inputs: &OracleInputs<T>, t: &TaperTemplate) -> Result<TaperedScmMoments> {
    let m = inputs.template_moments(t)?;
    Ok(moments_from_parts(inputs, &m))
}

fn moments_from_parts<T: Scalar>(inputs: &OracleInputs<T>, m: &TemplateMoments) -> TaperedScmMoments {
    let (t1, t2) = inputs.taus();
    let c = inputs.regime.diag_multiplicity();
    let tr = inputs.trace();
    TaperedScmMoments {
        e_frob: (1.0 + t2 + (c - 1.0) * t1) * m.frob_w + t1 * m.diag_w,
        e_diag: c * t1 * m.frob_w + (1.0 + t2) * m.diag_w,
        e_trace_sq: c * t1 * inputs.frob() + (1.0 + t2) * tr * tr,
    }
}

/// Optimal shrinkage for one template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleBeta {
    pub index_value: f64,
    /// `β₀ = ‖V∘Σ − ηI‖² / E‖W∘S − η̂I‖²`
    pub beta: f64,
    /// `β₀ = p(γ_V − 1)η² / (E‖W∘S‖² − E tr(S)²/p)`
    pub beta_sphericity: f64,
    /// `β₀ = (γ_V − 1) / (γ NMSE(W∘S) + 2γ_V − γ − E[η̂²]/η²)`
    pub beta_nmse: f64,
    /// Minimum of the MSE curve.
    pub mse_opt: f64,
    /// `mse_opt / ‖Σ‖²`
    pub nmse_opt: f64,
    pub gamma_w: f64,
    pub gamma_v: f64,
    /// `β₀ (1 − γ_V)`, the template selection criterion.
    pub objective: f64,
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT_TOL * a.abs().max(b.abs()) + 1e-14
}

/// Optimal `β₀` by three algebraically distinct expressions (checked to agree)
/// together with the attained MSE.
pub fn oracle_beta<T: Scalar>(inputs: &OracleInputs<T>, t: &TaperTemplate) -> Result<OracleBeta> {
    let m = inputs.template_moments(t)?;
    let e = moments_from_parts(inputs, &m);
    let p = inputs.p() as f64;
    let eta = inputs.eta();
    let frob = inputs.frob();
    let gamma = inputs.gamma();
    let e_eta_sq = e.e_trace_sq / (p * p);

    // ‖V∘Σ − ηI‖²: V has a unit diagonal so tr(V∘Σ) = tr(Σ).
    let num = m.frob_v - 2.0 * eta * inputs.trace() + p * eta * eta;
    // E‖W∘S − η̂I‖² with tr(W∘S) = tr(S).
    let den = e.e_frob - 2.0 * e.e_trace_sq / p + p * e_eta_sq;
    let beta = num / den;

    let gamma_v = m.frob_v / (p * eta * eta);
    let gamma_w = m.frob_w / (p * eta * eta);
    let beta_sphericity = p * (gamma_v - 1.0) * eta * eta / (e.e_frob - e.e_trace_sq / p);

    let nmse_taper = (e.e_frob + frob - 2.0 * m.frob_v) / frob;
    let beta_nmse = (gamma_v - 1.0) / (gamma * nmse_taper + 2.0 * gamma_v - gamma - e_eta_sq / (eta * eta));

    if !(agree(beta, beta_sphericity) && agree(beta, beta_nmse)) {
        return Err(Error::Inconsistent(format!(
            "closed forms of beta disagree for {}: {beta}, {beta_sphericity}, {beta_nmse}",
            t.label()
        )));
    }
    // Guaranteed for 0/1 templates; smooth tapers can push β₀ above 1.
    if beta < -1e-12 || (t.is_binary() && beta > 1.0 + 1e-12) {
        return Err(Error::Inconsistent(format!("beta = {beta} outside its admissible range for {}", t.label())));
    }

    let mse_opt = (e.e_trace_sq - inputs.trace().powi(2)) / p + frob - m.frob_v + (1.0 - beta) * num;
    Ok(OracleBeta {
        index_value: t.index_value(),
        beta,
        beta_sphericity,
        beta_nmse,
        mse_opt,
        nmse_opt: mse_opt / frob,
        gamma_w,
        gamma_v,
        objective: beta * (1.0 - gamma_v),
    })
}

/// `MSE(β) = β²a₁ + (1−β)²a₂ + 2β(1−β)a₃` for one template.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCurve {
    pub index_value: f64,
    pub betas: Vec<f64>,
    pub l_values: Vec<f64>,
    /// `a₁ = MSE(W∘S)`
    pub a1: f64,
    /// `a₂ = MSE(η̂ I)`
    pub a2: f64,
    pub a3: f64,
    pub beta_opt: f64,
    pub mse_opt: f64,
}

impl OracleCurve {
    pub fn eval(&self, beta: f64) -> f64 {
        beta * beta * self.a1 + (1.0 - beta).powi(2) * self.a2 + 2.0 * beta * (1.0 - beta) * self.a3
    }
}

pub fn oracle_l_curve<T: Scalar>(inputs: &OracleInputs<T>, t: &TaperTemplate, betas: &[f64]) -> Result<OracleCurve> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("beta grid is empty".into()));
    }
    let m = inputs.template_moments(t)?;
    let e = moments_from_parts(inputs, &m);
    let p = inputs.p() as f64;
    let eta = inputs.eta();
    let frob = inputs.frob();
    let a3_tilde = e.e_trace_sq / p - eta * eta * p;
    let a1 = e.e_frob + frob - 2.0 * m.frob_v;
    let a2 = a3_tilde + frob - p * eta * eta;
    let a3 = frob - m.frob_v + a3_tilde;
    let beta_opt = (a2 - a3) / ((a1 - a3) + (a2 - a3));
    let mut curve = OracleCurve {
        index_value: t.index_value(),
        betas: betas.to_vec(),
        l_values: Vec::new(),
        a1,
        a2,
        a3,
        beta_opt,
        mse_opt: 0.0,
    };
    curve.mse_opt = curve.eval(beta_opt);
    curve.l_values = betas.iter().map(|&b| curve.eval(b)).collect();
    Ok(curve)
}

/// Optimal template of a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSelection {
    pub chosen_index: usize,
    pub per_template: Vec<OracleBeta>,
}

/// Position of the smallest value; values within `tol` of the minimum count
/// as ties and the earliest one wins.
fn argmin_with_ties(values: &[f64], tol: f64) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values.iter().position(|&v| v <= min + tol).unwrap_or(0)
}

/// Template minimizing `β₀(k)(1 − γ_V(k))`, checked against the template
/// minimizing the attained MSE.
pub fn oracle_k<T: Scalar>(inputs: &OracleInputs<T>, family: &TemplateFamily) -> Result<OracleSelection> {
    let per_template: Vec<OracleBeta> = family.iter().map(|t| oracle_beta(inputs, t)).collect::<Result<_>>()?;
    let p = inputs.p() as f64;
    let scale = p * inputs.eta().powi(2);
    let mse: Vec<f64> = per_template.iter().map(|o| o.mse_opt).collect();
    // The objective is the MSE up to an additive constant and the factor pη².
    let objective: Vec<f64> = per_template.iter().map(|o| o.objective * scale).collect();
    let tol = 1e-10 * mse.iter().copied().fold(0.0, f64::max);
    let by_objective = argmin_with_ties(&objective, tol);
    let by_mse = argmin_with_ties(&mse, tol);
    if by_objective != by_mse {
        return Err(Error::Inconsistent(format!(
            "objective selects member {by_objective} but the MSE selects member {by_mse}"
        )));
    }
    Ok(OracleSelection {
        chosen_index: by_objective,
        per_template,
    })
}

/// The summary the plug-in estimator would see if every statistic were
/// replaced by its population value.
pub fn true_summary<T: Scalar>(inputs: &OracleInputs<T>, family: &TemplateFamily) -> Result<EllipticalSummary> {
    let p = inputs.p() as f64;
    let eta = inputs.eta();
    let records = family
        .iter()
        .map(|t| {
            let m = inputs.template_moments(t)?;
            Ok(TemplateRecord {
                index_value: t.index_value(),
                theta_hat_w: m.diag_w / p,
                gamma_hat_w: m.frob_w / (p * eta * eta),
                gamma_hat_v: m.frob_v / (p * eta * eta),
            })
        })
        .collect::<Result<_>>()?;
    Ok(EllipticalSummary {
        eta_hat: eta,
        kappa_hat: inputs.kappa,
        gamma_hat: inputs.gamma(),
        records,
        n: inputs.n,
        p: inputs.p(),
        regime: inputs.regime,
    })
}
