//! Sample statistics: SCM, spatial median, spatial sign covariance and
//! marginal kurtosis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{make_hermitian, Scalar};
use crate::sample::SampleSet;
use crate::templates::TaperTemplate;

/// Column means (the sample mean vector).
pub fn sample_mean<T: Scalar>(x: &DMatrix<T>) -> DVector<T> {
    let n = x.nrows() as f64;
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum().mul_re(1.0 / n)))
}

fn centered<T: Scalar>(x: &DMatrix<T>, center: &DVector<T>) -> DMatrix<T> {
    let mut out = x.clone();
    for (mut col, &c) in out.column_iter_mut().zip(center.iter()) {
        col.add_scalar_mut(-c);
    }
    out
}

/// Sample covariance matrix.
///
/// Unknown mean: `1/(n−1) Σ (x − x̄)(x − x̄)ᴴ`. Known (zero) mean: `1/n Σ x xᴴ`.
pub fn scm<T: Scalar>(x: &SampleSet<T>) -> DMatrix<T> {
    let n = x.n();
    let (xc, denom) = if x.mean_known() {
        (x.data().clone(), n as f64)
    } else {
        (centered(x.data(), &sample_mean(x.data())), (n - 1) as f64)
    };
    // XᴴX holds Σ conj(x_a) x_b; the outer-product convention needs its conjugate.
    let mut s = xc.ad_mul(&xc).conjugate();
    s.apply(|v| *v = v.mul_re(1.0 / denom));
    make_hermitian(&mut s);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MedianOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMedian<T: Scalar> {
    pub median: DVector<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Spatial median `argmin_μ Σ ‖x_i − μ‖` by Weiszfeld iterations started at
/// the sample mean. Points coinciding with the current iterate are left out
/// of the update. Iteration stops once the step is below
/// `tol · (‖μ‖ + mean distance to μ)`.
pub fn spatial_median<T: Scalar>(x: &DMatrix<T>, opts: MedianOptions) -> SpatialMedian<T> {
    let (n, p) = x.shape();
    let mut mu = sample_mean(x);
    let mut dist = vec![0.0; n];
    for iter in 1..=opts.max_iter {
        dist.iter_mut().for_each(|d| *d = 0.0);
        for (j, col) in x.column_iter().enumerate() {
            let m = mu[j];
            for (d, &v) in dist.iter_mut().zip(col.iter()) {
                *d += (v - m).abs_sq();
            }
        }
        for d in dist.iter_mut() {
            *d = d.sqrt();
        }
        // Tolerances are measured against the scale of the cloud so the
        // iteration is equivariant under rescaling of the data.
        let scale = mu.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt() + dist.iter().sum::<f64>() / n as f64;
        let floor = 1e-14 * scale;
        let weights: Vec<f64> = dist.iter().map(|&d| if d > floor { 1.0 / d } else { 0.0 }).collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return SpatialMedian { median: mu, iterations: iter, converged: true };
        }
        let next = DVector::from_iterator(
            p,
            x.column_iter().map(|col| {
                col.iter()
                    .zip(&weights)
                    .fold(T::zero(), |acc, (&v, &w)| acc + v.mul_re(w))
                    .mul_re(1.0 / total)
            }),
        );
        let step = (&next - &mu).iter().map(|v| v.abs_sq()).sum::<f64>().sqrt();
        mu = next;
        if step <= opts.tol * scale {
            return SpatialMedian { median: mu, iterations: iter, converged: true };
        }
    }
    log::warn!("spatial median did not converge in {} iterations", opts.max_iter);
    SpatialMedian { median: mu, iterations: opts.max_iter, converged: false }
}

/// Spatial sign covariance matrix together with the number of samples used.
#[derive(Debug, Clone, PartialEq)]
pub struct Sscm<T: Scalar> {
    /// `Λ̂ = (p/n) Σ u_i u_iᴴ / ‖u_i‖²`, trace `p`.
    pub lambda: DMatrix<T>,
    /// Rows with nonzero norm after centering.
    pub n_used: usize,
    pub median_converged: bool,
}

/// Spatial sign covariance, centered at the spatial median (or at zero when
/// the mean is known). Rows that vanish after centering are dropped.
pub fn sscm<T: Scalar>(x: &SampleSet<T>, opts: MedianOptions) -> Result<Sscm<T>> {
    let p = x.p();
    let (mut u, converged) = if x.mean_known() {
        (x.data().clone(), true)
    } else {
        let med = spatial_median(x.data(), opts);
        (centered(x.data(), &med.median), med.converged)
    };
    let norms: Vec<f64> = u.row_iter().map(|r| r.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt()).collect();
    let keep: Vec<usize> = (0..u.nrows()).filter(|&i| norms[i] > 0.0).collect();
    if keep.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "only {} nonzero rows remain after centering",
            keep.len()
        )));
    }
    if keep.len() < u.nrows() {
        u = u.select_rows(&keep);
    }
    for (mut row, &i) in u.row_iter_mut().zip(&keep) {
        let inv = 1.0 / norms[i];
        row.apply(|v| *v = v.mul_re(inv));
    }
    let n_used = keep.len();
    let mut lambda = u.ad_mul(&u).conjugate();
    let factor = p as f64 / n_used as f64;
    lambda.apply(|v| *v = v.mul_re(factor));
    make_hermitian(&mut lambda);
    Ok(Sscm { lambda, n_used, median_converged: converged })
}

/// Gap kept between `κ̂` and its lower bound.
pub const KURTOSIS_MARGIN: f64 = 1e-6;

/// Marginal kurtosis parameter `κ̂`.
///
/// Real data: average of bias-corrected per-variable excess kurtoses
/// divided by 3 (the bias correction applies when the mean is estimated,
/// `n ≥ 4`). Complex data: average of `m4/m2² − 2` divided by 2. The result
/// is clamped to just above the theoretical lower bound for the dimension.
pub fn kurtosis<T: Scalar>(x: &SampleSet<T>) -> Result<f64> {
    let (n, p) = (x.n(), x.p());
    let regime = x.regime();
    if !regime.mean_known() && !T::IS_COMPLEX && n < 4 {
        return Err(Error::InsufficientSamples { required: 4, found: n });
    }
    let nf = n as f64;
    let mut acc = 0.0;
    for (j, col) in x.data().column_iter().enumerate() {
        let center = if regime.mean_known() { T::zero() } else { col.sum().mul_re(1.0 / nf) };
        let (mut m2, mut m4) = (0.0, 0.0);
        for &v in col.iter() {
            let a = (v - center).abs_sq();
            m2 += a;
            m4 += a * a;
        }
        m2 /= nf;
        m4 /= nf;
        if !(m2 > 0.0) {
            return Err(Error::ZeroVariance { variable: j });
        }
        let ratio = m4 / (m2 * m2);
        acc += if T::IS_COMPLEX {
            (ratio - 2.0) / 2.0
        } else if regime.mean_known() {
            (ratio - 3.0) / 3.0
        } else {
            (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) * ((nf + 1.0) * (ratio - 3.0) + 6.0) / 3.0
        };
    }
    let kappa = acc / p as f64;
    Ok(kappa.max(regime.kurtosis_lower_bound(p) + KURTOSIS_MARGIN))
}

/// Scale and diagonal plug-ins `η̂ = tr(S)/p` and `θ̂_W = d_Sᵀ(W∘W)d_S / p`.
pub fn eta_theta_plugins<T: Scalar>(s: &DMatrix<T>, w: &TaperTemplate) -> Result<(f64, f64)> {
    let p = s.nrows() as f64;
    let d = crate::kernels::real_diagonal(s);
    let theta = crate::kernels::diag_quadratic(w.w(), &d)? / p;
    Ok((d.iter().sum::<f64>() / p, theta))
}
