//! Competing estimators used in the simulations.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::kernels::{frob_norm_sq, shrink_to_identity, taper, trace_re, Scalar};
use crate::moments::{sample_mean, scm};
use crate::sample::SampleSet;
use crate::templates::TaperTemplate;

#[derive(Debug, Clone)]
pub struct LwEstimate<T: Scalar> {
    pub sigma_hat: DMatrix<T>,
    pub beta: f64,
}

/// Ledoit–Wolf shrinkage towards `(tr(S)/p) I`.
///
/// As in the original estimator, `S` here is the `1/n`-normalized covariance
/// of the centered data. `m = tr(S)/p`, `d² = ‖S − mI‖²/p`, `b̄² = n⁻² Σ ‖x_i x_iᴴ − S‖²/p`,
/// `b² = min(b̄², d²)` and `β = 1 − b²/d²`.
pub fn lw_estimator<T: Scalar>(x: &SampleSet<T>) -> LwEstimate<T> {
    let (n, p) = (x.n(), x.p());
    let mut s = scm(x);
    if !x.mean_known() {
        s.apply(|v| *v = v.mul_re((n - 1) as f64 / n as f64));
    }
    let pf = p as f64;
    let m = trace_re(&s) / pf;
    let s_frob = frob_norm_sq(&s);
    let d2 = (s_frob - 2.0 * m * trace_re(&s) + pf * m * m) / pf;
    let xc = if x.mean_known() {
        x.data().clone()
    } else {
        let mu = sample_mean(x.data());
        let mut xc = x.data().clone();
        for (mut col, &c) in xc.column_iter_mut().zip(mu.iter()) {
            col.add_scalar_mut(-c);
        }
        xc
    };
    // ‖x xᴴ − S‖² = ‖x‖⁴ − 2 xᴴ S x + ‖S‖²; row i of X Sᵀ is (S x_i)ᵀ.
    let sx = &xc * s.transpose();
    let mut bbar2 = 0.0;
    for i in 0..n {
        let xi = xc.row(i);
        let norm2: f64 = xi.iter().map(|v| v.abs_sq()).sum();
        let quad: f64 = xi.iter().zip(sx.row(i).iter()).map(|(a, b)| (a.conj() * *b).re()).sum();
        bbar2 += norm2 * norm2 - 2.0 * quad + s_frob;
    }
    bbar2 /= (n * n) as f64 * pf;
    let beta = if d2 > 0.0 { 1.0 - bbar2.min(d2) / d2 } else { 0.0 };
    LwEstimate {
        sigma_hat: shrink_to_identity(&s, beta, m),
        beta,
    }
}

/// `⌊n^{1/(2(α+1))}⌋`, the minimax-rate bandwidth for decay parameter `α`.
pub fn mnmx_bandwidth(n: usize, alpha: f64) -> usize {
    let k = (n as f64).powf(1.0 / (2.0 * (alpha + 1.0)));
    // Guard against exact powers landing just below an integer.
    ((k + 1e-9).floor() as usize).max(1)
}

/// Tapered SCM with the minimax taper at the oracle bandwidth. Bandwidths
/// of `p` or more give the untapered SCM.
pub fn mnmx_taper_estimator<T: Scalar>(x: &SampleSet<T>, alpha: f64) -> Result<(DMatrix<T>, usize)> {
    let p = x.p();
    let k = mnmx_bandwidth(x.n(), alpha);
    let template = if k >= p { TaperTemplate::all_ones(p) } else { TaperTemplate::minimax(p, k)? };
    Ok((taper(template.w(), &scm(x))?, k))
}
