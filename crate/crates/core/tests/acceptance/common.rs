use nalgebra::DMatrix;
use rand::Rng;
use tabasco::kernels::{make_hermitian, Scalar};
use tabasco::Complex64;

pub fn within_rel(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol * target.abs()
}

/// Mean and standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub trait RandomEntry: Scalar {
    fn random_entry<R: Rng>(rng: &mut R) -> Self;
}

impl RandomEntry for f64 {
    fn random_entry<R: Rng>(rng: &mut R) -> Self {
        rng.random_range(-1.0..1.0)
    }
}

impl RandomEntry for Complex64 {
    fn random_entry<R: Rng>(rng: &mut R) -> Self {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }
}

/// Random positive definite matrix `AAᴴ/p + δI` with decaying off-diagonals.
pub fn random_cov<T: RandomEntry, R: Rng>(p: usize, rng: &mut R) -> DMatrix<T> {
    let decay: f64 = rng.random_range(0.2..0.9);
    let a = DMatrix::from_fn(p, p, |i, j| T::random_entry(rng).mul_re(decay.powi(i.abs_diff(j) as i32)));
    let mut s = a.ad_mul(&a).map(|v| v.mul_re(1.0 / p as f64));
    for i in 0..p {
        s[(i, i)] += T::from_re(rng.random_range(0.05..0.5));
    }
    make_hermitian(&mut s);
    s
}

/// `‖W∘A‖²` and `Σ_ij w_ij² a_ii a_jj` by explicit double loops.
pub fn brute_stats<T: Scalar>(w: &DMatrix<f64>, a: &DMatrix<T>) -> (f64, f64) {
    let p = a.nrows();
    let (mut frob, mut diag) = (0.0, 0.0);
    for i in 0..p {
        for j in 0..p {
            frob += w[(i, j)].powi(2) * a[(i, j)].abs_sq();
            diag += w[(i, j)].powi(2) * a[(i, i)].re() * a[(j, j)].re();
        }
    }
    (frob, diag)
}

/// SCM computed directly from the rows.
pub fn direct_scm<T: Scalar>(x: &DMatrix<T>, mean_known: bool) -> DMatrix<T> {
    let (n, p) = x.shape();
    let mut xc = x.clone();
    if !mean_known {
        for j in 0..p {
            let m = x.column(j).iter().fold(T::zero(), |a, &v| a + v).mul_re(1.0 / n as f64);
            xc.column_mut(j).apply(|v| *v -= m);
        }
    }
    let denom = if mean_known { n as f64 } else { n as f64 - 1.0 };
    DMatrix::from_fn(p, p, |a, b| {
        (0..n).fold(T::zero(), |acc, i| acc + xc[(i, a)] * xc[(i, b)].conj()).mul_re(1.0 / denom)
    })
}
