use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use tabasco::simulate::sampling::NormalDraw;
use tabasco::simulate::{trial_rng, Distribution, MeanSpec, Sampler};
use tabasco::{rscm, tabasco, Complex64, FamilySpec, Scalar, SphericityMethod, TabascoOptions, TemplateFamily};

use crate::common::{direct_scm, random_cov, RandomEntry};
use crate::Outcome;

const TOL: f64 = 1e-10;

fn max_abs_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (*x - *y).abs_sq().sqrt()).fold(0.0, f64::max)
}

fn max_abs<T: Scalar>(a: &DMatrix<T>) -> f64 {
    a.iter().map(|x| x.abs_sq().sqrt()).fold(0.0, f64::max)
}

fn admissible(family: &TemplateFamily) -> bool {
    family.iter().all(|t| {
        let (w, v) = (t.w(), t.v());
        let p = w.nrows();
        (0..p).all(|i| {
            w[(i, i)] == 1.0
                && (0..p).all(|j| w[(i, j)] == w[(j, i)] && w[(i, j)] >= 0.0 && (v[(i, j)] - w[(i, j)].sqrt()).abs() <= 1e-15)
        })
    })
}

fn instance<T: RandomEntry + NormalDraw>(stream: u64, trial: u64, failures: &mut Vec<String>) {
    let mut rng = trial_rng(808, stream, trial);
    let p = rng.random_range(14..=30);
    let n = rng.random_range(5..=60);
    let mean_known = rng.random_bool(0.5);
    let sigma = random_cov::<T, _>(p, &mut rng);
    let dist = if rng.random_bool(0.5) { Distribution::Mvn } else { Distribution::Mvt { nu: 6.0 } };
    let mean = if mean_known { MeanSpec::Zero } else { MeanSpec::RandomGaussian { center: 3.0 } };
    let x = Sampler::new(&sigma).unwrap().sample(&mut rng, n, dist, mean, mean_known).unwrap();
    let spec = if rng.random_bool(0.5) { "banding:1..10,p-3..p" } else { "minimax:1..8,p" };
    let family = FamilySpec::parse(spec).unwrap().build(p).unwrap();
    let ell2_ok = !(T::IS_COMPLEX && mean_known);
    let opts = TabascoOptions {
        sphericity: if ell2_ok && rng.random_bool(0.5) { SphericityMethod::Ell2 } else { SphericityMethod::Ell1 },
        gaussian: rng.random_bool(0.3),
        ..TabascoOptions::default()
    };
    let tag = format!("stream {stream} trial {trial}");
    let est = match tabasco(&x, &family, &opts) {
        Ok(e) => e,
        Err(e) => return failures.push(format!("{tag}: {e}")),
    };

    if !admissible(&family) {
        failures.push(format!("{tag}: inadmissible template"));
    }
    let s = direct_scm(x.data(), mean_known);
    let tr_s: f64 = (0..p).map(|i| s[(i, i)].re()).sum();
    let tr_hat: f64 = (0..p).map(|i| est.sigma_hat[(i, i)].re()).sum();
    if (tr_s - tr_hat).abs() > TOL * tr_s {
        failures.push(format!("{tag}: trace {tr_hat} vs {tr_s}"));
    }
    let sel = &est.selection;
    if !sel.per_k_beta.iter().chain([&sel.beta_hat]).all(|b| (0.0..=1.0).contains(b)) {
        failures.push(format!("{tag}: beta outside [0, 1]"));
    }
    let sum = &est.summary;
    let pf = p as f64;
    let gammas = sum.records.iter().flat_map(|r| [r.gamma_hat_w, r.gamma_hat_v]).chain([sum.gamma_hat]);
    if !gammas.clone().all(|g| (1.0..=pf).contains(&g)) {
        failures.push(format!("{tag}: sphericity outside [1, p]: {:?}", gammas.collect::<Vec<_>>()));
    }

    // Scale equivariance of the selection.
    let c = 10f64.powf(rng.random_range(-3.0..3.0));
    let scaled = tabasco(&x.scaled(c), &family, &opts).unwrap();
    if scaled.selection.chosen_index != sel.chosen_index || (scaled.selection.beta_hat - sel.beta_hat).abs() > TOL {
        failures.push(format!(
            "{tag}: scaling by {c} moved (k, beta) from ({}, {}) to ({}, {})",
            sel.chosen_value, sel.beta_hat, scaled.selection.chosen_value, scaled.selection.beta_hat
        ));
    }
    let rescaled = scaled.sigma_hat.map(|v| v.mul_re(1.0 / (c * c)));
    if max_abs_diff(&rescaled, &est.sigma_hat) > TOL * max_abs(&est.sigma_hat) {
        failures.push(format!("{tag}: estimate not scale equivariant"));
    }

    // Permutation equivariance without tapering.
    let base = rscm(&x, &opts).unwrap();
    let mut perm: Vec<usize> = (0..p).collect();
    perm.shuffle(&mut rng);
    let moved = rscm(&x.permuted(&perm).unwrap(), &opts).unwrap();
    let expected = DMatrix::from_fn(p, p, |i, j| base.sigma_hat[(perm[i], perm[j])]);
    if max_abs_diff(&moved.sigma_hat, &expected) > TOL * max_abs(&expected)
        || (moved.selection.beta_hat - base.selection.beta_hat).abs() > TOL
    {
        failures.push(format!("{tag}: untapered estimate not permutation equivariant"));
    }
}

pub fn invariants() -> Outcome {
    let mut failures = Vec::new();
    let count = 150;
    for trial in 0..count {
        instance::<f64>(1, trial, &mut failures);
        instance::<Complex64>(2, trial, &mut failures);
    }
    let mut summary = format!("{} random instances, {} violations", 2 * count, failures.len());
    if let Some(f) = failures.first() {
        summary.push_str(&format!(", first: {f}"));
    }
    Outcome::new(failures.is_empty(), summary)
}
