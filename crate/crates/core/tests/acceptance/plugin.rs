use nalgebra::DMatrix;
use tabasco::kernels::{frob_norm_sq, shrink_to_identity, taper};
use tabasco::oracle::{oracle_beta, OracleInputs};
use tabasco::shrinkage::summarize;
use tabasco::simulate::{trial_rng, CovModel, Distribution, MeanSpec, Sampler};
use tabasco::{TabascoOptions, TaperTemplate, TemplateFamily};

use crate::Outcome;

const SEED: u64 = 515;
const MEAN: MeanSpec = MeanSpec::RandomGaussian { center: 10.0 };

pub fn plugin_tracks_oracle() -> Outcome {
    let (p, n, trials) = (100, 50, 2000);
    let sigma = CovModel::Ar1 { rho: 0.4 }.build(p);
    let family = TemplateFamily::banding(p, &[1, 2, 3, 4, 5]).unwrap();
    let sampler = Sampler::new(&sigma).unwrap();
    let opts = TabascoOptions::default();
    let norm = frob_norm_sq(&sigma);
    let m = family.len();
    let mut beta_sum = vec![0.0; m];
    let mut nmse_sum = vec![0.0; m];
    for trial in 0..trials {
        let mut rng = trial_rng(SEED, 5, trial);
        let x = sampler.sample(&mut rng, n, Distribution::Mvn, MEAN, false).unwrap();
        let prep = summarize(&x, &family, &opts).unwrap();
        for (pos, t) in family.iter().enumerate() {
            let b = prep.summary.beta_plugin(pos).unwrap().beta;
            let est = shrink_to_identity(&taper(t.w(), &prep.scm).unwrap(), b, prep.summary.eta_hat);
            beta_sum[pos] += b;
            nmse_sum[pos] += frob_norm_sq(&(est - &sigma)) / norm;
        }
    }
    let inputs = OracleInputs::new(sigma.clone(), 0.0, n, false).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for (pos, t) in family.iter().enumerate() {
        let o = oracle_beta(&inputs, t).unwrap();
        let beta_hat = beta_sum[pos] / trials as f64;
        let nmse = nmse_sum[pos] / trials as f64;
        let ok = (beta_hat - o.beta).abs() <= 0.05 && nmse <= 1.10 * o.nmse_opt;
        pass &= ok;
        notes.push(format!(
            "k={}: beta {beta_hat:.4}/{:.4} nmse {nmse:.5}/{:.5}{}",
            t.index_value(),
            o.beta,
            o.nmse_opt,
            if ok { "" } else { " !!" }
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

pub fn beta_grid() -> Outcome {
    let (p, n, trials) = (20, 50, 5000);
    let sigma = CovModel::Ar1 { rho: 0.5 }.build(p);
    let family = TemplateFamily::singleton(TaperTemplate::banding(p, 3).unwrap());
    let w = family.templates()[0].w().clone();
    let sampler = Sampler::new(&sigma).unwrap();
    let opts = TabascoOptions::default();
    // Σ̂(β) − Σ = β(W∘S − η̂I) + (η̂I − Σ), so the MSE is quadratic in β.
    let (mut qa, mut qb, mut qc, mut beta_sum) = (0.0, 0.0, 0.0, 0.0);
    for trial in 0..trials {
        let mut rng = trial_rng(SEED, 7, trial);
        let x = sampler.sample(&mut rng, n, Distribution::Mvn, MEAN, false).unwrap();
        let prep = summarize(&x, &family, &opts).unwrap();
        beta_sum += prep.summary.beta_plugin(0).unwrap().beta;
        let eta_i = DMatrix::identity(p, p) * prep.summary.eta_hat;
        let d = taper(&w, &prep.scm).unwrap() - &eta_i;
        let e = eta_i - &sigma;
        qa += frob_norm_sq(&d);
        qb += d.dot(&e);
        qc += frob_norm_sq(&e);
    }
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.005).collect();
    let mse = |b: f64| b * b * qa + 2.0 * b * qb + qc;
    let best = grid.iter().copied().min_by(|a, b| mse(*a).total_cmp(&mse(*b))).unwrap();
    let beta_hat = beta_sum / trials as f64;
    let gap = (beta_hat - best).abs();
    Outcome::new(gap <= 0.02, format!("mean plug-in beta {beta_hat:.4}, grid minimizer {best:.3}, gap {gap:.4}"))
}
