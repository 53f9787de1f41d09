use nalgebra::DMatrix;
use tabasco::simulate::sampling::NormalDraw;
use tabasco::simulate::{trial_rng, Distribution, Sampler};
use tabasco::sphericity::an_bn;
use tabasco::{Complex64, Regime, TaperTemplate};

use crate::common::{brute_stats, direct_scm, mean_se, random_cov, RandomEntry};
use crate::Outcome;

const P: usize = 5;
const N: usize = 10;
const TRIALS: u64 = 200_000;

struct Case {
    name: &'static str,
    complex: bool,
    mean_known: bool,
    dist: Distribution,
}

/// Per-trial statistics for one template:
/// `‖W∘S‖²`, `tr((D_S W)²)`, `tr(S)²`, `‖S‖²`, `ϑ̂_W`.
const STATS: [&str; 5] = ["frob_w", "diag_w", "trace_sq", "frob", "theta_unbiased"];

fn run_case<T: RandomEntry + NormalDraw>(case: &Case, stream: u64, templates: &[TaperTemplate], notes: &mut Vec<String>) -> bool {
    let mut rng = trial_rng(606, stream, u64::MAX >> 24);
    let sigma = random_cov::<T, _>(P, &mut rng);
    let sampler = Sampler::new(&sigma).unwrap();
    let kappa = case.dist.kappa();
    let (n, p) = (N as f64, P as f64);
    let (t1, t2) = if case.mean_known { ((1.0 + kappa) / n, kappa / n) } else { (1.0 / (n - 1.0) + kappa / n, kappa / n) };
    let c = if case.complex { 1.0 } else { 2.0 };
    let a_n = t1 / (1.0 + t2);
    let b_n = 1.0 / (1.0 + t2 + (c - 1.0) * t1 - a_n * c * t1);
    let regime = match (case.complex, case.mean_known) {
        (false, false) => Regime::RealUnknownMean,
        (false, true) => Regime::RealKnownMean,
        (true, false) => Regime::ComplexUnknownMean,
        (true, true) => Regime::ComplexKnownMean,
    };
    let (lib_a, lib_b) = an_bn(regime, N, kappa).unwrap();
    let mut pass = (lib_a - a_n).abs() <= 1e-12 * a_n && (lib_b - b_n).abs() <= 1e-12 * b_n;
    if !pass {
        notes.push(format!("{}: library constants ({lib_a}, {lib_b}) vs ({a_n}, {b_n}) !!", case.name));
    }

    let ones = DMatrix::from_element(P, P, 1.0);
    let (fs, _) = brute_stats(&ones, &sigma);
    let tr: f64 = (0..P).map(|i| sigma[(i, i)].re()).sum();
    let mut samples: Vec<Vec<Vec<f64>>> = vec![vec![Vec::with_capacity(TRIALS as usize); STATS.len()]; templates.len()];
    for trial in 0..TRIALS {
        let mut rng = trial_rng(606, stream, trial);
        let x = sampler.draw(&mut rng, N, case.dist).unwrap();
        let s = direct_scm(&x, case.mean_known);
        let (frob, _) = brute_stats(&ones, &s);
        let trace: f64 = (0..P).map(|i| s[(i, i)].re()).sum();
        for (ti, t) in templates.iter().enumerate() {
            let (fw, dw) = brute_stats(t.w(), &s);
            let row = [fw, dw, trace * trace, frob, b_n * (fw / p - a_n * dw / p)];
            for (k, v) in row.into_iter().enumerate() {
                samples[ti][k].push(v);
            }
        }
    }
    for (ti, t) in templates.iter().enumerate() {
        let (fw, dw) = brute_stats(t.w(), &sigma);
        let expected = [
            (1.0 + t2 + (c - 1.0) * t1) * fw + t1 * dw,
            c * t1 * fw + (1.0 + t2) * dw,
            c * t1 * fs + (1.0 + t2) * tr * tr,
            (1.0 + t2 + (c - 1.0) * t1) * fs + t1 * tr * tr,
            fw / p,
        ];
        let mut worst: f64 = 0.0;
        for (k, name) in STATS.iter().enumerate() {
            let (m, se) = mean_se(&samples[ti][k]);
            let z = (m - expected[k]) / se;
            worst = worst.max(z.abs());
            if z.abs() > 4.0 {
                pass = false;
                notes.push(format!("{} {} {name}: mc {m:.5} vs {:.5} (z = {z:.2}) !!", case.name, t.label(), expected[k]));
            }
        }
        notes.push(format!("{} {} max|z| {worst:.2}", case.name, t.label()));
    }
    pass
}

pub fn moment_identities() -> Outcome {
    let templates = [TaperTemplate::banding(P, 2).unwrap(), TaperTemplate::minimax(P, 3).unwrap()];
    let mut notes = Vec::new();
    let mut pass = true;
    let cases = [
        Case { name: "real-gauss", complex: false, mean_known: false, dist: Distribution::Mvn },
        Case { name: "real-gauss-known-mean", complex: false, mean_known: true, dist: Distribution::Mvn },
        Case { name: "real-t5", complex: false, mean_known: false, dist: Distribution::Mvt { nu: 5.0 } },
    ];
    for (i, case) in cases.iter().enumerate() {
        pass &= run_case::<f64>(case, i as u64, &templates, &mut notes);
    }
    let complex = Case { name: "complex-gauss", complex: true, mean_known: false, dist: Distribution::Mvn };
    pass &= run_case::<Complex64>(&complex, 10, &templates, &mut notes);
    Outcome::new(pass, notes.join("; "))
}
