use tabasco::stap::{ace_statistic, empirical_auc, StapEstimator, StapScenario};
use tabasco::Complex64;

use crate::Outcome;

const SEED: u64 = 1010;
const RUNS: u64 = 100;

pub fn detection() -> Outcome {
    let with_target = StapScenario::default();
    let noise_only = StapScenario {
        scr_db: None,
        ..StapScenario::default()
    };
    let grid = with_target.grid();
    let mut pass = true;
    let mut notes = Vec::new();

    let mut in_range = true;
    let mut worst_coherent: f64 = 0.0;
    let mut hits = 0;
    let mut ranks = Vec::new();
    let mut h1 = [Vec::new(), Vec::new()];
    let mut h0 = [Vec::new(), Vec::new()];
    for run in 0..RUNS {
        for (slot, est) in [StapEstimator::Tabasco, StapEstimator::Scm].into_iter().enumerate() {
            let hit = with_target.run(est, SEED, run).unwrap();
            let miss = noise_only.run(est, SEED, run).unwrap();
            in_range &= hit.map.statistic.iter().chain(&miss.map.statistic).all(|s| (0.0..=1.0).contains(s));
            h1[slot].push(hit.map.statistic[hit.target_cell]);
            h0[slot].push(miss.map.statistic[miss.target_cell]);
            if est == StapEstimator::Tabasco {
                hits += usize::from(hit.map.in_top_fraction(hit.target_cell, 0.01));
                ranks.push(hit.map.rank_of(hit.target_cell));
            }
        }
        if run < 10 {
            // A snapshot proportional to the steering vector is perfectly coherent
            // under any positive definite estimate.
            let sigma_hat = estimate_for(&with_target, run);
            let th = grid.thetas[(run as usize * 3) % grid.thetas.len()];
            let v = grid.velocities[(run as usize * 7) % grid.velocities.len()];
            let p = with_target.radar.steering_vector(th, v);
            let x0 = &p * Complex64::new(-2.5, 0.7 + run as f64);
            worst_coherent = worst_coherent.max((ace_statistic(&sigma_hat, &p, &x0).unwrap() - 1.0).abs());
        }
    }
    pass &= in_range;
    notes.push(format!("ACE within [0, 1]: {in_range}"));
    let coherent_ok = worst_coherent <= 1e-10;
    pass &= coherent_ok;
    notes.push(format!("max |ACE - 1| for coherent snapshot {worst_coherent:.1e}"));
    let top_ok = hits * 100 >= 90 * RUNS as usize;
    pass &= top_ok;
    ranks.sort_unstable();
    notes.push(format!("target in top 1% in {hits}/{RUNS} runs (rank quartiles {} {} {})", ranks[25], ranks[50], ranks[75]));
    let auc_t = empirical_auc(&h1[0], &h0[0]);
    let auc_s = empirical_auc(&h1[1], &h0[1]);
    pass &= auc_t >= auc_s;
    notes.push(format!("AUC tabasco {auc_t:.4} vs scm {auc_s:.4}"));
    Outcome::new(pass, notes.join("; "))
}

fn estimate_for(scenario: &StapScenario, run: u64) -> nalgebra::DMatrix<Complex64> {
    use tabasco::simulate::{trial_rng, Distribution, MeanSpec, Sampler};
    use tabasco::{tabasco, TabascoOptions, TemplateFamily};
    let mut rng = trial_rng(SEED, 99, run);
    let sampler = Sampler::new(&scenario.radar.interference_covariance(scenario.patches)).unwrap();
    let x = sampler.sample(&mut rng, scenario.n, Distribution::Mvn, MeanSpec::Zero, false).unwrap();
    let family = TemplateFamily::stap(scenario.radar.pulses, scenario.radar.sensors, &scenario.null_widths).unwrap();
    tabasco(&x, &family, &TabascoOptions::default()).unwrap().sigma_hat
}
