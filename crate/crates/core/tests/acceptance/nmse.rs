use tabasco::simulate::{run_campaign, CampaignConfig, CampaignReport, CovModel, Distribution, EstimatorSpec, MeanSpec, NamedEstimator};
use tabasco::{FamilySpec, TabascoOptions};

use crate::common::within_rel;
use crate::Outcome;

const SEED: u64 = 20_240_601;

fn tabasco_banding() -> NamedEstimator {
    NamedEstimator::new(EstimatorSpec::Tabasco {
        family: FamilySpec::banding_default(),
        options: TabascoOptions::default(),
    })
}

fn campaign(model: CovModel, p: usize, ns: Vec<usize>, trials: usize, dist: Distribution, est: Vec<NamedEstimator>) -> CampaignReport {
    let cfg = CampaignConfig {
        model,
        p,
        ns,
        trials,
        seed: SEED,
        distribution: dist,
        mean: MeanSpec::RandomGaussian { center: 10.0 },
        mean_known: false,
        estimators: est,
    };
    run_campaign(&cfg).expect("campaign runs")
}

fn nmse(report: &CampaignReport, est: &str, n: usize) -> f64 {
    let row = report.get(est, n).expect("row present");
    assert_eq!(row.failures, 0, "{est} failed on some trials at n = {n}");
    row.nmse_mean
}

struct Tally {
    pass: bool,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { pass: true, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, note: String) {
        self.pass &= ok;
        self.notes.push(if ok { note } else { format!("{note} !!") });
    }

    fn target(&mut self, what: &str, value: f64, target: f64, tol: f64) {
        self.check(within_rel(value, target, tol), format!("{what} {value:.5} (target {target} ±{}%)", tol * 100.0));
    }

    fn finish(self) -> Outcome {
        Outcome::new(self.pass, self.notes.join("; "))
    }
}

pub fn mvn_ar1_levels() -> Outcome {
    let mut t = Tally::new();
    let est = vec![tabasco_banding(), NamedEstimator::new(EstimatorSpec::Lwe)];
    let r = campaign(CovModel::Ar1 { rho: 0.4 }, 100, vec![100], 1000, Distribution::Mvn, est);
    t.target("tabasco rho=0.4 n=100", nmse(&r, "tabasco", 100), 0.0465, 0.15);
    t.target("lwe rho=0.4 n=100", nmse(&r, "lwe", 100), 0.201, 0.15);
    let r = campaign(CovModel::Ar1 { rho: 0.2 }, 100, vec![25], 1000, Distribution::Mvn, vec![tabasco_banding()]);
    t.target("tabasco rho=0.2 n=25", nmse(&r, "tabasco", 25), 0.0740, 0.15);
    t.finish()
}

pub fn mvt_ar1_ordering() -> Outcome {
    let mut t = Tally::new();
    let ns: Vec<usize> = (25..=115).step_by(15).collect();
    let est = vec![tabasco_banding(), NamedEstimator::new(EstimatorSpec::Lwe)];
    let r = campaign(CovModel::Ar1 { rho: 0.2 }, 100, ns.clone(), 1000, Distribution::Mvt { nu: 5.0 }, est);
    t.target("tabasco n=100", nmse(&r, "tabasco", 100), 0.0607, 0.20);
    for n in ns {
        let (a, b) = (nmse(&r, "tabasco", n), nmse(&r, "lwe", n));
        t.check(a < b, format!("n={n} {a:.4}<{b:.4}"));
    }
    t.finish()
}

pub fn poly_decay_vs_mnmx() -> Outcome {
    let mut t = Tally::new();
    let est = vec![
        NamedEstimator::new(EstimatorSpec::Tabasco {
            family: FamilySpec::minimax_default(),
            options: TabascoOptions::default(),
        }),
        NamedEstimator::new(EstimatorSpec::Mnmx { alpha: 0.1 }),
    ];
    let model = CovModel::PolyDecay { rho: 0.6, alpha: 0.1 };
    let r = campaign(model, 250, vec![100], 500, Distribution::Mvn, est);
    let (a, b) = (nmse(&r, "tabasco", 100), nmse(&r, "mnmx", 100));
    t.target("tabasco", a, 0.0847, 0.15);
    t.target("mnmx", b, 0.0899, 0.15);
    t.check(a <= b, format!("ordering {a:.5} <= {b:.5}"));
    t.finish()
}

pub fn permuted_ar1() -> Outcome {
    let mut t = Tally::new();
    let est = vec![tabasco_banding(), NamedEstimator::new(EstimatorSpec::Lwe)];
    let r = campaign(CovModel::PermutedAr1 { rho: 0.2 }, 100, vec![115], 500, Distribution::Mvn, est);
    let (a, b) = (nmse(&r, "tabasco", 115), nmse(&r, "lwe", 115));
    t.check(a <= 1.05 * b, format!("tabasco {a:.5} <= 1.05 x lwe {b:.5}"));
    let k = r.get("tabasco", 115).and_then(|row| row.k_mode);
    t.check(k == Some(100.0), format!("modal k {k:?}"));
    t.finish()
}
