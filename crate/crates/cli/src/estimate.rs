use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use nalgebra::DMatrix;
use serde::Serialize;
use tabasco::{tabasco, Complex64, FamilySpec, SampleSet, Scalar, SphericityMethod, TabascoEstimate, TabascoOptions};

use crate::io::{self, classify, usage};
use crate::OutputArg;

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Data CSV: one observation per row, one variable per column.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    output: OutputArg,
    /// The first CSV row holds column names.
    #[arg(long)]
    header: bool,
    /// Columns are consecutive (re, im) pairs of complex variables.
    #[arg(long)]
    complex: bool,
    /// The data are already centered at the true (zero) mean.
    #[arg(long)]
    known_mean: bool,
    /// Template family, `kind:indices` (kinds: banding, minimax, sinc).
    #[arg(long, default_value = "banding:1..30,p-30..p")]
    family: String,
    #[arg(long, default_value = "ell1")]
    sphericity: SphericityMethod,
    /// Assume Gaussian data (zero excess kurtosis).
    #[arg(long)]
    gaussian: bool,
    /// Fix the shrinkage intensity instead of estimating it.
    #[arg(long)]
    beta: Option<f64>,
    /// Fix the template index instead of selecting it.
    #[arg(long)]
    k: Option<f64>,
}

#[derive(Serialize)]
struct TemplateRow {
    k: f64,
    objective: f64,
    beta: f64,
    gamma_w: f64,
    gamma_v: f64,
}

#[derive(Serialize)]
struct Sidecar {
    beta: f64,
    k: f64,
    template: String,
    eta: f64,
    kappa: f64,
    gamma: f64,
    n: usize,
    p: usize,
    complex: bool,
    known_mean: bool,
    sphericity: SphericityMethod,
    /// Constants extrapolated to a regime without a closed form.
    heuristic: bool,
    per_k_objective: Vec<TemplateRow>,
    /// Mirror of the CSV; complex entries as (re, im) column pairs.
    sigma_hat: Vec<Vec<f64>>,
}

fn estimate<T: Scalar>(data: DMatrix<T>, args: &EstimateArgs) -> Result<TabascoEstimate<T>> {
    let x = SampleSet::new(data, args.known_mean).map_err(classify)?;
    let family = FamilySpec::parse(&args.family).and_then(|f| f.build(x.p())).map_err(classify)?;
    let opts = TabascoOptions {
        sphericity: args.sphericity,
        gaussian: args.gaussian,
        beta_override: args.beta,
        index_override: args.k,
        ..TabascoOptions::default()
    };
    tabasco(&x, &family, &opts).map_err(classify)
}

fn sidecar<T: Scalar>(est: &TabascoEstimate<T>, args: &EstimateArgs, sigma_hat: &DMatrix<f64>) -> Sidecar {
    let s = &est.summary;
    let sel = &est.selection;
    Sidecar {
        beta: sel.beta_hat,
        k: sel.chosen_value,
        template: est.template.label().to_string(),
        eta: est.eta_hat,
        kappa: s.kappa_hat,
        gamma: s.gamma_hat,
        n: s.n,
        p: s.p,
        complex: args.complex,
        known_mean: args.known_mean,
        sphericity: args.sphericity,
        heuristic: est.heuristic,
        per_k_objective: s
            .records
            .iter()
            .zip(&sel.objective)
            .zip(&sel.per_k_beta)
            .map(|((r, &objective), &beta)| TemplateRow {
                k: r.index_value,
                objective,
                beta,
                gamma_w: r.gamma_hat_w,
                gamma_v: r.gamma_hat_v,
            })
            .collect(),
        sigma_hat: io::matrix_rows(sigma_hat),
    }
}

pub fn run(args: &EstimateArgs) -> Result<()> {
    if let Some(b) = args.beta {
        if !(0.0..=1.0).contains(&b) {
            return Err(usage(format!("--beta {b} is outside [0, 1]")));
        }
    }
    let raw = io::read_matrix(&args.input, args.header)?;
    let (sigma_hat, meta) = if args.complex {
        let est = estimate::<Complex64>(io::complex_from_pairs(&raw)?, args)?;
        let m = io::complex_to_pairs(&est.sigma_hat);
        let meta = sidecar(&est, args, &m);
        (m, meta)
    } else {
        let est = estimate::<f64>(raw, args)?;
        let meta = sidecar(&est, args, &est.sigma_hat);
        (est.sigma_hat, meta)
    };
    if meta.heuristic {
        log::warn!("complex data with known mean: shrinkage constants are extrapolated");
    }
    io::write_matrix(&args.output.output, &sigma_hat)?;
    io::write_json(&io::json_path(&args.output.output), &meta)
}
