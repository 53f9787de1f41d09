use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use tabasco::oracle::{oracle_k, oracle_l_curve, OracleInputs};
use tabasco::simulate::CovModel;
use tabasco::FamilySpec;

use crate::io::{self, classify, fmt_f64, usage};
use crate::OutputArg;

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Covariance model, sample size and template family (TOML).
    #[arg(long, short)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArg,
    /// Also write the MSE as a function of beta for every template.
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Number of equispaced beta values in [0, 1] per curve.
    #[arg(long, default_value_t = 101)]
    curve_points: usize,
}

/// A family given as `"banding:1..5"` or as a table.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FamilyField {
    Text(String),
    Spec(FamilySpec),
}

impl Default for FamilyField {
    fn default() -> Self {
        FamilyField::Spec(FamilySpec::default())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleConfig {
    model: CovModel,
    p: usize,
    n: usize,
    #[serde(default)]
    kappa: f64,
    #[serde(default)]
    mean_known: bool,
    #[serde(default)]
    family: FamilyField,
}

#[derive(Serialize)]
struct Row {
    k: f64,
    beta0: f64,
    nmse_opt: f64,
    mse_opt: f64,
    gamma_w: f64,
    gamma_v: f64,
    /// MSE of the tapered SCM alone (`β = 1`).
    a1: f64,
    /// MSE of the scaled identity target (`β = 0`).
    a2: f64,
    a3: f64,
    objective: f64,
}

#[derive(Serialize)]
struct Curve {
    k: f64,
    betas: Vec<f64>,
    mse: Vec<f64>,
}

#[derive(Serialize)]
struct Mirror {
    p: usize,
    n: usize,
    kappa: f64,
    mean_known: bool,
    /// Template index with the smallest optimal MSE.
    best_k: f64,
    rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curves: Option<Vec<Curve>>,
}

const HEADER: [&str; 10] = ["k", "beta0", "nmse_opt", "mse_opt", "gamma_w", "gamma_v", "a1", "a2", "a3", "objective"];

pub fn run(args: &OracleArgs) -> Result<()> {
    let cfg: OracleConfig = io::read_config(&args.config)?;
    cfg.model.validate().map_err(classify)?;
    if args.curve_points < 2 {
        return Err(usage("--curve-points must be at least 2"));
    }
    let spec = match &cfg.family {
        FamilyField::Text(s) => FamilySpec::parse(s).map_err(classify)?,
        FamilyField::Spec(s) => s.clone(),
    };
    let family = spec.build(cfg.p).map_err(classify)?;
    // Not a usage error: a valid model can still be indefinite (e.g. a slow polynomial decay).
    let inputs = OracleInputs::new(cfg.model.build(cfg.p), cfg.kappa, cfg.n, cfg.mean_known)?;
    let selection = oracle_k(&inputs, &family)?;

    let m = args.curve_points;
    let betas: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
    let mut rows = Vec::with_capacity(family.len());
    let mut curves = Vec::with_capacity(family.len());
    for (t, ob) in family.iter().zip(&selection.per_template) {
        let curve = oracle_l_curve(&inputs, t, &betas)?;
        rows.push(Row {
            k: ob.index_value,
            beta0: ob.beta,
            nmse_opt: ob.nmse_opt,
            mse_opt: ob.mse_opt,
            gamma_w: ob.gamma_w,
            gamma_v: ob.gamma_v,
            a1: curve.a1,
            a2: curve.a2,
            a3: curve.a3,
            objective: ob.objective,
        });
        curves.push(Curve {
            k: curve.index_value,
            betas: curve.betas,
            mse: curve.l_values,
        });
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            [r.k, r.beta0, r.nmse_opt, r.mse_opt, r.gamma_w, r.gamma_v, r.a1, r.a2, r.a3, r.objective]
                .into_iter()
                .map(fmt_f64)
                .collect()
        })
        .collect();
    io::write_table(&args.output.output, Some(&HEADER), &table)?;

    if let Some(path) = &args.curves {
        let frob = inputs.frob();
        let lines: Vec<Vec<String>> = curves
            .iter()
            .flat_map(|c| {
                c.betas
                    .iter()
                    .zip(&c.mse)
                    .map(move |(&b, &l)| vec![fmt_f64(c.k), fmt_f64(b), fmt_f64(l), fmt_f64(l / frob)])
            })
            .collect();
        io::write_table(path, Some(&["k", "beta", "mse", "nmse"]), &lines)?;
    }

    let mirror = Mirror {
        p: cfg.p,
        n: cfg.n,
        kappa: cfg.kappa,
        mean_known: cfg.mean_known,
        best_k: family.templates()[selection.chosen_index].index_value(),
        rows,
        curves: args.curves.is_some().then_some(curves),
    };
    io::write_json(&io::json_path(&args.output.output), &mirror)
}
