use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use tabasco::simulate::{run_campaign, CampaignConfig, CampaignReport};

use crate::io::{self, classify, fmt_f64, fmt_opt, usage};
use crate::{OutputArg, SeedArg};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Campaign description (TOML).
    #[arg(long, short)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArg,
    #[command(flatten)]
    seed: SeedArg,
    /// Override the number of trials per sample size.
    #[arg(long)]
    trials: Option<usize>,
}

/// The campaign file; `seed` is optional so the CLI can tell whether it was set.
#[derive(Deserialize)]
struct CampaignFile {
    seed: Option<u64>,
    #[serde(flatten)]
    campaign: CampaignConfig,
}

#[derive(Serialize)]
struct Mirror<'a> {
    config: &'a CampaignConfig,
    report: &'a CampaignReport,
}

const HEADER: [&str; 8] = ["estimator", "n", "nmse_mean", "nmse_se", "beta_mean", "k_mode", "trials", "failures"];

pub fn run(args: &SimulateArgs) -> Result<()> {
    let file: CampaignFile = io::read_config(&args.config)?;
    let mut cfg = file.campaign;
    cfg.seed = args.seed.resolve(file.seed);
    if let Some(t) = args.trials {
        if t == 0 {
            return Err(usage("--trials must be positive"));
        }
        cfg.trials = t;
    }
    cfg.validate().map_err(classify)?;
    let report = run_campaign(&cfg).map_err(classify)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.estimator.clone(),
                r.n.to_string(),
                fmt_f64(r.nmse_mean),
                fmt_f64(r.nmse_se),
                fmt_opt(r.beta_mean),
                fmt_opt(r.k_mode),
                r.trials.to_string(),
                r.failures.to_string(),
            ]
        })
        .collect();
    io::write_table(&args.output.output, Some(&HEADER), &rows)?;
    io::write_json(&io::json_path(&args.output.output), &Mirror { config: &cfg, report: &report })?;
    let failed: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.failures > 0)
        .map(|r| format!("{} at n = {}: {} of {} trials failed", r.estimator, r.n, r.failures, r.trials))
        .collect();
    if !failed.is_empty() {
        for line in &failed {
            eprintln!("{line}");
        }
        anyhow::bail!("{} estimator/sample-size cells had failed trials", failed.len());
    }
    Ok(())
}
