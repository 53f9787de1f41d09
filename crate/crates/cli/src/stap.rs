use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use tabasco::stap::{StapEstimator, StapScenario};

use crate::io::{self, fmt_f64};
use crate::{OutputArg, SeedArg};

#[derive(Args, Debug)]
pub struct StapArgs {
    /// Scenario overrides (TOML); defaults to a 2-sensor, 8-pulse array.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArg,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value = "tabasco")]
    estimator: StapEstimator,
    /// Training snapshots (overrides the config).
    #[arg(long)]
    n: Option<usize>,
    /// Monte-Carlo run index; different runs draw independent data.
    #[arg(long, default_value_t = 0)]
    run: u64,
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct StapFile {
    seed: Option<u64>,
    #[serde(flatten)]
    scenario: StapScenario,
}

#[derive(Serialize)]
struct Summary {
    estimator: StapEstimator,
    seed: u64,
    run: u64,
    beta: Option<f64>,
    k: Option<f64>,
    cnr_db: f64,
    n: usize,
    p: usize,
    target_theta: f64,
    target_velocity: f64,
    /// 1-based rank of the target cell among all cells, by statistic.
    target_rank: usize,
    max_statistic: f64,
    scenario: StapScenario,
    /// Mirror of the CSV as (theta, velocity, statistic) triples.
    map: Vec<[f64; 3]>,
}

pub fn run(args: &StapArgs) -> Result<()> {
    let file: StapFile = match &args.config {
        Some(path) => io::read_config(path)?,
        None => StapFile::default(),
    };
    let mut scenario = file.scenario;
    if let Some(n) = args.n {
        scenario.n = n;
    }
    let seed = args.seed.resolve(file.seed);
    let outcome = scenario.run(args.estimator, seed, args.run)?;
    let map: Vec<[f64; 3]> = outcome.map.rows().map(|(t, v, s)| [t, v, s]).collect();
    let rows: Vec<Vec<String>> = map.iter().map(|r| r.iter().copied().map(fmt_f64).collect()).collect();
    io::write_table(&args.output.output, Some(&["theta", "velocity", "statistic"]), &rows)?;

    let (ti, tv) = scenario.target_cell;
    let grid = &outcome.map.grid;
    let summary = Summary {
        estimator: args.estimator,
        seed,
        run: args.run,
        beta: outcome.beta,
        k: outcome.k,
        cnr_db: scenario.radar.cnr_db,
        n: scenario.n,
        p: scenario.radar.p(),
        target_theta: grid.thetas[ti],
        target_velocity: grid.velocities[tv],
        target_rank: outcome.map.rank_of(outcome.target_cell) + 1,
        max_statistic: outcome.map.max(),
        scenario: scenario.clone(),
        map,
    };
    io::write_json(&io::json_path(&args.output.output), &summary)
}
