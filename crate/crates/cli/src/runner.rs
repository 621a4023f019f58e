//! Seeded parallel execution of experiment cells.
//!
//! Seeds are derived with SplitMix64 from the master seed and the job
//! coordinates, so results do not depend on thread scheduling: trials run
//! in parallel via rayon but each consumes only its own ChaCha8 stream, and
//! results are collected in job order.

use anyhow::{Context, Result};
use nlbandit_core::optimizer::{brute_force_full_space_with_cap, FULL_SPACE_CAP};
use nlbandit_core::policy::{
    reference_optimum, run_policy_with_catalog_at, PolicyConfig,
};
use nlbandit_core::seed::derive_seed;
use nlbandit_core::{NestedLogitInstance, SingletonCatalog};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::generate::generate_instance;

/// Stream tags for seed derivation (first tag in the chain).
const STREAM_INSTANCE: u64 = 1;
const STREAM_POLICY: u64 = 2;

/// One trial's regret curve plus its cell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub cell_m: usize,
    pub cell_n: usize,
    pub horizon: u64,
    pub delta: f64,
    pub trial: usize,
    /// The trial's policy-stream seed.
    pub seed: u64,
    /// `(t, cumulative expected regret)` at each checkpoint; final entry is
    /// at `t = horizon`.
    pub checkpoints: Vec<(u64, f64)>,
    pub epochs_used: u64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map(|&(_, r)| r).unwrap_or(0.0)
    }
}

/// Median and maximum final regret of one `(M, N, T, delta)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell_m: usize,
    pub cell_n: usize,
    pub horizon: u64,
    pub delta: f64,
    pub trials: usize,
    pub median_final_regret: f64,
    pub max_final_regret: f64,
}

/// Seed of the instance stream for a cell (and trial, when instances are
/// redrawn per trial; the shared-instance default uses a 0 tag).
pub fn instance_seed(master: u64, m: usize, n: usize, trial_tag: u64) -> u64 {
    derive_seed(master, &[STREAM_INSTANCE, m as u64, n as u64, trial_tag])
}

/// Seed of the policy stream for one job.
pub fn policy_seed(
    master: u64,
    m: usize,
    n: usize,
    horizon: u64,
    delta_index: usize,
    trial: usize,
) -> u64 {
    derive_seed(
        master,
        &[
            STREAM_POLICY,
            m as u64,
            n as u64,
            horizon,
            delta_index as u64,
            trial as u64,
        ],
    )
}

/// Everything shared by the jobs of one instance: the instance, its true
/// optimum, and one catalog per granularity.
struct CellSetup {
    instance: NestedLogitInstance,
    r_star: f64,
    catalogs: Vec<SingletonCatalog>,
}

fn build_setup(config: &ExperimentConfig, m: usize, n: usize, trial_tag: u64) -> Result<CellSetup> {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(config.master_seed, m, n, trial_tag));
    let instance = generate_instance(config, m, n, &mut rng)?;
    setup_for_instance(config, instance)
}

fn setup_for_instance(config: &ExperimentConfig, instance: NestedLogitInstance) -> Result<CellSetup> {
    let catalogs: Vec<SingletonCatalog> = config
        .deltas
        .iter()
        .map(|&delta| {
            SingletonCatalog::build(&instance, delta)
                .map_err(|e| anyhow::anyhow!("catalog at delta {delta}: {e}"))
        })
        .collect::<Result<_>>()?;
    // reuse the delta = 0 catalog for the reference optimum when present
    let r_star = match config.deltas.iter().position(|&d| d == 0.0) {
        Some(i) => reference_optimum(&instance, &catalogs[i]),
        None => {
            let full = SingletonCatalog::build(&instance, 0.0)
                .map_err(|e| anyhow::anyhow!("catalog at delta 0: {e}"))?;
            reference_optimum(&instance, &full)
        }
    };
    // cross-check against the exhaustive optimum when the space is small
    if let Ok((_, exact)) = brute_force_full_space_with_cap(&instance, FULL_SPACE_CAP) {
        anyhow::ensure!(
            (exact - r_star).abs() <= 1e-6,
            "reference optimum {r_star} disagrees with exhaustive optimum {exact}"
        );
    }
    Ok(CellSetup {
        instance,
        r_star,
        catalogs,
    })
}

/// Runs every (horizon, delta, trial) job of one `(M, N)` cell.
///
/// With `redraw_instance_per_trial = false` (the default) all trials of the
/// cell share one generated instance and differ only in the customer-choice
/// stream; otherwise each trial index gets its own instance, shared across
/// the horizon and delta lists so granularities stay comparable.
pub fn run_cell(config: &ExperimentConfig, m: usize, n: usize) -> Result<Vec<RegretTrace>> {
    let setups: Vec<CellSetup> = if config.redraw_instance_per_trial {
        (0..config.trials)
            .map(|trial| build_setup(config, m, n, trial as u64 + 1))
            .collect::<Result<_>>()?
    } else {
        vec![build_setup(config, m, n, 0)?]
    };
    run_jobs(config, m, n, &setups)
}

/// Runs every (horizon, delta, trial) job on one fixed instance, e.g. one
/// loaded from a file instead of generated.
pub fn run_fixed_instance(
    config: &ExperimentConfig,
    instance: NestedLogitInstance,
) -> Result<Vec<RegretTrace>> {
    let (m, n) = (instance.num_nests(), instance.num_items());
    let setups = vec![setup_for_instance(config, instance)?];
    run_jobs(config, m, n, &setups)
}

fn run_jobs(
    config: &ExperimentConfig,
    m: usize,
    n: usize,
    setups: &[CellSetup],
) -> Result<Vec<RegretTrace>> {
    let mut jobs = Vec::new();
    for &horizon in &config.horizons {
        for delta_index in 0..config.deltas.len() {
            for trial in 0..config.trials {
                jobs.push((horizon, delta_index, trial));
            }
        }
    }

    jobs.par_iter()
        .map(|&(horizon, delta_index, trial)| {
            let setup = if setups.len() > 1 {
                &setups[trial]
            } else {
                &setups[0]
            };
            let delta = config.deltas[delta_index];
            let policy_config = PolicyConfig {
                u_upper: config
                    .u_upper
                    .unwrap_or_else(|| PolicyConfig::default_u_upper(&setup.instance)),
                horizon,
                delta,
                epsilon_bs: config.epsilon_bs,
                k_value: None,
            };
            let seed = policy_seed(config.master_seed, m, n, horizon, delta_index, trial);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let grid = config.checkpoint_grid(horizon);
            let curve = run_policy_with_catalog_at(
                &setup.instance,
                &policy_config,
                &setup.catalogs[delta_index],
                setup.r_star,
                &grid,
                &mut rng,
            );
            Ok(RegretTrace {
                cell_m: m,
                cell_n: n,
                horizon,
                delta,
                trial,
                seed,
                checkpoints: curve.checkpoints,
                epochs_used: curve.epochs_used,
            })
        })
        .collect::<Result<Vec<_>>>()
        .with_context(|| format!("running cell ({m}, {n})"))
}

/// Runs the whole grid (or the configured fixed instance) and summarizes.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<RegretTrace>, Vec<SummaryRow>)> {
    config.validate()?;
    let mut traces = Vec::new();
    if let Some(path) = &config.instance {
        let instance = crate::instance_io::read_instance(path)?;
        traces.extend(run_fixed_instance(config, instance)?);
    } else {
        for &(m, n) in &config.grid {
            traces.extend(run_cell(config, m, n)?);
        }
    }
    let summaries = summarize(&traces);
    Ok((traces, summaries))
}

/// Median and max of final regret per `(M, N, T, delta)` group, in sorted
/// group order.
pub fn summarize(traces: &[RegretTrace]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, usize, u64, u64), Vec<f64>> = BTreeMap::new();
    for trace in traces {
        groups
            .entry((
                trace.cell_m,
                trace.cell_n,
                trace.horizon,
                trace.delta.to_bits(),
            ))
            .or_default()
            .push(trace.final_regret());
    }
    groups
        .into_iter()
        .map(|((m, n, horizon, delta_bits), mut finals)| {
            finals.sort_by(f64::total_cmp);
            let len = finals.len();
            let median = if len % 2 == 1 {
                finals[len / 2]
            } else {
                0.5 * (finals[len / 2 - 1] + finals[len / 2])
            };
            SummaryRow {
                cell_m: m,
                cell_n: n,
                horizon,
                delta: f64::from_bits(delta_bits),
                trials: len,
                median_final_regret: median,
                max_final_regret: finals[len - 1],
            }
        })
        .collect()
}
