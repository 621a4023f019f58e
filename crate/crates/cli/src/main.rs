//! Command-line driver.
//!
//! Subcommands:
//! - `simulate --config <file> [--out <dir>]` — run the configured grid of
//!   trials and write `traces.csv` / `summary.csv`.
//! - `oracle --instance <file> [--delta <d>]` — print the static optimum of
//!   an instance as JSON.
//! - `adversarial --m <M> --eps <e> [--seed <s>] [--out <dir>]` — generate a
//!   hard instance and its verification report.
//! - `table --config <file>` — print a previous run's `summary.csv` as an
//!   aligned table.
//!
//! `NLBANDIT_WORKERS` caps the worker thread count.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use nlbandit_cli::config::load_config;
use nlbandit_cli::csvio::emit_csv;
use nlbandit_cli::instance_io::{read_instance, write_instance, InstanceFile};
use nlbandit_cli::report::build_report;
use nlbandit_cli::runner::run_experiment;
use nlbandit_core::levelset::SingletonCatalog;
use nlbandit_core::optimizer::{binary_search_optimum, SingletonValueTable};
use nlbandit_core::policy::R_STAR_EPSILON;

#[derive(Parser)]
#[command(
    name = "nlbandit",
    version,
    about = "Dynamic assortment simulation under nested logit choice models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid from a config file and emit CSV results.
    Simulate {
        /// TOML experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the static optimum of an instance file.
    Oracle {
        /// Instance JSON file.
        #[arg(long)]
        instance: PathBuf,
        /// Level-set discretization granularity.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Generate a two-type hard instance and verify its gap and KL
    /// properties.
    Adversarial {
        /// Number of nests (a multiple of 4).
        #[arg(long)]
        m: usize,
        /// Preference tilt, strictly between 0 and 1.
        #[arg(long)]
        eps: f64,
        /// Seed for the report's random assortments.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `instance.json` and `report.json` here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a previous run's summary.csv as an aligned table.
    Table {
        /// TOML experiment configuration (locates the output directory).
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> Result<()> {
    init_worker_pool()?;
    match Cli::parse().command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Oracle { instance, delta } => oracle(&instance, delta),
        Command::Adversarial { m, eps, seed, out } => adversarial(m, eps, seed, out),
        Command::Table { config } => table(&config),
    }
}

fn init_worker_pool() -> Result<()> {
    if let Ok(value) = std::env::var("NLBANDIT_WORKERS") {
        let workers: usize = value
            .parse()
            .with_context(|| format!("NLBANDIT_WORKERS must be a positive integer, got {value}"))?;
        if workers == 0 {
            bail!("NLBANDIT_WORKERS must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("initializing worker pool")?;
    }
    Ok(())
}

fn simulate(config_path: &std::path::Path, out: Option<PathBuf>) -> Result<()> {
    let config = load_config(config_path)?;
    let out_dir = out.unwrap_or_else(|| config.output.clone());
    let (traces, summaries) = run_experiment(&config)?;
    let (traces_path, summary_path) = emit_csv(&traces, &summaries, &out_dir)?;
    eprintln!(
        "wrote {} traces to {} and {} summary rows to {}",
        traces.len(),
        traces_path.display(),
        summaries.len(),
        summary_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    delta: f64,
    optimal_value: f64,
    /// Optimal level-set threshold per nest; `null` offers nothing there.
    thresholds: Vec<Option<f64>>,
    /// Optimal member sets (item indices) per nest.
    assortments: Vec<Vec<usize>>,
}

fn oracle(instance_path: &std::path::Path, delta: f64) -> Result<()> {
    let instance = read_instance(instance_path)?;
    let catalog = SingletonCatalog::build(&instance, delta)
        .map_err(|e| anyhow::anyhow!("building catalog: {e}"))?;
    let table = SingletonValueTable::from_true_params(&instance, &catalog);
    let optimum = binary_search_optimum(&table, R_STAR_EPSILON);
    let output = OracleOutput {
        delta,
        optimal_value: optimum.value,
        thresholds: optimum
            .theta
            .iter()
            .enumerate()
            .map(|(nest, &idx)| {
                let singleton = catalog.singleton(nest, idx);
                (!singleton.is_empty()).then(|| singleton.threshold())
            })
            .collect(),
        assortments: optimum
            .theta
            .iter()
            .enumerate()
            .map(|(nest, &idx)| catalog.singleton(nest, idx).members().to_vec())
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}

fn adversarial(m: usize, eps: f64, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let (instance, report) = build_report(m, eps, seed)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
            let instance_path = dir.join("instance.json");
            write_instance(&instance_path, &instance)?;
            let report_path = dir.join("report.json");
            std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")
                .with_context(|| format!("writing {}", report_path.display()))?;
            eprintln!(
                "wrote {} and {}",
                instance_path.display(),
                report_path.display()
            );
        }
        None => {
            #[derive(Serialize)]
            struct Combined<'a> {
                instance: InstanceFile,
                report: &'a nlbandit_cli::report::AdversarialReport,
            }
            let combined = Combined {
                instance: InstanceFile::from_instance(&instance),
                report: &report,
            };
            println!("{}", serde_json::to_string_pretty(&combined)?);
        }
    }
    if !report.gap.all_single_positive || !report.kl.within_twice_reference {
        bail!("verification failed: see report");
    }
    Ok(())
}

fn table(config_path: &std::path::Path) -> Result<()> {
    let config = load_config(config_path)?;
    let summary_path = config.output.join("summary.csv");
    let text = std::fs::read_to_string(&summary_path).with_context(|| {
        format!(
            "reading {} (run `nlbandit simulate --config {}` first)",
            summary_path.display(),
            config_path.display()
        )
    })?;
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').collect())
        .collect();
    if rows.is_empty() {
        bail!("{} is empty", summary_path.display());
    }
    let columns = rows[0].len();
    let mut widths = vec![0usize; columns];
    for row in &rows {
        for (i, field) in row.iter().enumerate() {
            if i < columns {
                widths[i] = widths[i].max(field.len());
            }
        }
    }
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, field)| format!("{:>width$}", field, width = widths[i]))
            .collect();
        println!("{}", line.join("  "));
    }
    Ok(())
}
