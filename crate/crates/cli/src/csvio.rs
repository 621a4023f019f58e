//! CSV emission with stable formatting.
//!
//! `traces.csv` holds one row per (trial, checkpoint); `summary.csv` one
//! row per (cell, horizon, delta) group. Floats print with 6 significant
//! digits, rows sort by cell, then trial, then checkpoint, and output is a
//! pure function of the inputs, so identical runs produce byte-identical
//! files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::runner::{RegretTrace, SummaryRow};

pub const TRACES_HEADER: &str = "cell_m,cell_n,horizon,delta,trial,seed,checkpoint_t,cum_regret";
pub const SUMMARY_HEADER: &str =
    "cell_m,cell_n,horizon,delta,trials,median_final_regret,max_final_regret";

/// Formats with `sig` significant digits, like C's `%g`: fixed notation in
/// the middle of the scale, scientific outside it, no trailing zeros.
pub fn format_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // let the formatter do the decimal rounding, then read off the exponent
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("always has an exponent");
    let exponent: i32 = exponent.parse().expect("well-formed exponent");
    if exponent < -4 || exponent >= sig as i32 {
        format!("{}e{exponent}", trim_zeros(mantissa))
    } else {
        let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).into_owned()
    }
}

fn trim_zeros(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains('.') {
        std::borrow::Cow::Borrowed(s.trim_end_matches('0').trim_end_matches('.'))
    } else {
        std::borrow::Cow::Borrowed(s)
    }
}

/// Writes `traces.csv` and `summary.csv` under `dir`, returning their
/// paths.
pub fn emit_csv(
    traces: &[RegretTrace],
    summaries: &[SummaryRow],
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;

    let mut sorted: Vec<&RegretTrace> = traces.iter().collect();
    sorted.sort_by(|a, b| {
        (a.cell_m, a.cell_n, a.horizon)
            .cmp(&(b.cell_m, b.cell_n, b.horizon))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.trial.cmp(&b.trial))
    });

    let traces_path = dir.join("traces.csv");
    {
        let mut w = BufWriter::new(
            File::create(&traces_path)
                .with_context(|| format!("creating {}", traces_path.display()))?,
        );
        writeln!(w, "{TRACES_HEADER}")?;
        for trace in &sorted {
            for &(t, regret) in &trace.checkpoints {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    trace.cell_m,
                    trace.cell_n,
                    trace.horizon,
                    format_sig(trace.delta, 6),
                    trace.trial,
                    trace.seed,
                    t,
                    format_sig(regret, 6)
                )?;
            }
        }
        w.flush()
            .with_context(|| format!("writing {}", traces_path.display()))?;
    }

    let mut sorted: Vec<&SummaryRow> = summaries.iter().collect();
    sorted.sort_by(|a, b| {
        (a.cell_m, a.cell_n, a.horizon)
            .cmp(&(b.cell_m, b.cell_n, b.horizon))
            .then(a.delta.total_cmp(&b.delta))
    });

    let summary_path = dir.join("summary.csv");
    {
        let mut w = BufWriter::new(
            File::create(&summary_path)
                .with_context(|| format!("creating {}", summary_path.display()))?,
        );
        writeln!(w, "{SUMMARY_HEADER}")?;
        for row in &sorted {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                row.cell_m,
                row.cell_n,
                row.horizon,
                format_sig(row.delta, 6),
                row.trials,
                format_sig(row.median_final_regret, 6),
                format_sig(row.max_final_regret, 6)
            )?;
        }
        w.flush()
            .with_context(|| format!("writing {}", summary_path.display()))?;
    }

    Ok((traces_path, summary_path))
}
