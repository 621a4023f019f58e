//! Random instance generation for experiments.
//!
//! Per cell `(M, N)`: revenues i.i.d. uniform on `[revenue_low,
//! revenue_high)`, preferences i.i.d. uniform on the scale range divided by
//! `N(M-1)`, exponents i.i.d. uniform on the gamma range. The declared
//! preference bound `C_V` is the upper end of the preference range. Draw
//! order is fixed (revenues row-major, then preferences, then gammas) so a
//! seed pins the instance bit-exactly.

use anyhow::{ensure, Result};
use nlbandit_core::NestedLogitInstance;
use rand::Rng;

use crate::config::ExperimentConfig;

pub fn generate_instance<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<NestedLogitInstance> {
    ensure!(m >= 2, "instance generation needs at least 2 nests, got {m}");
    ensure!(n >= 1, "instance generation needs at least 1 item, got {n}");
    let scale = (n * (m - 1)) as f64;
    let v_low = config.preference_scale_low / scale;
    let v_high = config.preference_scale_high / scale;

    let revenues: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| uniform(rng, config.revenue_low, config.revenue_high))
                .collect()
        })
        .collect();
    let preferences: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| uniform(rng, v_low, v_high)).collect())
        .collect();
    let gammas: Vec<f64> = (0..m)
        .map(|_| uniform(rng, config.gamma_low, config.gamma_high))
        .collect();

    NestedLogitInstance::new(revenues, preferences, gammas, v_high)
        .map_err(|e| anyhow::anyhow!("generated instance failed validation: {e}"))
}

/// Uniform draw on `[low, high)` (exactly `low` when the range is empty).
fn uniform<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    if high <= low {
        return low;
    }
    low + (high - low) * rng.random::<f64>()
}
