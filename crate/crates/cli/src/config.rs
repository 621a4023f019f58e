//! Experiment configuration (TOML).
//!
//! ```toml
//! grid = [[5, 100], [10, 100]]   # (M, N) cells
//! horizons = [100, 10000]        # T values
//! deltas = [0.0, 0.01]           # discretization granularities
//! trials = 100
//! master_seed = 20240601
//! output = "results"
//! ```
//!
//! Generation ranges default to: revenues uniform on `[0.2, 0.8]`,
//! preferences uniform on `[10/(N(M-1)), 20/(N(M-1))]` (the
//! `preference_scale_*` keys are the numerators), exponents uniform on
//! `[0.5, 1]`. All fields are optional except `grid` and `horizons`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `(M, N)` cells to run. May be empty only when `instance` is set.
    #[serde(default)]
    pub grid: Vec<(usize, usize)>,
    /// Run on a fixed instance file instead of generating instances; the
    /// generation ranges and `grid` are then unused.
    #[serde(default)]
    pub instance: Option<PathBuf>,
    /// Horizons `T`.
    pub horizons: Vec<u64>,
    /// Discretization granularities; include 0.0 for the undiscretized
    /// policy.
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Independent trials per (cell, horizon, delta).
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_revenue_low")]
    pub revenue_low: f64,
    #[serde(default = "default_revenue_high")]
    pub revenue_high: f64,
    /// Preference range numerator: low end of `v ~ U[lo, hi]/(N(M-1))`.
    #[serde(default = "default_pref_low")]
    pub preference_scale_low: f64,
    /// Preference range numerator: high end.
    #[serde(default = "default_pref_high")]
    pub preference_scale_high: f64,
    #[serde(default = "default_gamma_low")]
    pub gamma_low: f64,
    #[serde(default = "default_gamma_high")]
    pub gamma_high: f64,
    /// Override for the policy's weight bound `U`; default is
    /// `max(N * C_V, 1)` per instance.
    #[serde(default)]
    pub u_upper: Option<f64>,
    #[serde(default = "default_epsilon_bs")]
    pub epsilon_bs: f64,
    /// Explicit regret checkpoints; default is `{1, 2, 4, ...} ∪ {T}`.
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    /// Output directory for `traces.csv` and `summary.csv`.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Draw a fresh instance per trial instead of one per `(M, N)` cell.
    #[serde(default)]
    pub redraw_instance_per_trial: bool,
}

fn default_deltas() -> Vec<f64> {
    vec![0.0]
}
fn default_trials() -> usize {
    100
}
fn default_revenue_low() -> f64 {
    0.2
}
fn default_revenue_high() -> f64 {
    0.8
}
fn default_pref_low() -> f64 {
    10.0
}
fn default_pref_high() -> f64 {
    20.0
}
fn default_gamma_low() -> f64 {
    0.5
}
fn default_gamma_high() -> f64 {
    1.0
}
fn default_epsilon_bs() -> f64 {
    1e-9
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instance.is_some() {
            if !self.grid.is_empty() {
                bail!("grid and instance are mutually exclusive");
            }
            if self.redraw_instance_per_trial {
                bail!("redraw_instance_per_trial has no effect with a fixed instance");
            }
        } else if self.grid.is_empty() {
            bail!("grid must list at least one (M, N) cell (or set instance)");
        }
        for &(m, n) in &self.grid {
            if m < 2 {
                bail!("cell ({m}, {n}): need at least 2 nests (preference scale divides by M-1)");
            }
            if n < 1 {
                bail!("cell ({m}, {n}): need at least 1 item per nest");
            }
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            bail!("horizons must be non-empty and positive");
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|&d| !(0.0..1.0).contains(&d)) {
            bail!("deltas must be non-empty with every value in [0, 1)");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        for (name, lo, hi) in [
            ("revenue", self.revenue_low, self.revenue_high),
            (
                "preference_scale",
                self.preference_scale_low,
                self.preference_scale_high,
            ),
            ("gamma", self.gamma_low, self.gamma_high),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                bail!("{name} range [{lo}, {hi}] is not ordered");
            }
        }
        if !(0.0..=1.0).contains(&self.revenue_low) || !(0.0..=1.0).contains(&self.revenue_high) {
            bail!("revenue range must stay within [0, 1]");
        }
        if self.preference_scale_low <= 0.0 {
            bail!("preference scale must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma_low) || !(0.0..=1.0).contains(&self.gamma_high) {
            bail!("gamma range must stay within [0, 1]");
        }
        if let Some(u) = self.u_upper {
            if !(u.is_finite() && u > 0.0) {
                bail!("u_upper override must be positive");
            }
        }
        if !(self.epsilon_bs.is_finite() && self.epsilon_bs > 0.0) {
            bail!("epsilon_bs must be positive");
        }
        if let Some(cps) = &self.checkpoints {
            if cps.is_empty() || cps.contains(&0) {
                bail!("explicit checkpoints must be non-empty and positive");
            }
        }
        Ok(())
    }

    /// The checkpoint grid for one horizon: the explicit list (clipped to
    /// the horizon, with the horizon appended) or the geometric default.
    pub fn checkpoint_grid(&self, horizon: u64) -> Vec<u64> {
        match &self.checkpoints {
            None => nlbandit_core::policy::checkpoint_grid(horizon),
            Some(list) => {
                let mut grid: Vec<u64> =
                    list.iter().copied().filter(|&t| t <= horizon).collect();
                grid.push(horizon);
                grid.sort_unstable();
                grid.dedup();
                grid
            }
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let config: ExperimentConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config file {}", path.display()))?;
    config
        .validate()
        .with_context(|| format!("validating config file {}", path.display()))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            grid = [[5, 100]]
            horizons = [1000]
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.deltas, vec![0.0]);
        assert_eq!(cfg.revenue_low, 0.2);
        assert_eq!(cfg.revenue_high, 0.8);
        assert_eq!(cfg.preference_scale_low, 10.0);
        assert_eq!(cfg.preference_scale_high, 20.0);
        assert_eq!(cfg.gamma_low, 0.5);
        assert_eq!(cfg.gamma_high, 1.0);
        assert_eq!(cfg.epsilon_bs, 1e-9);
        assert!(!cfg.redraw_instance_per_trial);
    }

    #[test]
    fn rejects_bad_values() {
        let base = r#"
            grid = [[5, 100]]
            horizons = [1000]
        "#;
        let cfg: ExperimentConfig = toml::from_str(base).unwrap();
        let mut bad = cfg.clone();
        bad.grid = vec![(1, 10)];
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.deltas = vec![1.0];
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.trials = 0;
        assert!(bad.validate().is_err());
        let mut bad = cfg;
        bad.revenue_high = 0.1;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let parsed: Result<ExperimentConfig, _> = toml::from_str(
            r#"
            grid = [[5, 100]]
            horizons = [1000]
            tyop = 3
            "#,
        );
        assert!(parsed.is_err());
    }

    #[test]
    fn explicit_checkpoints_clipped_and_closed() {
        let mut cfg: ExperimentConfig = toml::from_str(
            r#"
            grid = [[5, 100]]
            horizons = [50]
            "#,
        )
        .unwrap();
        cfg.checkpoints = Some(vec![10, 100, 20]);
        assert_eq!(cfg.checkpoint_grid(50), vec![10, 20, 50]);
        assert_eq!(cfg.checkpoint_grid(200), vec![10, 20, 100, 200]);
    }
}
