//! On-disk instance format.
//!
//! A JSON document with keys `num_nests`, `num_items`, `revenues`,
//! `preferences` (both flat row-major `M x N` arrays), `gammas` (length
//! `M`), and `c_v`. Read by the `oracle` and `simulate` subcommands,
//! written by the `adversarial` generator.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use nlbandit_core::NestedLogitInstance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub num_nests: usize,
    pub num_items: usize,
    /// Row-major `M x N`.
    pub revenues: Vec<f64>,
    /// Row-major `M x N`.
    pub preferences: Vec<f64>,
    pub gammas: Vec<f64>,
    pub c_v: f64,
}

impl InstanceFile {
    pub fn from_instance(instance: &NestedLogitInstance) -> Self {
        let m = instance.num_nests();
        let mut revenues = Vec::with_capacity(m * instance.num_items());
        let mut preferences = Vec::with_capacity(m * instance.num_items());
        for nest in 0..m {
            revenues.extend_from_slice(instance.nest_revenues(nest));
            preferences.extend_from_slice(instance.nest_preferences(nest));
        }
        Self {
            num_nests: m,
            num_items: instance.num_items(),
            revenues,
            preferences,
            gammas: instance.gammas().to_vec(),
            c_v: instance.c_v(),
        }
    }

    pub fn to_instance(&self) -> Result<NestedLogitInstance> {
        NestedLogitInstance::from_flat(
            self.num_nests,
            self.num_items,
            &self.revenues,
            &self.preferences,
            &self.gammas,
            self.c_v,
        )
        .map_err(|e| anyhow::anyhow!("invalid instance: {e}"))
    }
}

pub fn read_instance(path: &Path) -> Result<NestedLogitInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading instance file {}", path.display()))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing instance file {}", path.display()))?;
    file.to_instance()
        .with_context(|| format!("validating instance file {}", path.display()))
}

pub fn write_instance(path: &Path, instance: &NestedLogitInstance) -> Result<()> {
    let file = InstanceFile::from_instance(instance);
    let text = serde_json::to_string_pretty(&file).context("serializing instance")?;
    fs::write(path, text + "\n")
        .with_context(|| format!("writing instance file {}", path.display()))
}
