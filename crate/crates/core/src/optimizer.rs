//! Static assortment optimization over singleton catalogs.
//!
//! Inputs are per-(nest, singleton) value pairs `(phi_bar, u_bar)` — either
//! ground-truth parameters or a learner's upper confidence bands. The
//! objective is
//!
//! ```text
//! R(theta) = sum_i phi_bar[i][theta_i] * u_bar[i][theta_i]
//!            / (1 + sum_i u_bar[i][theta_i]).
//! ```
//!
//! The fractional form separates under the potential
//! `psi_lambda(theta) = sum_i (phi_bar - lambda) * u_bar`: the maximum of
//! `psi_lambda` exceeds `lambda` exactly when the optimal objective exceeds
//! `lambda`, so a binary search over `lambda` in `[0, 1]` with a per-nest
//! argmax at each step finds the optimum to any precision in
//! `O(M K log(1/eps))` table reads. Exhaustive oracles over the catalog
//! product and over the full `(2^N)^M` assortment space back the search in
//! tests and small runs.

use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::levelset::{singleton_params, SingletonCatalog};
use crate::model::{AssortmentCombination, NestedLogitInstance};
use crate::policy::PolicyState;

/// Default cap on catalog-product size for [`brute_force_optimum`].
pub const BRUTE_FORCE_CAP: u64 = 1_000_000;

/// Default cap on `(2^N)^M` for [`brute_force_full_space`].
pub const FULL_SPACE_CAP: u64 = 1 << 20;

/// Error from table construction or an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerError {
    /// A `(phi_bar, u_bar)` entry is invalid (non-finite, negative, or
    /// `phi_bar > 1`).
    BadEntry { nest: usize, index: usize },
    /// The final row of a nest is not the `(0, 0)` empty-singleton row.
    MissingEmptyRow { nest: usize },
    /// The table has no nests.
    Empty,
    /// The search space exceeds the configured cap.
    CapExceeded { size: u64, cap: u64 },
}

impl fmt::Display for OptimizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizerError::BadEntry { nest, index } => {
                write!(f, "invalid (phi, u) entry at nest {nest}, row {index}")
            }
            OptimizerError::MissingEmptyRow { nest } => {
                write!(f, "nest {nest} lacks a trailing (0, 0) empty row")
            }
            OptimizerError::Empty => write!(f, "table has no nests"),
            OptimizerError::CapExceeded { size, cap } => {
                write!(f, "search space of {size} candidates exceeds cap {cap}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OptimizerError {}

/// Per-(nest, singleton) optimizer inputs: mean revenue `phi_bar` in `[0, 1]`
/// and weight `u_bar >= 0`, with the empty singleton pinned to `(0, 0)` as
/// the last row of each nest.
///
/// Tables with `phi_bar > 1` are rejected: the binary-search dichotomy is
/// only valid for objectives bounded by 1. Every cell access bumps an atomic
/// read counter so complexity claims can be asserted in tests.
#[derive(Debug)]
pub struct SingletonValueTable {
    rows: Vec<Vec<(f64, f64)>>,
    reads: AtomicU64,
}

impl SingletonValueTable {
    /// Validates and wraps raw `(phi_bar, u_bar)` rows.
    pub fn from_rows(rows: Vec<Vec<(f64, f64)>>) -> Result<Self, OptimizerError> {
        if rows.is_empty() {
            return Err(OptimizerError::Empty);
        }
        for (nest, row) in rows.iter().enumerate() {
            for (index, &(phi, u)) in row.iter().enumerate() {
                if !phi.is_finite() || !u.is_finite() || !(0.0..=1.0).contains(&phi) || u < 0.0 {
                    return Err(OptimizerError::BadEntry { nest, index });
                }
            }
            match row.last() {
                Some(&(0.0, 0.0)) => {}
                _ => return Err(OptimizerError::MissingEmptyRow { nest }),
            }
        }
        Ok(Self {
            rows,
            reads: AtomicU64::new(0),
        })
    }

    /// Ground-truth table for a catalog: `(phi, u)` from the instance
    /// parameters.
    pub fn from_true_params(
        instance: &NestedLogitInstance,
        catalog: &SingletonCatalog,
    ) -> Self {
        let rows = (0..catalog.num_nests())
            .map(|nest| {
                catalog
                    .nest(nest)
                    .iter()
                    .map(|s| {
                        let (u, phi) = singleton_params(instance, nest, s);
                        (phi, u)
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(rows).expect("true parameters always form a valid table")
    }

    /// Upper-band table for a learner's current state.
    pub fn from_policy_state(state: &PolicyState) -> Self {
        Self::from_rows(state.band_rows()).expect("policy bands always form a valid table")
    }

    pub fn num_nests(&self) -> usize {
        self.rows.len()
    }

    /// Number of singletons in one nest.
    pub fn nest_len(&self, nest: usize) -> usize {
        self.rows[nest].len()
    }

    /// Index of the empty singleton (last row).
    pub fn empty_index(&self, nest: usize) -> usize {
        self.rows[nest].len() - 1
    }

    /// Reads one `(phi_bar, u_bar)` cell, counting the access.
    pub fn get(&self, nest: usize, index: usize) -> (f64, f64) {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.rows[nest][index]
    }

    /// Table reads since construction or the last reset.
    pub fn read_count(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn reset_read_count(&self) {
        self.reads.store(0, Ordering::Relaxed);
    }

    /// Objective `R(theta)` evaluated directly on the table.
    pub fn objective(&self, theta: &[usize]) -> f64 {
        debug_assert_eq!(theta.len(), self.rows.len());
        let mut num = 0.0;
        let mut den = 1.0;
        for (nest, &index) in theta.iter().enumerate() {
            let (phi, u) = self.get(nest, index);
            num += phi * u;
            den += u;
        }
        num / den
    }
}

/// An optimizer result: a threshold vector and its objective value,
/// recomputed directly from the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub theta: Vec<usize>,
    pub value: f64,
}

/// Potential `psi_lambda(theta) = sum_i (phi_bar - lambda) * u_bar`.
pub fn potential(table: &SingletonValueTable, theta: &[usize], lambda: f64) -> f64 {
    debug_assert_eq!(theta.len(), table.num_nests());
    theta
        .iter()
        .enumerate()
        .map(|(nest, &index)| {
            let (phi, u) = table.get(nest, index);
            (phi - lambda) * u
        })
        .sum()
}

/// Separable maximization of the potential: each nest independently takes
/// the row maximizing `(phi_bar - lambda) * u_bar`.
///
/// The empty singleton's 0 is the baseline, so the per-nest contribution is
/// never negative; a finite row wins only on strict improvement, and among
/// equal finite rows the earliest (largest threshold) wins.
pub fn maximize_potential(table: &SingletonValueTable, lambda: f64) -> (Vec<usize>, f64) {
    let mut theta = Vec::with_capacity(table.num_nests());
    let mut total = 0.0;
    for nest in 0..table.num_nests() {
        let mut best_index = table.empty_index(nest);
        let mut best_value = 0.0;
        for index in 0..table.nest_len(nest) {
            let (phi, u) = table.get(nest, index);
            let value = (phi - lambda) * u;
            if value > best_value {
                best_value = value;
                best_index = index;
            }
        }
        theta.push(best_index);
        total += best_value;
    }
    (theta, total)
}

/// Binary search for the catalog optimum.
///
/// Runs `ceil(log2(1/epsilon_bs))` bisection steps on `lambda in [0, 1]`,
/// keeping the invariant that the optimum lies in `[lo, hi]`: the maximized
/// potential exceeds `lambda` exactly when the optimum does. The final
/// vector is the potential argmax at the last midpoint, or at `lo` if that
/// evaluates better; the value is the objective of the returned vector, so
/// it is within `epsilon_bs` of the true optimum and never above it.
pub fn binary_search_optimum(table: &SingletonValueTable, epsilon_bs: f64) -> Optimum {
    assert!(
        epsilon_bs > 0.0 && epsilon_bs.is_finite(),
        "epsilon_bs must be positive"
    );
    let iterations = bisection_steps(epsilon_bs);
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        let (theta, psi) = maximize_potential(table, mid);
        let _ = theta;
        if psi > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (theta_mid, _) = maximize_potential(table, 0.5 * (lo + hi));
    let value_mid = table.objective(&theta_mid);
    let (theta_lo, _) = maximize_potential(table, lo);
    let value_lo = table.objective(&theta_lo);
    if value_lo > value_mid {
        Optimum {
            theta: theta_lo,
            value: value_lo,
        }
    } else {
        Optimum {
            theta: theta_mid,
            value: value_mid,
        }
    }
}

/// Smallest `k` with `2^-k <= epsilon`.
fn bisection_steps(epsilon: f64) -> u32 {
    let mut width = 1.0;
    for k in 1..=64 {
        width *= 0.5;
        if width <= epsilon {
            return k;
        }
    }
    64
}

/// Exhaustive maximization over the catalog product, using the default cap.
pub fn brute_force_optimum(table: &SingletonValueTable) -> Result<Optimum, OptimizerError> {
    brute_force_optimum_with_cap(table, BRUTE_FORCE_CAP)
}

/// Exhaustive maximization over the catalog product.
///
/// Scans vectors in lexicographic row order (nest 0 outermost); ties keep
/// the first maximizer.
pub fn brute_force_optimum_with_cap(
    table: &SingletonValueTable,
    cap: u64,
) -> Result<Optimum, OptimizerError> {
    let mut size: u64 = 1;
    for nest in 0..table.num_nests() {
        size = size.saturating_mul(table.nest_len(nest) as u64);
        if size > cap {
            return Err(OptimizerError::CapExceeded { size, cap });
        }
    }

    let m = table.num_nests();
    let mut theta = alloc::vec![0usize; m];
    let mut best = Optimum {
        theta: theta.clone(),
        value: table.objective(&theta),
    };
    while advance(&mut theta, |nest| table.nest_len(nest)) {
        let value = table.objective(&theta);
        if value > best.value {
            best = Optimum {
                theta: theta.clone(),
                value,
            };
        }
    }
    Ok(best)
}

/// Exhaustive maximization of expected revenue over every assortment
/// combination (all `(2^N)^M` of them), using the default cap.
pub fn brute_force_full_space(
    instance: &NestedLogitInstance,
) -> Result<(AssortmentCombination, f64), OptimizerError> {
    brute_force_full_space_with_cap(instance, FULL_SPACE_CAP)
}

/// Exhaustive maximization of expected revenue over every assortment
/// combination.
///
/// Subsets are enumerated as bitmasks in ascending order per nest, nest 0
/// outermost; ties keep the first maximizer. Per-nest `(u, phi)` terms are
/// precomputed for all bitmasks so each candidate costs `O(M)`.
pub fn brute_force_full_space_with_cap(
    instance: &NestedLogitInstance,
    cap: u64,
) -> Result<(AssortmentCombination, f64), OptimizerError> {
    let m = instance.num_nests();
    let n = instance.num_items();
    if n >= 63 {
        return Err(OptimizerError::CapExceeded {
            size: u64::MAX,
            cap,
        });
    }
    let masks_per_nest: u64 = 1 << n;
    let mut size: u64 = 1;
    for _ in 0..m {
        size = size.saturating_mul(masks_per_nest);
        if size > cap {
            return Err(OptimizerError::CapExceeded { size, cap });
        }
    }

    // (u, phi * u) per (nest, bitmask)
    let mut terms = Vec::with_capacity(m);
    for nest in 0..m {
        let mut per_mask = Vec::with_capacity(masks_per_nest as usize);
        for mask in 0..masks_per_nest {
            let subset = mask_to_subset(mask, n);
            let (u, phi) = instance.nest_terms(nest, &subset);
            per_mask.push((u, phi * u));
        }
        terms.push(per_mask);
    }

    let mut masks = alloc::vec![0u64; m];
    let mut best_masks = masks.clone();
    let mut best_value = 0.0; // all-empty combination
    loop {
        let mut num = 0.0;
        let mut den = 1.0;
        for (nest, &mask) in masks.iter().enumerate() {
            let (u, phi_u) = terms[nest][mask as usize];
            num += phi_u;
            den += u;
        }
        let value = num / den;
        if value > best_value {
            best_value = value;
            best_masks.copy_from_slice(&masks);
        }
        // odometer with nest M-1 fastest
        let mut nest = m;
        loop {
            if nest == 0 {
                let subsets = best_masks
                    .iter()
                    .map(|&mask| mask_to_subset(mask, n))
                    .collect();
                return Ok((
                    AssortmentCombination::from_sorted_unchecked(subsets),
                    best_value,
                ));
            }
            nest -= 1;
            masks[nest] += 1;
            if masks[nest] < masks_per_nest {
                break;
            }
            masks[nest] = 0;
        }
    }
}

fn mask_to_subset(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|j| mask & (1 << j) != 0).collect()
}

/// Lexicographic odometer over per-nest row counts; returns false after the
/// last vector.
fn advance(theta: &mut [usize], len: impl Fn(usize) -> usize) -> bool {
    let mut nest = theta.len();
    while nest > 0 {
        nest -= 1;
        theta[nest] += 1;
        if theta[nest] < len(nest) {
            return true;
        }
        theta[nest] = 0;
    }
    false
}
