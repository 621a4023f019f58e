//! Epoch-based upper-confidence-bound assortment policy.
//!
//! The learner never estimates item-level parameters. It works on the
//! singleton catalog and keeps, per (nest, singleton), aggregated estimates
//! of the weight `u = V^gamma` and the mean revenue `phi = R`:
//!
//! - an *epoch* offers one fixed combination until a customer takes the
//!   outside option (or the horizon ends);
//! - the per-epoch purchase count of a nest is geometric with mean `u`,
//!   independent of what the other nests offer, so epoch counts average to
//!   unbiased estimates `u_hat` and `phi_hat`;
//! - upper bands `u_bar`, `phi_bar` stay at their optimistic ceilings `(U, 1)`
//!   until a cell has been offered `96 ln(2MTK)` epochs, then shrink as
//!
//! ```text
//! u_bar   = min{U, u_hat + sqrt(96 max(u_hat, u_hat^2) ln(2MTK) / T_c)
//!               + 144 ln(2MTK) / T_c}
//! phi_bar = min{1, phi_hat + sqrt(ln(2MTK) / (T_c u_hat))}
//! ```
//!
//! with `T_c` the cell's epoch count. Each epoch offers the band-optimal
//! combination found by [`binary_search_optimum`]. Regret is accounted
//! against the true optimum exactly, from model parameters, never from
//! realized revenue.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::levelset::{LevelSetError, SingletonCatalog};
use crate::math;
use crate::model::NestedLogitInstance;
use crate::optimizer::{binary_search_optimum, SingletonValueTable};

/// Binary-search precision used when computing the reference optimum for
/// regret accounting.
pub const R_STAR_EPSILON: f64 = 1e-9;

/// Tunables of one policy run.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    /// Upper bound `U` on every singleton weight `u`.
    pub u_upper: f64,
    /// Horizon `T` (number of periods).
    pub horizon: u64,
    /// Level-set discretization granularity; 0 disables discretization.
    pub delta: f64,
    /// Precision of the per-epoch binary-search optimization.
    pub epsilon_bs: f64,
    /// `K` used inside the `ln(2MTK)` terms. `None` takes the max catalog
    /// size for the granularity actually used.
    pub k_value: Option<usize>,
}

impl PolicyConfig {
    pub fn new(u_upper: f64, horizon: u64) -> Self {
        Self {
            u_upper,
            horizon,
            delta: 0.0,
            epsilon_bs: 1e-9,
            k_value: None,
        }
    }

    /// The default weight bound for an instance: `max(N * C_V, 1)`.
    ///
    /// `V <= N C_V` always, so `V^gamma <= max(N C_V, 1)` for any
    /// `gamma in [0, 1]` (the 1 covers declared bounds below one, where
    /// raising to a power below one can only move the weight up to 1).
    pub fn default_u_upper(instance: &NestedLogitInstance) -> f64 {
        (instance.num_items() as f64 * instance.c_v()).max(1.0)
    }

    fn assert_valid(&self) {
        assert!(
            self.u_upper.is_finite() && self.u_upper > 0.0,
            "u_upper must be positive"
        );
        assert!(self.horizon >= 1, "horizon must be at least 1");
        assert!(
            self.epsilon_bs > 0.0 && self.epsilon_bs.is_finite(),
            "epsilon_bs must be positive"
        );
    }
}

/// Aggregated statistics of one (nest, singleton) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    /// Number of epochs in which this singleton was offered.
    pub epoch_count: u64,
    /// Total purchases observed across those epochs.
    pub purchase_sum: u64,
    /// Total revenue collected across those epochs.
    pub revenue_sum: f64,
    /// Mean purchases per epoch (initialized optimistically to `U`).
    pub u_hat: f64,
    /// Mean revenue per purchase (initialized optimistically to 1).
    pub phi_hat: f64,
    /// Upper band on `u`.
    pub u_bar: f64,
    /// Upper band on `phi`.
    pub phi_bar: f64,
}

/// Mutable learner state: one [`CellState`] per (nest, singleton), the
/// current offered threshold vector, and the epoch/period counters.
#[derive(Debug, Clone)]
pub struct PolicyState {
    cells: Vec<Vec<CellState>>,
    current_theta: Vec<usize>,
    epoch_index: u64,
    periods_elapsed: u64,
    /// `ln(2 M T K)`, fixed at construction.
    log_term: f64,
    /// Band-activation threshold `96 ln(2MTK)` on a cell's epoch count.
    activation: f64,
}

impl PolicyState {
    /// Fresh optimistic state for a catalog.
    ///
    /// Every real cell starts at `(u_hat, phi_hat, u_bar, phi_bar) =
    /// (U, 1, U, 1)`; empty-singleton cells are pinned to all zeros and
    /// never move.
    pub fn new(
        instance: &NestedLogitInstance,
        catalog: &SingletonCatalog,
        config: &PolicyConfig,
    ) -> Self {
        config.assert_valid();
        let m = catalog.num_nests();
        assert_eq!(m, instance.num_nests(), "catalog built for this instance");
        let k = config.k_value.unwrap_or_else(|| catalog.k_max());
        let log_term = math::ln(2.0 * m as f64 * config.horizon as f64 * k as f64);
        let activation = 96.0 * log_term;
        let u = config.u_upper;
        let cells = (0..m)
            .map(|nest| {
                let len = catalog.nest(nest).len();
                (0..len)
                    .map(|idx| {
                        if idx + 1 == len {
                            CellState {
                                epoch_count: 0,
                                purchase_sum: 0,
                                revenue_sum: 0.0,
                                u_hat: 0.0,
                                phi_hat: 0.0,
                                u_bar: 0.0,
                                phi_bar: 0.0,
                            }
                        } else {
                            CellState {
                                epoch_count: 0,
                                purchase_sum: 0,
                                revenue_sum: 0.0,
                                u_hat: u,
                                phi_hat: 1.0,
                                u_bar: u,
                                phi_bar: 1.0,
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            cells,
            current_theta: (0..m).map(|nest| catalog.empty_index(nest)).collect(),
            epoch_index: 0,
            periods_elapsed: 0,
            log_term,
            activation,
        }
    }

    pub fn cell(&self, nest: usize, index: usize) -> &CellState {
        &self.cells[nest][index]
    }

    /// Completed epochs.
    pub fn epoch_index(&self) -> u64 {
        self.epoch_index
    }

    /// Periods played so far.
    pub fn periods_elapsed(&self) -> u64 {
        self.periods_elapsed
    }

    /// The threshold vector chosen for the current epoch.
    pub fn current_theta(&self) -> &[usize] {
        &self.current_theta
    }

    /// `ln(2MTK)` as fixed at construction.
    pub fn log_term(&self) -> f64 {
        self.log_term
    }

    /// Epoch-count threshold at which a cell's bands activate.
    pub fn activation_threshold(&self) -> f64 {
        self.activation
    }

    /// True if a cell has been offered often enough for its bands to be
    /// data-driven rather than at the optimistic ceiling.
    pub fn band_active(&self, nest: usize, index: usize) -> bool {
        self.cells[nest][index].epoch_count as f64 >= self.activation
    }

    /// Current `(phi_bar, u_bar)` rows, the optimizer's input.
    pub fn band_rows(&self) -> Vec<Vec<(f64, f64)>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|c| (c.phi_bar, c.u_bar)).collect())
            .collect()
    }

    /// Overrides the offered vector for the next epoch. Mainly useful for
    /// driving epochs with externally chosen assortments.
    pub fn force_assortment(&mut self, theta: Vec<usize>) {
        assert_eq!(theta.len(), self.cells.len());
        self.current_theta = theta;
    }

    /// Picks the combination for the next epoch by maximizing the band
    /// objective over the catalog, and records it as current.
    pub fn select_epoch_assortment(
        &mut self,
        config: &PolicyConfig,
        catalog: &SingletonCatalog,
    ) -> Vec<usize> {
        debug_assert_eq!(catalog.num_nests(), self.cells.len());
        let table = SingletonValueTable::from_policy_state(self);
        let optimum = binary_search_optimum(&table, config.epsilon_bs);
        self.current_theta = optimum.theta.clone();
        optimum.theta
    }

    /// Plays one epoch with the current vector, advancing the period counter.
    pub fn run_epoch<R: Rng + ?Sized>(
        &mut self,
        config: &PolicyConfig,
        catalog: &SingletonCatalog,
        instance: &NestedLogitInstance,
        rng: &mut R,
    ) -> EpochRecord {
        assert!(
            self.periods_elapsed < config.horizon,
            "horizon already exhausted"
        );
        let remaining = config.horizon - self.periods_elapsed;
        let record = sample_epoch(instance, catalog, &self.current_theta, remaining, rng);
        self.periods_elapsed += record.length;
        record
    }

    /// Folds one epoch's observations into the estimates and bands.
    ///
    /// Only the offered (nest, singleton) cells move; empty-singleton cells
    /// stay pinned at zero. Cells below the activation threshold keep the
    /// ceiling bands `(U, 1)`. A cell with no purchases yet keeps its
    /// optimistic `phi_hat = 1`, and a zero `u_hat` forces `phi_bar = 1`
    /// (no revenue information without purchases).
    pub fn update_estimates(&mut self, config: &PolicyConfig, record: &EpochRecord) {
        debug_assert_eq!(record.theta.len(), self.cells.len());
        for (nest, &index) in record.theta.iter().enumerate() {
            if index + 1 == self.cells[nest].len() {
                continue; // empty singleton, pinned
            }
            let activation = self.activation;
            let log_term = self.log_term;
            let u_upper = config.u_upper;
            let cell = &mut self.cells[nest][index];
            cell.epoch_count += 1;
            cell.purchase_sum += record.n_hat[nest];
            cell.revenue_sum += record.r_hat[nest];
            cell.u_hat = cell.purchase_sum as f64 / cell.epoch_count as f64;
            if cell.purchase_sum > 0 {
                cell.phi_hat = cell.revenue_sum / cell.purchase_sum as f64;
            }
            if cell.epoch_count as f64 >= activation {
                let (u_bar, phi_bar) =
                    confidence_bands(cell.u_hat, cell.phi_hat, cell.epoch_count, log_term, u_upper);
                cell.u_bar = u_bar;
                cell.phi_bar = phi_bar;
            } else {
                cell.u_bar = u_upper;
                cell.phi_bar = 1.0;
            }
        }
        self.epoch_index += 1;
    }
}

/// Post-activation confidence bands for one cell.
fn confidence_bands(
    u_hat: f64,
    phi_hat: f64,
    epoch_count: u64,
    log_term: f64,
    u_upper: f64,
) -> (f64, f64) {
    let t_c = epoch_count as f64;
    let spread = u_hat.max(u_hat * u_hat);
    let u_bar =
        (u_hat + math::sqrt(96.0 * spread * log_term / t_c) + 144.0 * log_term / t_c).min(u_upper);
    let phi_bar = if u_hat > 0.0 {
        (phi_hat + math::sqrt(log_term / (t_c * u_hat))).min(1.0)
    } else {
        1.0
    };
    (u_bar, phi_bar)
}

/// One epoch's observations.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// Purchases per nest during the epoch.
    pub n_hat: Vec<u64>,
    /// Revenue collected per nest during the epoch.
    pub r_hat: Vec<f64>,
    /// Number of periods the epoch lasted.
    pub length: u64,
    /// The singleton index offered in each nest.
    pub theta: Vec<usize>,
    /// True if the epoch was cut off by the horizon instead of ending with a
    /// no-purchase.
    pub truncated: bool,
}

/// Plays one epoch of a fixed threshold vector: the same combination is
/// offered every period until a no-purchase or until `max_periods` runs out.
///
/// This is the sampling primitive behind [`PolicyState::run_epoch`]; it can
/// be driven directly with arbitrary (even per-epoch randomized) vectors.
///
/// # Panics
/// If `theta` is not a valid vector for `catalog` or `max_periods` is 0.
pub fn sample_epoch<R: Rng + ?Sized>(
    instance: &NestedLogitInstance,
    catalog: &SingletonCatalog,
    theta: &[usize],
    max_periods: u64,
    rng: &mut R,
) -> EpochRecord {
    assert!(max_periods >= 1, "an epoch plays at least one period");
    let combination = catalog
        .to_combination(theta)
        .expect("theta must index this catalog");
    let m = instance.num_nests();
    let mut n_hat = vec![0u64; m];
    let mut r_hat = vec![0.0; m];
    let mut length = 0u64;
    let mut truncated = true;
    while length < max_periods {
        let outcome = instance.sample_choice(&combination, rng);
        length += 1;
        match outcome {
            crate::model::ChoiceOutcome::Purchase { nest, revenue, .. } => {
                n_hat[nest] += 1;
                r_hat[nest] += revenue;
            }
            crate::model::ChoiceOutcome::NoPurchase => {
                truncated = false;
                break;
            }
        }
    }
    EpochRecord {
        n_hat,
        r_hat,
        length,
        theta: theta.to_vec(),
        truncated,
    }
}

/// Cumulative expected regret at a grid of checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    /// `(t, cumulative regret after t periods)`, non-decreasing, ending at
    /// the horizon.
    pub checkpoints: Vec<(u64, f64)>,
    /// Epochs the run used.
    pub epochs_used: u64,
    /// Epochs cut short by the horizon (0 or 1).
    pub truncated_epochs: u64,
}

impl RegretCurve {
    /// Cumulative regret over the whole horizon.
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map(|&(_, r)| r).unwrap_or(0.0)
    }
}

/// The checkpoint grid: powers of two up to the horizon, plus the horizon.
pub fn checkpoint_grid(horizon: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut t = 1u64;
    while t < horizon {
        grid.push(t);
        t = t.saturating_mul(2);
    }
    grid.push(horizon);
    grid
}

/// Runs the full learning loop over `T` periods and returns the regret
/// curve.
///
/// The catalog is built at the configured granularity; the reference optimum
/// for regret accounting always comes from the undiscretized catalog with
/// true parameters.
pub fn run_policy<R: Rng + ?Sized>(
    instance: &NestedLogitInstance,
    config: &PolicyConfig,
    rng: &mut R,
) -> Result<RegretCurve, LevelSetError> {
    let catalog = SingletonCatalog::build(instance, config.delta)?;
    let r_star = reference_optimum(instance, &catalog);
    Ok(run_policy_with_catalog(
        instance, config, &catalog, r_star, rng,
    ))
}

/// The true optimal expected revenue, from the undiscretized catalog.
///
/// If `catalog` is itself undiscretized it is reused, otherwise the delta-0
/// catalog is built on the fly.
pub fn reference_optimum(instance: &NestedLogitInstance, catalog: &SingletonCatalog) -> f64 {
    if catalog.granularity() == 0.0 {
        let table = SingletonValueTable::from_true_params(instance, catalog);
        binary_search_optimum(&table, R_STAR_EPSILON).value
    } else {
        let full = SingletonCatalog::build(instance, 0.0).expect("delta 0 is always valid");
        let table = SingletonValueTable::from_true_params(instance, &full);
        binary_search_optimum(&table, R_STAR_EPSILON).value
    }
}

/// [`run_policy`] with a caller-supplied catalog and reference optimum.
///
/// `catalog` must be built for `instance` at `config.delta`.
pub fn run_policy_with_catalog<R: Rng + ?Sized>(
    instance: &NestedLogitInstance,
    config: &PolicyConfig,
    catalog: &SingletonCatalog,
    r_star: f64,
    rng: &mut R,
) -> RegretCurve {
    let grid = checkpoint_grid(config.horizon);
    run_policy_with_catalog_at(instance, config, catalog, r_star, &grid, rng)
}

/// [`run_policy_with_catalog`] with an explicit checkpoint grid.
///
/// `grid` must be strictly ascending, within `1..=horizon`, and end at the
/// horizon.
pub fn run_policy_with_catalog_at<R: Rng + ?Sized>(
    instance: &NestedLogitInstance,
    config: &PolicyConfig,
    catalog: &SingletonCatalog,
    r_star: f64,
    grid: &[u64],
    rng: &mut R,
) -> RegretCurve {
    assert!(
        grid.windows(2).all(|w| w[0] < w[1]),
        "checkpoint grid must be strictly ascending"
    );
    assert_eq!(
        grid.last().copied(),
        Some(config.horizon),
        "checkpoint grid must end at the horizon"
    );
    assert!(grid[0] >= 1);

    let mut state = PolicyState::new(instance, catalog, config);
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut grid_pos = 0;
    let mut cumulative = 0.0;
    let mut truncated_epochs = 0u64;

    while state.periods_elapsed() < config.horizon {
        let theta = state.select_epoch_assortment(config, catalog);
        let combination = catalog
            .to_combination(&theta)
            .expect("selected vector indexes the catalog");
        let gap = instance.per_period_regret(&combination, r_star);

        let epoch_start = state.periods_elapsed() + 1;
        let record = state.run_epoch(config, catalog, instance, rng);
        let epoch_end = state.periods_elapsed();
        truncated_epochs += u64::from(record.truncated);

        while grid_pos < grid.len() && grid[grid_pos] <= epoch_end {
            let t = grid[grid_pos];
            checkpoints.push((t, cumulative + gap * (t - epoch_start + 1) as f64));
            grid_pos += 1;
        }
        cumulative += gap * record.length as f64;

        state.update_estimates(config, &record);
    }

    RegretCurve {
        checkpoints,
        epochs_used: state.epoch_index(),
        truncated_epochs,
    }
}
