//! Shared helpers for integration tests.
#![allow(dead_code)]

use nlbandit_core::optimizer::SingletonValueTable;
use nlbandit_core::NestedLogitInstance;
use rand::Rng;

/// Random instance with broad parameter ranges: up to `m_max` nests and
/// `n_max` items, `r ~ U[0, 1]`, `v ~ U[0.05, 2]`, `gamma ~ U[0, 1]`.
pub fn random_instance<R: Rng + ?Sized>(
    m_max: usize,
    n_max: usize,
    rng: &mut R,
) -> NestedLogitInstance {
    let m = rng.random_range(1..=m_max);
    let n = rng.random_range(1..=n_max);
    let revenues = (0..m)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    let preferences = (0..m)
        .map(|_| (0..n).map(|_| 0.05 + 1.95 * rng.random::<f64>()).collect())
        .collect();
    let gammas = (0..m).map(|_| rng.random::<f64>()).collect();
    NestedLogitInstance::new(revenues, preferences, gammas, 2.0).unwrap()
}

/// Random band table: per nest a few `(phi, u)` rows with `phi in [0, 1]`
/// and `u in [0, u_max]`, plus the trailing empty row.
pub fn random_table<R: Rng + ?Sized>(
    m_max: usize,
    k_max: usize,
    u_max: f64,
    rng: &mut R,
) -> SingletonValueTable {
    let m = rng.random_range(1..=m_max);
    let rows = (0..m)
        .map(|_| {
            let k = rng.random_range(1..=k_max);
            let mut row: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.random::<f64>(), u_max * rng.random::<f64>()))
                .collect();
            row.push((0.0, 0.0));
            row
        })
        .collect();
    SingletonValueTable::from_rows(rows).unwrap()
}
