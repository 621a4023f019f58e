//! Revenue-ordered level sets and singleton catalogs.
//!
//! For nest `i` and threshold `theta`, the level set `L_i(theta)` is the set
//! of items with revenue at least `theta`. Some optimal assortment
//! combination uses only level sets, so every policy here works over the
//! per-nest *singleton catalog*: each level set collapsed to one aggregate
//! item with weight `u = V^gamma` and mean revenue `phi = R_i`.
//!
//! With granularity `delta = 0` the catalog holds one singleton per distinct
//! revenue value plus the empty singleton. With `delta > 0` only thresholds
//! on the grid `{0, delta, 2 delta, ...} ∩ [0, 1]` are kept, shrinking the
//! catalog to at most `floor(1/delta) + 2` entries at an expected-revenue
//! loss of at most `delta`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::model::{AssortmentCombination, NestedLogitInstance};

/// Error from catalog construction or lookup.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSetError {
    /// Granularity outside `[0, 1)`.
    BadGranularity(f64),
    /// A singleton index does not exist in the referenced nest catalog.
    UnknownSingleton { nest: usize, index: usize },
    /// Threshold vector length does not match the number of nests.
    Shape(String),
}

impl fmt::Display for LevelSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSetError::BadGranularity(d) => {
                write!(f, "granularity {d} outside [0, 1)")
            }
            LevelSetError::UnknownSingleton { nest, index } => {
                write!(f, "singleton {index} not in catalog for nest {nest}")
            }
            LevelSetError::Shape(msg) => write!(f, "shape error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LevelSetError {}

/// One level set treated as an aggregate item.
///
/// `threshold` is finite for real level sets and `f64::INFINITY` for the
/// empty singleton (offer nothing in this nest).
#[derive(Debug, Clone, PartialEq)]
pub struct Singleton {
    threshold: f64,
    /// Sorted item indices with revenue >= threshold; empty iff infinite.
    members: Vec<usize>,
}

impl Singleton {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// True for the empty singleton (infinite threshold).
    pub fn is_empty(&self) -> bool {
        self.threshold.is_infinite()
    }
}

/// Per-nest lists of singletons, ordered by descending threshold with the
/// empty singleton last.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletonCatalog {
    per_nest: Vec<Vec<Singleton>>,
    granularity: f64,
    k_max: usize,
}

impl SingletonCatalog {
    /// Builds the catalog for an instance at the given granularity.
    ///
    /// `delta = 0` keeps every distinct level set; `delta > 0` keeps level
    /// sets whose thresholds are integer multiples of `delta` in `[0, 1]`,
    /// deduplicated so member sets are pairwise distinct (the largest grid
    /// threshold producing a given member set is kept). Grid thresholds whose
    /// level set is empty are dropped; the empty assortment is represented
    /// only by the infinite-threshold singleton, which every nest carries.
    pub fn build(instance: &NestedLogitInstance, delta: f64) -> Result<Self, LevelSetError> {
        if !delta.is_finite() || !(0.0..1.0).contains(&delta) {
            return Err(LevelSetError::BadGranularity(delta));
        }
        let mut per_nest = Vec::with_capacity(instance.num_nests());
        for nest in 0..instance.num_nests() {
            let revenues = instance.nest_revenues(nest);
            let singletons = if delta == 0.0 {
                distinct_level_sets(revenues)
            } else {
                grid_level_sets(revenues, delta)
            };
            per_nest.push(singletons);
        }
        let k_max = per_nest.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            per_nest,
            granularity: delta,
            k_max,
        })
    }

    pub fn num_nests(&self) -> usize {
        self.per_nest.len()
    }

    pub fn granularity(&self) -> f64 {
        self.granularity
    }

    /// Largest per-nest catalog size.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Singletons of one nest, descending threshold, empty singleton last.
    pub fn nest(&self, nest: usize) -> &[Singleton] {
        &self.per_nest[nest]
    }

    pub fn singleton(&self, nest: usize, index: usize) -> &Singleton {
        &self.per_nest[nest][index]
    }

    /// Index of the empty singleton in a nest (always the last entry).
    pub fn empty_index(&self, nest: usize) -> usize {
        self.per_nest[nest].len() - 1
    }

    /// The all-empty threshold vector.
    pub fn all_empty(&self) -> Vec<usize> {
        (0..self.num_nests()).map(|i| self.empty_index(i)).collect()
    }

    /// Converts a threshold vector (one singleton index per nest) into the
    /// assortment combination made of the singletons' member sets.
    pub fn to_combination(
        &self,
        theta: &[usize],
    ) -> Result<AssortmentCombination, LevelSetError> {
        if theta.len() != self.num_nests() {
            return Err(LevelSetError::Shape(alloc::format!(
                "threshold vector has {} entries for {} nests",
                theta.len(),
                self.num_nests()
            )));
        }
        let mut subsets = Vec::with_capacity(theta.len());
        for (nest, &index) in theta.iter().enumerate() {
            let row = &self.per_nest[nest];
            let singleton = row
                .get(index)
                .ok_or(LevelSetError::UnknownSingleton { nest, index })?;
            subsets.push(singleton.members().to_vec());
        }
        Ok(AssortmentCombination::from_sorted_unchecked(subsets))
    }
}

/// Ground-truth singleton parameters `(u, phi) = (V(L)^gamma, R(L))`.
///
/// The empty singleton maps to `(0, 0)`, as does any level set with zero
/// total preference (all padding).
pub fn singleton_params(
    instance: &NestedLogitInstance,
    nest: usize,
    singleton: &Singleton,
) -> (f64, f64) {
    instance.nest_terms(nest, singleton.members())
}

/// All distinct level sets of one nest: one singleton per distinct revenue
/// value (descending), then the empty singleton.
fn distinct_level_sets(revenues: &[f64]) -> Vec<Singleton> {
    let mut thresholds: Vec<f64> = revenues.to_vec();
    thresholds.sort_unstable_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = Vec::with_capacity(thresholds.len() + 1);
    for &theta in &thresholds {
        out.push(Singleton {
            threshold: theta,
            members: level_set_members(revenues, theta),
        });
    }
    out.push(Singleton {
        threshold: f64::INFINITY,
        members: Vec::new(),
    });
    out
}

/// Level sets with thresholds on the grid `{k * delta} ∩ [0, 1]`, largest
/// grid threshold kept per distinct member set, empty sets dropped.
///
/// The member set only changes at grid points just below some revenue, so
/// it suffices to snap each distinct revenue down to its grid point instead
/// of scanning the whole grid (which would be unbounded work for tiny
/// `delta`).
fn grid_level_sets(revenues: &[f64], delta: f64) -> Vec<Singleton> {
    let mut distinct: Vec<f64> = revenues.to_vec();
    distinct.sort_unstable_by(|a, b| b.total_cmp(a));
    distinct.dedup();

    let mut out: Vec<Singleton> = Vec::new();
    let mut last_theta = f64::INFINITY;
    for revenue in distinct {
        let theta = math::floor(revenue / delta) * delta;
        // same grid bin as a higher revenue: same level set, already kept
        if theta >= last_theta {
            continue;
        }
        last_theta = theta;
        out.push(Singleton {
            threshold: theta,
            members: level_set_members(revenues, theta),
        });
    }
    out.push(Singleton {
        threshold: f64::INFINITY,
        members: Vec::new(),
    });
    out
}

fn level_set_members(revenues: &[f64], theta: f64) -> Vec<usize> {
    revenues
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= theta)
        .map(|(j, _)| j)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NestedLogitInstance;
    use approx::assert_abs_diff_eq;

    fn nest(revs: Vec<f64>, gamma: f64) -> NestedLogitInstance {
        let n = revs.len();
        NestedLogitInstance::new(vec![revs], vec![alloc::vec![1.0; n]], vec![gamma], 10.0).unwrap()
    }

    #[test]
    fn undiscretized_catalog_from_distinct_revenues() {
        let inst = nest(vec![0.9, 0.5, 0.7], 1.0);
        let cat = SingletonCatalog::build(&inst, 0.0).unwrap();
        let row = cat.nest(0);
        assert_eq!(row.len(), 4);
        assert_eq!(row[0].threshold(), 0.9);
        assert_eq!(row[0].members(), &[0]);
        assert_eq!(row[1].threshold(), 0.7);
        assert_eq!(row[1].members(), &[0, 2]);
        assert_eq!(row[2].threshold(), 0.5);
        assert_eq!(row[2].members(), &[0, 1, 2]);
        assert!(row[3].is_empty());
        assert_eq!(cat.k_max(), 4);
    }

    #[test]
    fn tied_revenues_collapse() {
        let inst = nest(vec![0.5, 0.5, 0.9], 1.0);
        let cat = SingletonCatalog::build(&inst, 0.0).unwrap();
        let row = cat.nest(0);
        assert_eq!(row.len(), 3);
        assert_eq!(row[0].members(), &[2]);
        assert_eq!(row[1].members(), &[0, 1, 2]);
        assert!(row[2].is_empty());
    }

    #[test]
    fn grid_catalog_dedups_and_keeps_largest_threshold() {
        let inst = nest(vec![0.9, 0.5, 0.7], 1.0);
        let cat = SingletonCatalog::build(&inst, 0.25).unwrap();
        let row = cat.nest(0);
        // theta = 1.0 is empty (dropped); 0.75 -> {0}; 0.5, 0.25, 0 all give
        // the full set, keeping theta = 0.5.
        assert_eq!(row.len(), 3);
        assert_eq!(row[0].threshold(), 0.75);
        assert_eq!(row[0].members(), &[0]);
        assert_eq!(row[1].threshold(), 0.5);
        assert_eq!(row[1].members(), &[0, 1, 2]);
        assert!(row[2].is_empty());
    }

    #[test]
    fn coarse_grid_over_small_revenues() {
        let inst = nest(vec![0.3, 0.2, 0.4], 1.0);
        let cat = SingletonCatalog::build(&inst, 0.5).unwrap();
        let row = cat.nest(0);
        // 1.0 and 0.5 are empty; 0 gives the full set.
        assert_eq!(row.len(), 2);
        assert_eq!(row[0].threshold(), 0.0);
        assert_eq!(row[0].members(), &[0, 1, 2]);
        assert!(row[1].is_empty());
    }

    #[test]
    fn catalog_size_bound() {
        let inst = nest((0..50).map(|i| 0.2 + 0.006 * i as f64).collect(), 1.0);
        for &delta in &[0.25, 0.1, 0.01] {
            let cat = SingletonCatalog::build(&inst, delta).unwrap();
            let bound = (51).min((1.0 / delta) as usize + 2);
            assert!(
                cat.k_max() <= bound,
                "delta {delta}: k_max {} > bound {bound}",
                cat.k_max()
            );
        }
        // delta = 0: one entry per distinct revenue plus the empty singleton
        let cat = SingletonCatalog::build(&inst, 0.0).unwrap();
        assert_eq!(cat.k_max(), 51);
    }

    #[test]
    fn rejects_bad_granularity() {
        let inst = nest(vec![0.5], 1.0);
        assert!(SingletonCatalog::build(&inst, 1.0).is_err());
        assert!(SingletonCatalog::build(&inst, -0.1).is_err());
        assert!(SingletonCatalog::build(&inst, f64::NAN).is_err());
    }

    #[test]
    fn singleton_params_examples() {
        // empty singleton -> (0, 0)
        let inst = nest(vec![0.5], 1.0);
        let cat = SingletonCatalog::build(&inst, 0.0).unwrap();
        let empty = cat.singleton(0, cat.empty_index(0));
        assert_eq!(singleton_params(&inst, 0, empty), (0.0, 0.0));

        // gamma = 0.5, r = (1, 0.5), v = (1, 3): u = sqrt(4) = 2, phi = 0.625
        let inst = NestedLogitInstance::new(
            vec![vec![1.0, 0.5]],
            vec![vec![1.0, 3.0]],
            vec![0.5],
            10.0,
        )
        .unwrap();
        let cat = SingletonCatalog::build(&inst, 0.0).unwrap();
        let full = cat.singleton(0, 1);
        assert_eq!(full.members(), &[0, 1]);
        let (u, phi) = singleton_params(&inst, 0, full);
        assert_abs_diff_eq!(u, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi, 0.625, epsilon = 1e-15);

        // gamma = 1, single member: (v, r)
        let top = cat.singleton(0, 0);
        assert_eq!(top.members(), &[0]);
        let inst_g1 = NestedLogitInstance::new(
            vec![vec![1.0, 0.5]],
            vec![vec![1.0, 3.0]],
            vec![1.0],
            10.0,
        )
        .unwrap();
        let (u, phi) = singleton_params(&inst_g1, 0, top);
        assert_eq!((u, phi), (1.0, 1.0));
    }

    #[test]
    fn to_combination_maps_member_sets() {
        let inst = NestedLogitInstance::new(
            vec![vec![0.9, 0.5, 0.7], vec![0.2, 0.8]],
            vec![vec![1.0; 3], vec![1.0; 2]],
            vec![1.0, 1.0],
            10.0,
        )
        .unwrap();
        let cat = SingletonCatalog::build(&inst, 0.0).unwrap();

        let all_empty = cat.to_combination(&cat.all_empty()).unwrap();
        assert!(all_empty.is_all_empty());

        // top threshold in nest 0, full set in nest 1
        let comb = cat.to_combination(&[0, 1]).unwrap();
        assert_eq!(comb.subset(0), &[0]);
        assert_eq!(comb.subset(1), &[0, 1]);

        assert!(cat.to_combination(&[9, 0]).is_err());
        assert!(cat.to_combination(&[0]).is_err());
    }

    #[test]
    fn nesting_chain() {
        let inst = nest(vec![0.31, 0.77, 0.12, 0.55, 0.42], 0.7);
        for &delta in &[0.0, 0.1, 0.3] {
            let cat = SingletonCatalog::build(&inst, delta).unwrap();
            let row = cat.nest(0);
            for pair in row.windows(2) {
                if pair[1].is_empty() {
                    continue;
                }
                // lower threshold -> superset
                let hi: &[usize] = pair[0].members();
                let lo: &[usize] = pair[1].members();
                assert!(hi.iter().all(|j| lo.contains(j)));
                assert!(lo.len() > hi.len());
            }
        }
    }
}
