//! Ground-truth nested logit choice model.
//!
//! Products live in `M` nests of `N` items each. Item `j` of nest `i` has a
//! revenue `r_ij` in `[0, 1]` and a positive preference weight `v_ij`; nest
//! `i` has a dissimilarity exponent `gamma_i` in `[0, 1]`. Offered a subset
//! `S_i` per nest, a customer first picks nest `i` with probability
//!
//! ```text
//! V_i(S_i)^gamma_i / (1 + sum_k V_k(S_k)^gamma_k),    V_i(S) = sum_{j in S} v_ij,
//! ```
//!
//! the outside option (weight 1) taking the remainder, and then item `j`
//! inside the chosen nest with probability `v_ij / V_i(S_i)`. Setting all
//! `gamma_i = 1` recovers the plain multinomial logit over the union.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::math;

/// Validation failure when building or querying a [`NestedLogitInstance`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Matrix dimensions are inconsistent or empty.
    Shape(String),
    /// A parameter violates its admissible range.
    Parameter(String),
    /// A nest or item index is out of range.
    IndexOutOfRange { nest: usize, item: Option<usize> },
    /// A subset contains duplicate item indices.
    DuplicateItem { nest: usize, item: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Shape(msg) => write!(f, "shape error: {msg}"),
            ModelError::Parameter(msg) => write!(f, "parameter error: {msg}"),
            ModelError::IndexOutOfRange { nest, item: None } => {
                write!(f, "nest index {nest} out of range")
            }
            ModelError::IndexOutOfRange {
                nest,
                item: Some(item),
            } => write!(f, "item index {item} out of range in nest {nest}"),
            ModelError::DuplicateItem { nest, item } => {
                write!(f, "duplicate item {item} in subset for nest {nest}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// Immutable ground-truth model: revenues, preference weights, and nest
/// dissimilarity exponents, plus the declared preference upper bound `C_V`.
///
/// Padded items (zero preference *and* zero revenue) are allowed so uneven
/// nests can be squared off; they are flagged and exempt from the positivity
/// requirement on preferences. The outside option has fixed weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedLogitInstance {
    num_nests: usize,
    num_items: usize,
    /// Row-major M x N.
    revenues: Vec<f64>,
    /// Row-major M x N.
    preferences: Vec<f64>,
    gammas: Vec<f64>,
    c_v: f64,
    /// Row-major M x N; true where the slot is padding, not a real product.
    padded: Vec<bool>,
}

impl NestedLogitInstance {
    /// Builds an instance from per-nest rows, padding shorter nests with
    /// zero-revenue, zero-preference items.
    ///
    /// Requirements: at least one nest and one item; `0 <= r <= 1`;
    /// `0 < v <= c_v` for real items (`v = 0` marks padding and then `r`
    /// must be 0 too); `0 <= gamma <= 1`; `c_v > 0`.
    pub fn new(
        revenues: Vec<Vec<f64>>,
        preferences: Vec<Vec<f64>>,
        gammas: Vec<f64>,
        c_v: f64,
    ) -> Result<Self, ModelError> {
        let num_nests = revenues.len();
        if num_nests == 0 {
            return Err(ModelError::Shape("need at least one nest".into()));
        }
        if preferences.len() != num_nests || gammas.len() != num_nests {
            return Err(ModelError::Shape(
                "revenues, preferences, and gammas must have one row per nest".into(),
            ));
        }
        let num_items = revenues.iter().map(Vec::len).max().unwrap_or(0);
        if num_items == 0 {
            return Err(ModelError::Shape("need at least one item".into()));
        }
        for (r_row, v_row) in revenues.iter().zip(&preferences) {
            if r_row.len() != v_row.len() {
                return Err(ModelError::Shape(
                    "revenue and preference rows must have equal length".into(),
                ));
            }
        }
        if !c_v.is_finite() || c_v <= 0.0 {
            return Err(ModelError::Parameter("c_v must be positive".into()));
        }

        let mut r_flat = vec![0.0; num_nests * num_items];
        let mut v_flat = vec![0.0; num_nests * num_items];
        let mut padded = vec![true; num_nests * num_items];
        for (i, (r_row, v_row)) in revenues.iter().zip(&preferences).enumerate() {
            for (j, (&r, &v)) in r_row.iter().zip(v_row).enumerate() {
                if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                    return Err(ModelError::Parameter(alloc::format!(
                        "revenue ({i},{j}) = {r} outside [0, 1]"
                    )));
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::Parameter(alloc::format!(
                        "preference ({i},{j}) = {v} must be non-negative"
                    )));
                }
                if v == 0.0 && r != 0.0 {
                    return Err(ModelError::Parameter(alloc::format!(
                        "padded item ({i},{j}) must have zero revenue"
                    )));
                }
                if v > c_v {
                    return Err(ModelError::Parameter(alloc::format!(
                        "preference ({i},{j}) = {v} exceeds declared bound c_v = {c_v}"
                    )));
                }
                let idx = i * num_items + j;
                r_flat[idx] = r;
                v_flat[idx] = v;
                padded[idx] = v == 0.0;
            }
        }
        for (i, &g) in gammas.iter().enumerate() {
            if !g.is_finite() || !(0.0..=1.0).contains(&g) {
                return Err(ModelError::Parameter(alloc::format!(
                    "gamma {i} = {g} outside [0, 1]"
                )));
            }
        }

        Ok(Self {
            num_nests,
            num_items,
            revenues: r_flat,
            preferences: v_flat,
            gammas,
            c_v,
            padded,
        })
    }

    /// Builds an instance from flat row-major matrices, as stored on disk.
    pub fn from_flat(
        num_nests: usize,
        num_items: usize,
        revenues: &[f64],
        preferences: &[f64],
        gammas: &[f64],
        c_v: f64,
    ) -> Result<Self, ModelError> {
        if revenues.len() != num_nests * num_items || preferences.len() != num_nests * num_items {
            return Err(ModelError::Shape(
                "flat matrices must have num_nests * num_items entries".into(),
            ));
        }
        let to_rows = |flat: &[f64]| {
            flat.chunks(num_items)
                .map(|c| c.to_vec())
                .collect::<Vec<_>>()
        };
        Self::new(
            to_rows(revenues),
            to_rows(preferences),
            gammas.to_vec(),
            c_v,
        )
    }

    pub fn num_nests(&self) -> usize {
        self.num_nests
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }

    pub fn gamma(&self, nest: usize) -> f64 {
        self.gammas[nest]
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn revenue(&self, nest: usize, item: usize) -> f64 {
        self.revenues[nest * self.num_items + item]
    }

    pub fn preference(&self, nest: usize, item: usize) -> f64 {
        self.preferences[nest * self.num_items + item]
    }

    pub fn is_padded(&self, nest: usize, item: usize) -> bool {
        self.padded[nest * self.num_items + item]
    }

    /// Revenues of one nest as a slice.
    pub fn nest_revenues(&self, nest: usize) -> &[f64] {
        &self.revenues[nest * self.num_items..(nest + 1) * self.num_items]
    }

    /// Preference weights of one nest as a slice.
    pub fn nest_preferences(&self, nest: usize) -> &[f64] {
        &self.preferences[nest * self.num_items..(nest + 1) * self.num_items]
    }

    fn check_subset(&self, nest: usize, subset: &[usize]) -> Result<(), ModelError> {
        if nest >= self.num_nests {
            return Err(ModelError::IndexOutOfRange { nest, item: None });
        }
        for &j in subset {
            if j >= self.num_items {
                return Err(ModelError::IndexOutOfRange {
                    nest,
                    item: Some(j),
                });
            }
        }
        Ok(())
    }

    /// Total preference weight `V_i(S) = sum_{j in S} v_ij`; 0 for the empty
    /// subset.
    pub fn nest_utility(&self, nest: usize, subset: &[usize]) -> Result<f64, ModelError> {
        self.check_subset(nest, subset)?;
        Ok(subset.iter().map(|&j| self.preference(nest, j)).sum())
    }

    /// Preference-weighted mean revenue `R_i(S) = sum r v / sum v` of a
    /// subset.
    ///
    /// An empty subset, or one whose total preference is zero (all padding),
    /// carries no revenue: the result is defined as 0 and the nest
    /// contributes nothing to the combination. Degeneracy is detectable via
    /// [`Self::nest_utility`]` == 0`.
    pub fn nest_revenue(&self, nest: usize, subset: &[usize]) -> Result<f64, ModelError> {
        self.check_subset(nest, subset)?;
        let (weight, weighted_rev) = self.accumulate(nest, subset);
        if weight == 0.0 {
            Ok(0.0)
        } else {
            Ok(weighted_rev / weight)
        }
    }

    /// Sums `(V, sum r v)` over a subset (assumed index-checked).
    fn accumulate(&self, nest: usize, subset: &[usize]) -> (f64, f64) {
        let mut weight = 0.0;
        let mut weighted_rev = 0.0;
        for &j in subset {
            let v = self.preference(nest, j);
            weight += v;
            weighted_rev += self.revenue(nest, j) * v;
        }
        (weight, weighted_rev)
    }

    /// Nest-level aggregates `(u, phi) = (V^gamma, R)` of a subset, with the
    /// `(0, 0)` convention for empty or zero-preference subsets.
    pub(crate) fn nest_terms(&self, nest: usize, subset: &[usize]) -> (f64, f64) {
        let (weight, weighted_rev) = self.accumulate(nest, subset);
        if weight == 0.0 {
            (0.0, 0.0)
        } else {
            (
                math::powf(weight, self.gammas[nest]),
                weighted_rev / weight,
            )
        }
    }

    /// Exact expected revenue of an assortment combination,
    /// `sum_i R_i u_i / (1 + sum_i u_i)` with `u_i = V_i^gamma_i`.
    ///
    /// Numerator and denominator are accumulated separately and divided once.
    ///
    /// # Panics
    /// If the combination was built for different dimensions.
    pub fn expected_revenue(&self, combination: &AssortmentCombination) -> f64 {
        assert_eq!(
            combination.num_nests(),
            self.num_nests,
            "combination has wrong nest count"
        );
        let mut num = 0.0;
        let mut den = 1.0;
        for (i, subset) in combination.per_nest.iter().enumerate() {
            let (u, phi) = self.nest_terms(i, subset);
            num += phi * u;
            den += u;
        }
        num / den
    }

    /// Per-nest selection probabilities `(p_1..p_M, p_0)` for a combination.
    pub fn nest_probabilities(&self, combination: &AssortmentCombination) -> (Vec<f64>, f64) {
        assert_eq!(combination.num_nests(), self.num_nests);
        let weights: Vec<f64> = combination
            .per_nest
            .iter()
            .enumerate()
            .map(|(i, s)| self.nest_terms(i, s).0)
            .collect();
        let den = 1.0 + weights.iter().sum::<f64>();
        (weights.iter().map(|&u| u / den).collect(), 1.0 / den)
    }

    /// Samples one customer choice: first the nest (or the outside option),
    /// then an item inside the chosen nest.
    ///
    /// Draws exactly one uniform variate for the nest stage and, on a
    /// purchase, one more for the item stage, so a fixed RNG stream replays
    /// bit-identically. Nests are scanned in index order with the outside
    /// option taking the tail of the interval; items are scanned in the
    /// subset's sorted order.
    pub fn sample_choice<R: Rng + ?Sized>(
        &self,
        combination: &AssortmentCombination,
        rng: &mut R,
    ) -> ChoiceOutcome {
        assert_eq!(
            combination.num_nests(),
            self.num_nests,
            "combination has wrong nest count"
        );
        let mut weights = vec![0.0; self.num_nests];
        let mut total = 1.0; // outside option
        for (i, subset) in combination.per_nest.iter().enumerate() {
            let (weight, _) = self.accumulate(i, subset);
            let u = if weight == 0.0 {
                0.0
            } else {
                math::powf(weight, self.gammas[i])
            };
            weights[i] = u;
            total += u;
        }

        let x = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &u) in weights.iter().enumerate() {
            acc += u;
            if x < acc {
                chosen = Some(i);
                break;
            }
        }
        let Some(nest) = chosen else {
            return ChoiceOutcome::NoPurchase;
        };

        let subset = &combination.per_nest[nest];
        let weight_total: f64 = subset.iter().map(|&j| self.preference(nest, j)).sum();
        let y = rng.random::<f64>() * weight_total;
        let mut acc = 0.0;
        let mut item = *subset.last().expect("chosen nest offers items");
        for &j in subset {
            acc += self.preference(nest, j);
            if y < acc {
                item = j;
                break;
            }
        }
        ChoiceOutcome::Purchase {
            nest,
            item,
            revenue: self.revenue(nest, item),
        }
    }

    /// Per-period regret `R* - R(S)` against a known optimal value, clamped
    /// at zero so float noise cannot produce negative regret.
    pub fn per_period_regret(&self, combination: &AssortmentCombination, optimal_value: f64) -> f64 {
        let gap = optimal_value - self.expected_revenue(combination);
        if gap > 0.0 {
            gap
        } else {
            0.0
        }
    }
}

/// One subset of item indices per nest, `S = (S_1, ..., S_M)`.
///
/// Subsets are stored sorted and duplicate-free; empty subsets are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssortmentCombination {
    per_nest: Vec<Vec<usize>>,
}

impl AssortmentCombination {
    /// Validates and canonicalizes per-nest subsets against the given
    /// dimensions.
    pub fn new(
        per_nest: Vec<Vec<usize>>,
        num_nests: usize,
        num_items: usize,
    ) -> Result<Self, ModelError> {
        if per_nest.len() != num_nests {
            return Err(ModelError::Shape(alloc::format!(
                "expected {num_nests} subsets, got {}",
                per_nest.len()
            )));
        }
        let mut canonical = Vec::with_capacity(per_nest.len());
        for (nest, mut subset) in per_nest.into_iter().enumerate() {
            subset.sort_unstable();
            for pair in subset.windows(2) {
                if pair[0] == pair[1] {
                    return Err(ModelError::DuplicateItem {
                        nest,
                        item: pair[0],
                    });
                }
            }
            if let Some(&max) = subset.last() {
                if max >= num_items {
                    return Err(ModelError::IndexOutOfRange {
                        nest,
                        item: Some(max),
                    });
                }
            }
            canonical.push(subset);
        }
        Ok(Self {
            per_nest: canonical,
        })
    }

    /// The all-empty combination (nothing offered anywhere).
    pub fn empty(num_nests: usize) -> Self {
        Self {
            per_nest: vec![Vec::new(); num_nests],
        }
    }

    /// Internal constructor for subsets already sorted and validated.
    pub(crate) fn from_sorted_unchecked(per_nest: Vec<Vec<usize>>) -> Self {
        Self { per_nest }
    }

    pub fn num_nests(&self) -> usize {
        self.per_nest.len()
    }

    /// Sorted item indices offered in one nest.
    pub fn subset(&self, nest: usize) -> &[usize] {
        &self.per_nest[nest]
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.per_nest
    }

    pub fn is_all_empty(&self) -> bool {
        self.per_nest.iter().all(Vec::is_empty)
    }
}

/// Outcome of a single customer interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChoiceOutcome {
    /// The customer took the outside option; no revenue.
    NoPurchase,
    /// The customer bought `item` from `nest`, paying `revenue`.
    Purchase {
        nest: usize,
        item: usize,
        revenue: f64,
    },
}

impl ChoiceOutcome {
    pub fn is_purchase(&self) -> bool {
        matches!(self, ChoiceOutcome::Purchase { .. })
    }

    /// Revenue collected in this period (0 on no purchase).
    pub fn revenue(&self) -> f64 {
        match self {
            ChoiceOutcome::NoPurchase => 0.0,
            ChoiceOutcome::Purchase { revenue, .. } => *revenue,
        }
    }
}
