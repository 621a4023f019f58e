//! Hard instance family with two nest types, and numeric verification of
//! its key quantities.
//!
//! Every nest offers three items with revenues `(1, 0.8, rho)`; type A nests
//! have preferences `((1+e)/M^2, (1-e)/M^2, 1/M^2)`, type B nests swap the
//! first two, and all dissimilarity exponents are `0.5`. The constant `rho`
//! makes `{1, 2}` and `{1, 2, 3}` exactly revenue-equivalent at `e = 0`, so
//! the tiny tilt `e` decides the optimal assortment per nest type: `{1, 2}`
//! for type A, `{1, 2, 3}` for type B. Telling the types apart requires
//! observing purchases, and the two checks quantify how hard that is:
//!
//! - [`deviation_gap_check`] — offering a wrong assortment in a nest costs
//!   expected revenue proportional to `e / M`;
//! - [`kl_one_swap`] — flipping one nest's type perturbs the outcome law by
//!   only `O(e^2 / M)` in KL divergence, for any offered combination.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::math;
use crate::model::{AssortmentCombination, ModelError, NestedLogitInstance};

/// Number of items per nest in the construction.
pub const ADVERSARIAL_ITEMS: usize = 3;

/// Reference constant for the one-swap KL bound: the maximum of
/// `min-direction KL * M / e^2` observed in a calibration sweep over
/// `M in {4, 8, 16}`, `e in {0.1, 0.05, 0.01}`, every one-swap pair of the
/// canonical type assignment, and 20 random assortments per pair
/// (ChaCha8 stream seeded with 0x6B6C_7377, via [`kl_reference_sweep`]).
pub const KL_REFERENCE_CONSTANT: f64 = 1.6283391115681247;

/// Error from adversarial construction or checks.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarialError {
    /// `M` must be a positive multiple of 4.
    BadNestCount(usize),
    /// `epsilon` must lie strictly between 0 and 1.
    BadEpsilon(f64),
    /// The type-A set has the wrong size or an out-of-range nest.
    BadTypeSet,
    /// The two instances do not differ in exactly one nest's type.
    NotOneSwap,
    /// Exhaustive enumeration would exceed the cap.
    CapExceeded { size: u64, cap: u64 },
    /// Underlying model construction failed.
    Model(ModelError),
}

impl fmt::Display for AdversarialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarialError::BadNestCount(m) => {
                write!(f, "nest count {m} is not a positive multiple of 4")
            }
            AdversarialError::BadEpsilon(e) => write!(f, "epsilon {e} outside (0, 1)"),
            AdversarialError::BadTypeSet => write!(f, "invalid type-A nest set"),
            AdversarialError::NotOneSwap => {
                write!(f, "instances do not differ in exactly one nest")
            }
            AdversarialError::CapExceeded { size, cap } => {
                write!(f, "enumeration of {size} candidates exceeds cap {cap}")
            }
            AdversarialError::Model(e) => write!(f, "model error: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AdversarialError {}

impl From<ModelError> for AdversarialError {
    fn from(e: ModelError) -> Self {
        AdversarialError::Model(e)
    }
}

/// The third item's revenue: the value making `{1, 2}` and `{1, 2, 3}`
/// revenue-equivalent at `e = 0` under symmetric preferences,
/// `0.9 sqrt(2) (3 + sqrt(3)) / (1 + sqrt(2)) - 1.8 ~ 0.694774`.
pub fn revenue_rho() -> f64 {
    let sqrt2 = math::sqrt(2.0);
    let sqrt3 = math::sqrt(3.0);
    0.9 * sqrt2 * (3.0 + sqrt3) / (1.0 + sqrt2) - 1.8
}

/// Parameters of one hard instance: nest count, tilt size, and which nests
/// are type A.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialSpec {
    num_nests: usize,
    epsilon: f64,
    type_a_set: Vec<usize>,
    rho: f64,
}

impl AdversarialSpec {
    /// Canonical spec: the first `M/4` nests are type A.
    pub fn new(num_nests: usize, epsilon: f64) -> Result<Self, AdversarialError> {
        let type_a = (0..num_nests / 4).collect();
        Self::with_type_a_set(num_nests, epsilon, type_a)
    }

    /// Spec with an explicit type-A set of size `M/4`.
    pub fn with_type_a_set(
        num_nests: usize,
        epsilon: f64,
        mut type_a_set: Vec<usize>,
    ) -> Result<Self, AdversarialError> {
        if num_nests == 0 || !num_nests.is_multiple_of(4) {
            return Err(AdversarialError::BadNestCount(num_nests));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
            return Err(AdversarialError::BadEpsilon(epsilon));
        }
        type_a_set.sort_unstable();
        type_a_set.dedup();
        if type_a_set.len() != num_nests / 4
            || type_a_set.iter().any(|&i| i >= num_nests)
        {
            return Err(AdversarialError::BadTypeSet);
        }
        Ok(Self {
            num_nests,
            epsilon,
            type_a_set,
            rho: revenue_rho(),
        })
    }

    pub fn num_nests(&self) -> usize {
        self.num_nests
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn type_a_set(&self) -> &[usize] {
        &self.type_a_set
    }

    pub fn is_type_a(&self, nest: usize) -> bool {
        self.type_a_set.binary_search(&nest).is_ok()
    }

    /// Builds the instance for this spec.
    pub fn build_instance(&self) -> NestedLogitInstance {
        build_typed_instance(self.num_nests, self.epsilon, &self.type_a_set)
            .expect("spec was validated")
    }

    /// The known optimal combination: `{0, 1}` in type A nests, `{0, 1, 2}`
    /// in type B nests.
    pub fn optimal_combination(&self) -> AssortmentCombination {
        let subsets = (0..self.num_nests)
            .map(|i| {
                if self.is_type_a(i) {
                    vec![0, 1]
                } else {
                    vec![0, 1, 2]
                }
            })
            .collect();
        AssortmentCombination::from_sorted_unchecked(subsets)
    }
}

/// Builds a two-type instance for an arbitrary type-A nest set (any size).
///
/// Useful for one-swap neighbors, whose type-A sets are off the canonical
/// `M/4` size by one.
pub fn build_typed_instance(
    num_nests: usize,
    epsilon: f64,
    type_a_set: &[usize],
) -> Result<NestedLogitInstance, AdversarialError> {
    if num_nests == 0 {
        return Err(AdversarialError::BadNestCount(num_nests));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(AdversarialError::BadEpsilon(epsilon));
    }
    if type_a_set.iter().any(|&i| i >= num_nests) {
        return Err(AdversarialError::BadTypeSet);
    }
    let rho = revenue_rho();
    let m2 = (num_nests * num_nests) as f64;
    let hi = (1.0 + epsilon) / m2;
    let lo = (1.0 - epsilon) / m2;
    let mid = 1.0 / m2;
    let mut revenues = Vec::with_capacity(num_nests);
    let mut preferences = Vec::with_capacity(num_nests);
    for nest in 0..num_nests {
        revenues.push(vec![1.0, 0.8, rho]);
        if type_a_set.contains(&nest) {
            preferences.push(vec![hi, lo, mid]);
        } else {
            preferences.push(vec![lo, hi, mid]);
        }
    }
    let gammas = vec![0.5; num_nests];
    Ok(NestedLogitInstance::new(revenues, preferences, gammas, 1.0)?)
}

/// The revenue loss of one deviating assortment.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationGap {
    /// Which nest deviates.
    pub nest: usize,
    /// Bitmask of the deviating subset over the 3 items.
    pub mask: u8,
    /// `R(S*) - R(S)`.
    pub gap: f64,
    /// `gap * M / epsilon` (one deviating nest).
    pub normalized: f64,
}

/// Statistics of the exhaustive scan over all `8^M` combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveGapStats {
    /// Combinations evaluated (including the optimum itself).
    pub candidates: u64,
    /// Minimum of `gap * M / (m * epsilon)` over deviating combinations,
    /// where `m` counts deviating nests.
    pub min_normalized: f64,
    pub max_normalized: f64,
    /// True if every deviating combination has a strictly positive gap.
    pub all_positive: bool,
}

/// Gap verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub epsilon: f64,
    pub num_nests: usize,
    /// Every single-nest deviation from the optimum (7 per nest), in
    /// (nest, mask) order.
    pub single_deviations: Vec<DeviationGap>,
    /// Full scan over all combinations; present when `8^M` fits the cap.
    pub exhaustive: Option<ExhaustiveGapStats>,
}

impl GapReport {
    pub fn all_single_positive(&self) -> bool {
        self.single_deviations.iter().all(|d| d.gap > 0.0)
    }

    /// The per-nest type-swap deviations (`{0,1}` offered in a type B nest,
    /// `{0,1,2}` in a type A nest). These are the binding deviations: their
    /// gaps vanish as `epsilon -> 0` and scale linearly in it, while gross
    /// deviations keep an epsilon-independent gap.
    pub fn type_swap_deviations(&self, spec: &AdversarialSpec) -> Vec<&DeviationGap> {
        (0..self.num_nests)
            .map(|nest| {
                let mask = if spec.is_type_a(nest) { 0b111 } else { 0b011 };
                self.single_deviations
                    .iter()
                    .find(|d| d.nest == nest && d.mask == mask)
                    .expect("swap deviation present for every nest")
            })
            .collect()
    }

    pub fn min_single_normalized(&self) -> f64 {
        self.single_deviations
            .iter()
            .map(|d| d.normalized)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_single_normalized(&self) -> f64 {
        self.single_deviations
            .iter()
            .map(|d| d.normalized)
            .fold(0.0, f64::max)
    }
}

/// Default cap on `8^M` for the exhaustive part of the gap check.
pub const GAP_EXHAUSTIVE_CAP: u64 = 1 << 20;

/// Measures the revenue gap of deviations from the known optimum.
///
/// Single-nest deviations (the binding case) are always evaluated; when
/// `8^M` fits under `cap`, every combination is scanned as well so
/// multi-nest deviations are covered.
pub fn deviation_gap_check(
    spec: &AdversarialSpec,
    instance: &NestedLogitInstance,
    cap: u64,
) -> GapReport {
    let m = spec.num_nests();
    let optimal = spec.optimal_combination();
    let r_star = instance.expected_revenue(&optimal);
    let eps = spec.epsilon();

    let mut single_deviations = Vec::with_capacity(m * 7);
    for nest in 0..m {
        let opt_mask = subset_to_mask(optimal.subset(nest));
        for mask in 0u8..8 {
            if mask == opt_mask {
                continue;
            }
            let mut subsets: Vec<Vec<usize>> =
                optimal.subsets().to_vec();
            subsets[nest] = mask_to_subset(mask);
            let comb = AssortmentCombination::from_sorted_unchecked(subsets);
            let gap = r_star - instance.expected_revenue(&comb);
            single_deviations.push(DeviationGap {
                nest,
                mask,
                gap,
                normalized: gap * m as f64 / eps,
            });
        }
    }

    let size = (8u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    let exhaustive = if size <= cap {
        let mut stats = ExhaustiveGapStats {
            candidates: size,
            min_normalized: f64::INFINITY,
            max_normalized: 0.0,
            all_positive: true,
        };
        let opt_masks: Vec<u8> = (0..m)
            .map(|nest| subset_to_mask(optimal.subset(nest)))
            .collect();
        let mut masks = vec![0u8; m];
        loop {
            let deviating = masks
                .iter()
                .zip(&opt_masks)
                .filter(|(a, b)| a != b)
                .count();
            if deviating > 0 {
                let subsets = masks.iter().map(|&mk| mask_to_subset(mk)).collect();
                let comb = AssortmentCombination::from_sorted_unchecked(subsets);
                let gap = r_star - instance.expected_revenue(&comb);
                let normalized = gap * m as f64 / (deviating as f64 * eps);
                stats.min_normalized = stats.min_normalized.min(normalized);
                stats.max_normalized = stats.max_normalized.max(normalized);
                if gap <= 0.0 {
                    stats.all_positive = false;
                }
            }
            if !advance_masks(&mut masks) {
                break;
            }
        }
        Some(stats)
    } else {
        None
    };

    GapReport {
        epsilon: eps,
        num_nests: m,
        single_deviations,
        exhaustive,
    }
}

fn advance_masks(masks: &mut [u8]) -> bool {
    let mut i = masks.len();
    while i > 0 {
        i -= 1;
        masks[i] += 1;
        if masks[i] < 8 {
            return true;
        }
        masks[i] = 0;
    }
    false
}

fn mask_to_subset(mask: u8) -> Vec<usize> {
    (0..ADVERSARIAL_ITEMS)
        .filter(|j| mask & (1 << j) != 0)
        .collect()
}

fn subset_to_mask(subset: &[usize]) -> u8 {
    subset.iter().fold(0u8, |acc, &j| acc | (1 << j))
}

/// Exact KL divergence `KL(P || Q)` between the single-period outcome laws
/// of two instances under a common offered combination.
///
/// Outcomes are `(nest, item)` pairs plus the no-purchase event. Returns
/// `f64::INFINITY` if some outcome is possible under `P` but not under `Q`.
pub fn choice_kl_divergence(
    p_instance: &NestedLogitInstance,
    q_instance: &NestedLogitInstance,
    combination: &AssortmentCombination,
) -> f64 {
    let (p_nest, p0) = p_instance.nest_probabilities(combination);
    let (q_nest, q0) = q_instance.nest_probabilities(combination);
    // q0 >= 1 / (1 + sum u) > 0 always
    let mut kl = p0 * math::ln(p0 / q0);
    for (nest, subset) in combination.subsets().iter().enumerate() {
        if subset.is_empty() || p_nest[nest] == 0.0 {
            continue;
        }
        let p_total = p_instance.nest_utility(nest, subset).expect("valid subset");
        let q_total = q_instance.nest_utility(nest, subset).expect("valid subset");
        for &item in subset {
            let p_ij = p_nest[nest] * p_instance.preference(nest, item) / p_total;
            if p_ij == 0.0 {
                continue;
            }
            let q_ij = if q_total > 0.0 {
                q_nest[nest] * q_instance.preference(nest, item) / q_total
            } else {
                0.0
            };
            if q_ij == 0.0 {
                return f64::INFINITY;
            }
            kl += p_ij * math::ln(p_ij / q_ij);
        }
    }
    kl.max(0.0)
}

/// KL divergence between two instances that differ in exactly one nest's
/// type, under a common offered combination.
///
/// Verifies the one-swap relation: equal revenues and exponents everywhere,
/// preferences differing in exactly one nest.
pub fn kl_one_swap(
    instance_u: &NestedLogitInstance,
    instance_w: &NestedLogitInstance,
    combination: &AssortmentCombination,
) -> Result<f64, AdversarialError> {
    if instance_u.num_nests() != instance_w.num_nests()
        || instance_u.num_items() != instance_w.num_items()
    {
        return Err(AdversarialError::NotOneSwap);
    }
    let mut differing = 0usize;
    for nest in 0..instance_u.num_nests() {
        if instance_u.gamma(nest) != instance_w.gamma(nest)
            || instance_u.nest_revenues(nest) != instance_w.nest_revenues(nest)
        {
            return Err(AdversarialError::NotOneSwap);
        }
        if instance_u.nest_preferences(nest) != instance_w.nest_preferences(nest) {
            differing += 1;
        }
    }
    if differing != 1 {
        return Err(AdversarialError::NotOneSwap);
    }
    Ok(choice_kl_divergence(instance_u, instance_w, combination))
}

/// All type-A sets at symmetric difference exactly 1 from `type_a_set`.
pub fn one_swap_neighbors(type_a_set: &[usize], num_nests: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(num_nests);
    for nest in 0..num_nests {
        let mut neighbor = type_a_set.to_vec();
        match neighbor.binary_search(&nest) {
            Ok(pos) => {
                neighbor.remove(pos);
            }
            Err(pos) => {
                neighbor.insert(pos, nest);
            }
        }
        out.push(neighbor);
    }
    out
}

/// Uniformly random combination over the 3-item nests (each of the 8
/// subsets equally likely per nest).
pub fn random_combination<R: Rng + ?Sized>(
    num_nests: usize,
    rng: &mut R,
) -> AssortmentCombination {
    let subsets = (0..num_nests)
        .map(|_| mask_to_subset(rng.random_range(0..8u8)))
        .collect();
    AssortmentCombination::from_sorted_unchecked(subsets)
}

/// Sweeps the normalized one-swap KL statistic `min-direction KL * M / e^2`
/// and returns its maximum.
///
/// For each `(M, e)` the canonical spec's instance is compared against every
/// one-swap neighbor under `assortments_per_pair` random combinations. This
/// is the sweep behind [`KL_REFERENCE_CONSTANT`].
pub fn kl_reference_sweep<R: Rng + ?Sized>(
    nest_counts: &[usize],
    epsilons: &[f64],
    assortments_per_pair: usize,
    rng: &mut R,
) -> f64 {
    let mut max_normalized = 0.0f64;
    for &m in nest_counts {
        for &eps in epsilons {
            let spec = AdversarialSpec::new(m, eps).expect("valid sweep parameters");
            let instance_u = spec.build_instance();
            for neighbor in one_swap_neighbors(spec.type_a_set(), m) {
                let instance_w =
                    build_typed_instance(m, eps, &neighbor).expect("valid neighbor");
                for _ in 0..assortments_per_pair {
                    let comb = random_combination(m, rng);
                    let kl_uw = choice_kl_divergence(&instance_u, &instance_w, &comb);
                    let kl_wu = choice_kl_divergence(&instance_w, &instance_u, &comb);
                    let kl = kl_uw.min(kl_wu);
                    max_normalized = max_normalized.max(kl * m as f64 / (eps * eps));
                }
            }
        }
    }
    max_normalized
}
