//! JSON verification report for generated hard instances.

use anyhow::Result;
use nlbandit_core::adversarial::{
    build_typed_instance, deviation_gap_check, kl_one_swap, one_swap_neighbors,
    random_combination, AdversarialSpec, GAP_EXHAUSTIVE_CAP, KL_REFERENCE_CONSTANT,
};
use nlbandit_core::NestedLogitInstance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Random assortments drawn per one-swap pair in the KL section.
const KL_ASSORTMENTS_PER_PAIR: usize = 20;

#[derive(Debug, Serialize)]
pub struct AdversarialReport {
    pub num_nests: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub type_a_nests: Vec<usize>,
    /// Expected revenue of the designed optimal combination.
    pub optimal_value: f64,
    pub gap: GapSection,
    pub kl: KlSection,
}

#[derive(Debug, Serialize)]
pub struct GapSection {
    /// Single-nest deviations from the optimum (always evaluated).
    pub num_single_deviations: usize,
    pub all_single_positive: bool,
    pub min_single_gap: f64,
    /// `min gap * M / epsilon` over single-nest deviations.
    pub min_single_normalized: f64,
    pub max_single_normalized: f64,
    /// `gap(eps) / gap(eps/2)` for the per-nest type-swap deviations (the
    /// binding ones); near 2 when the gap is linear in epsilon.
    pub swap_gap_ratio_min: f64,
    pub swap_gap_ratio_max: f64,
    /// Full `8^M` scan, when feasible.
    pub exhaustive: Option<ExhaustiveSection>,
}

#[derive(Debug, Serialize)]
pub struct ExhaustiveSection {
    pub candidates: u64,
    pub all_positive: bool,
    pub min_normalized: f64,
    pub max_normalized: f64,
}

#[derive(Debug, Serialize)]
pub struct KlSection {
    pub num_pairs: usize,
    pub assortments_per_pair: usize,
    /// Largest min-direction KL over all pairs and sampled assortments.
    pub max_kl: f64,
    /// `max KL * M / epsilon^2`.
    pub max_normalized: f64,
    pub reference_constant: f64,
    pub within_twice_reference: bool,
}

/// Builds the instance for `(m, epsilon)` and verifies its gap and KL
/// ingredients. `seed` drives the random assortments of the KL section.
pub fn build_report(
    m: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(NestedLogitInstance, AdversarialReport)> {
    let spec = AdversarialSpec::new(m, epsilon).map_err(|e| anyhow::anyhow!("{e}"))?;
    let instance = spec.build_instance();
    let optimal_value = instance.expected_revenue(&spec.optimal_combination());

    let gap_report = deviation_gap_check(&spec, &instance, GAP_EXHAUSTIVE_CAP);
    let min_single_gap = gap_report
        .single_deviations
        .iter()
        .map(|d| d.gap)
        .fold(f64::INFINITY, f64::min);

    // binding-gap scaling against the half-epsilon construction
    let half_spec =
        AdversarialSpec::new(m, epsilon / 2.0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let half_report = deviation_gap_check(&half_spec, &half_spec.build_instance(), 0);
    let (mut ratio_min, mut ratio_max) = (f64::INFINITY, 0.0f64);
    for (a, b) in gap_report
        .type_swap_deviations(&spec)
        .iter()
        .zip(half_report.type_swap_deviations(&half_spec))
    {
        let ratio = a.gap / b.gap;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
    }

    let gap = GapSection {
        num_single_deviations: gap_report.single_deviations.len(),
        all_single_positive: gap_report.all_single_positive(),
        min_single_gap,
        min_single_normalized: gap_report.min_single_normalized(),
        max_single_normalized: gap_report.max_single_normalized(),
        swap_gap_ratio_min: ratio_min,
        swap_gap_ratio_max: ratio_max,
        exhaustive: gap_report.exhaustive.as_ref().map(|s| ExhaustiveSection {
            candidates: s.candidates,
            all_positive: s.all_positive,
            min_normalized: s.min_normalized,
            max_normalized: s.max_normalized,
        }),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let neighbors = one_swap_neighbors(spec.type_a_set(), m);
    let mut max_kl = 0.0f64;
    for neighbor in &neighbors {
        let other = build_typed_instance(m, epsilon, neighbor)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        for _ in 0..KL_ASSORTMENTS_PER_PAIR {
            let comb = random_combination(m, &mut rng);
            let forward = kl_one_swap(&instance, &other, &comb)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let backward = kl_one_swap(&other, &instance, &comb)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            max_kl = max_kl.max(forward.min(backward));
        }
    }
    let max_normalized = max_kl * m as f64 / (epsilon * epsilon);
    let kl = KlSection {
        num_pairs: neighbors.len(),
        assortments_per_pair: KL_ASSORTMENTS_PER_PAIR,
        max_kl,
        max_normalized,
        reference_constant: KL_REFERENCE_CONSTANT,
        within_twice_reference: max_normalized <= 2.0 * KL_REFERENCE_CONSTANT,
    };

    Ok((
        instance,
        AdversarialReport {
            num_nests: m,
            epsilon,
            rho: spec.rho(),
            type_a_nests: spec.type_a_set().to_vec(),
            optimal_value,
            gap,
            kl,
        },
    ))
}
