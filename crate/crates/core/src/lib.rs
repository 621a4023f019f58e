//! Dynamic assortment planning under two-level nested logit choice models.
//!
//! The crate simulates customers who first pick a product category (a *nest*)
//! and then an item within it, offers per-nest assortments, and learns unknown
//! preference weights online with epoch-based upper-confidence-bound policies.
//!
//! The main pieces:
//!
//! - [`model`] — the ground-truth choice model: exact expected revenue of an
//!   assortment combination, seeded choice sampling, per-period regret.
//! - [`levelset`] — revenue-ordered level sets per nest and their discretized
//!   variants, the reduced action space every policy works over.
//! - [`optimizer`] — static assortment optimization over level-set catalogs:
//!   a binary-search method driven by a separable potential function, plus
//!   exhaustive oracles for cross-checking.
//! - [`policy`] — the epoch-based UCB learner: offer a combination until a
//!   no-purchase, update aggregated nest-level estimates and confidence bands.
//! - [`adversarial`] — a two-nest-type hard instance family together with
//!   numeric checks of its revenue gaps and one-swap KL divergences.
//! - [`seed`] — stable seed derivation for reproducible experiment streams.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded or sandboxed builds. All floating-point math
//! goes through `libm` so results are identical across platforms.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adversarial;
pub mod levelset;
mod math;
pub mod model;
pub mod optimizer;
pub mod policy;
pub mod seed;

pub use adversarial::AdversarialSpec;
pub use levelset::{Singleton, SingletonCatalog};
pub use model::{AssortmentCombination, ChoiceOutcome, NestedLogitInstance};
pub use optimizer::SingletonValueTable;
pub use policy::{EpochRecord, PolicyConfig, PolicyState, RegretCurve};
