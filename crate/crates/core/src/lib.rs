//! Generalized Pauli channel dynamics built from mixtures of legitimate
//! dynamical maps.
//!
//! The crate constructs `Λ(t) = Σ_α x_α exp(w_α(t) L_α)` over a full set of
//! mutually unbiased bases, computes its time-local decoherence rates,
//! classifies CP-/P-divisibility and eternal non-Markovianity, realizes the
//! probability flow as classical rate equations, and cross-checks all of it
//! against a brute-force superoperator oracle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod classical;
pub mod divisibility;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod linalg;
pub mod mixture;
pub mod mub;
pub mod oracle;
pub mod quad;
pub mod weight;

pub use channel::{ChannelState, DensityMatrix};
pub use classical::{
    integrate, markov_generator, markov_generator_for_rate, mixture_generator, ratedep_generator,
    ClassicalGenerator, Flavor, ProbabilityTrajectory,
};
pub use divisibility::{classify, scan_region, DivisibilityVerdict, RegionGrid, RegionMode};
pub use error::{Error, Result};
pub use fixtures::{fixture, FixtureParams};
pub use grid::TimeGrid;
pub use mixture::{all_negative_witness, rates_semigroup, MixtureSpec, RateVector};
pub use mub::{build_eigenbasis, build_mubs, MubSet, WeylEigenbasis};
pub use oracle::{reintegrate, superop_from_channel, CheckRecord, Superoperator};
pub use weight::WeightFunction;
