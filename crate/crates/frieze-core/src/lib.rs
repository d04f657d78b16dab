//! Approximate scaled copies of integer patterns in positive-density sets.
//!
//! Any set of integers whose forward density exists and is positive
//! contains, for every accuracy `epsilon > 0` and every finite pattern
//! `q_1 < ... < q_k`, an approximate `n`-scaled copy of the pattern for
//! all large enough `n`: members `r_1, ..., r_k` with
//! `|r_i - t_i * n| < n * epsilon`, where `t_i = (q_i - q_1)/(q_k - q_1)`.
//! This crate makes that constructive and measurable:
//!
//! * [`set_model`] — decidable set models (residue classes, finite sets,
//!   boolean combinations, counter-based pseudo-random sets, primes,
//!   bitmap files) and their observer windows;
//! * [`density`] — exact partial densities, running indicator averages,
//!   closed forms, and a three-tier density verdict;
//! * [`certificate`] — the exact constant chain `eps_bar -> delta -> n0
//!   -> N0 -> N = max(k, N0)` guaranteeing scales for every `n >= N`;
//! * [`scale_search`] — nearest-first window searches, certified and
//!   loose modes, and independent verification;
//! * [`experiment`] — empirical minimal thresholds, failure scans, exact
//!   copy probes, and byte-reproducible CSV reports;
//! * [`spec_expr`] — the textual grammar for set models.
//!
//! Everything on the certification path uses exact rational arithmetic:
//! the chain inequalities are strict, and rounding must not be able to
//! flip any of them. The numeric core is generic over the integer scalar
//! inside [`num_rational::Ratio`] (see [`rat::RatioInt`]); the aliases
//! below fix the default, overflow-free instantiation.

pub mod bits;
pub mod certificate;
pub mod density;
pub mod error;
pub mod experiment;
pub mod rat;
pub mod scale_search;
pub mod set_model;
pub mod spec_expr;

pub use certificate::{FriezeCertificate, OnsetBasis, ScalePattern};
pub use density::{DensityEstimate, Verdict};
pub use error::Error;
pub use experiment::ExperimentReport;
pub use scale_search::{ScaleResult, SearchMode, SearchOutcome, TargetVector};
pub use set_model::{ObserverWindow, SetSpec};
pub use spec_expr::{parse_spec, spec_to_text};

/// Default exact integer scalar.
pub type Int = num_bigint::BigInt;
/// Default exact rational scalar.
pub type Rat = num_rational::Ratio<Int>;

/// [`FriezeCertificate`] over the default scalar.
pub type Certificate = FriezeCertificate<Int>;
/// [`DensityEstimate`] over the default scalar.
pub type Estimate = DensityEstimate<Int>;
/// [`ScaleResult`] over the default scalar.
pub type Scale = ScaleResult<Int>;
/// [`ExperimentReport`] over the default scalar.
pub type Report = ExperimentReport<Int>;
