//! Reliability of repairable systems via infinite-dimensional signatures.
//!
//! A repairable system keeps working as long as each new component failure
//! finds the previous one already repaired, so the index of the fatal
//! failure is unbounded and the system signature has infinitely many
//! entries. For exponential working and repair times the signature is a
//! finite prefix plus an exact geometric tail governed by the repair-race
//! probability ξ = μ/(λ+μ), and the failure epochs are binomial mixtures of
//! Erlang-sum distributions. System reliability is the signature-weighted
//! mixture of epoch survivals
//!
//!   R(t) = Σ_k s_k · P{U_k > t}
//!
//! evaluated over a truncated signature with exact accounting of the
//! discarded mass.
//!
//! Modules:
//! - [`distributions`]: Erlang and Erlang-sum survival functions, ξ in
//!   closed form and by Stieltjes quadrature.
//! - [`signature`]: geometric-tail signatures of the supported topologies
//!   and their truncation.
//! - [`structure`]: min/max lifetime algebra of the underlying coherent
//!   structures, used as brute-force validators.
//! - [`failure_epochs`]: the epoch mixtures P{U_k > t}.
//! - [`reliability`]: assembly of reliability curves.
//! - [`montecarlo`]: a deterministic discrete-event oracle with
//!   per-replication random streams.
//! - [`cli`]: the `repsig` command-line frontend.
//!
//! With the default `parallel` feature, grid evaluation and Monte Carlo
//! replications run on rayon; results are bit-identical to the sequential
//! build for any worker count.

pub mod cli;
pub mod distributions;
pub mod failure_epochs;
pub mod montecarlo;
pub mod reliability;
pub mod signature;
pub mod structure;

mod error;
mod numeric;

pub use error::{Error, Result};
